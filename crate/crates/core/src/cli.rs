//! Command-line workflow: `synth`, `split`, `train`, `eval` and `gradcheck`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or configuration error,
//! 3 failed check.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::ModelKind;
use crate::data::{gen_synthetic, read_aefv, split, write_aefv, FeatureSet, PolarNormal, SplitSpec};
use crate::error::{Error, Result};
use crate::grad::{compare_gradients, fd_grad, sample_gradient};
use crate::metrics::{roc_auc, RocCurve, RunSummary};
use crate::model::{Model, ModelParams};
use crate::optim::{train_with, EpochRecord, TrainConfig, TrainOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

pub const WORKERS_ENV: &str = "AECQTL_WORKERS";
pub const CHECKPOINT_HEADER: &str = "aecqtl-checkpoint,1";
pub const SUMMARY_HEADER: &str =
    "model,source_dim,qubits,layers,params_quantum,params_classical,acc_mean,acc_std,final_loss_mean,auc";
pub const LOSS_CURVE_HEADER: &str = "epoch,mean_train_loss,test_accuracy";

#[derive(Debug, Parser)]
#[command(name = "aecqtl", version, about = "Amplitude-encoded quantum transfer-learning classifiers")]
pub struct Cli {
    /// Cap on worker threads for circuit evaluation [env: AECQTL_WORKERS; default: all cores]
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a two-class Gaussian blob data set as AEFV.
    Synth(SynthArgs),
    /// Split an AEFV file into class-balanced train and test files.
    Split(SplitArgs),
    /// Train repeated runs and write curves, checkpoints and a summary row.
    Train(TrainArgs),
    /// Evaluate a checkpoint on an AEFV file.
    Eval(EvalArgs),
    /// Compare parameter-shift gradients with finite differences on a random instance.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub per_class: usize,
    #[arg(long)]
    pub sep: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Training samples per class.
    #[arg(long, default_value_t = 256)]
    pub train_count: usize,
    /// Test samples per class.
    #[arg(long, default_value_t = 128)]
    pub test_count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_kind)]
    pub model: ModelKind,
    /// Ansatz layers (TLQNN) or quantum fully-connected layers (TLQCNN) [default: 4 / 6]
    #[arg(long)]
    pub layers: Option<usize>,
    /// Register size; defaults to the smallest that holds the features.
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: u64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub decay_every: u64,
    #[arg(long, default_value_t = 0.1)]
    pub decay_factor: f64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pool test scores over all runs for the summary AUC instead of using the first run.
    #[arg(long)]
    pub pooled_auc: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Write the ROC curve as CSV.
    #[arg(long)]
    pub roc: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, value_parser = parse_kind)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 4)]
    pub qubits: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Relative tolerance; differences below `tolerance × 1e-3` always pass.
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
}

fn parse_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Data(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

/// Parse `args` (including the program name) and run the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_workers(cli.workers) {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let outcome = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Split(a) => cmd_split(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Gradcheck(a) => cmd_gradcheck(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            EXIT_CHECK
        }
    }
}

fn configure_workers(flag: Option<usize>) -> std::result::Result<(), String> {
    let workers = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = workers {
        if n == 0 {
            return Err("worker count must be at least 1".into());
        }
        // Fails only if a global pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<(), Failure> {
    let set = gen_synthetic(a.dim, a.per_class, a.sep, a.seed)?;
    write_aefv(&set, &a.out)?;
    println!("wrote {} samples of dim {} to {}", set.len(), set.dim(), a.out.display());
    Ok(())
}

fn cmd_split(a: &SplitArgs) -> Result<(), Failure> {
    let set = read_aefv(&a.input)?;
    let (train, test) = split(
        &set,
        SplitSpec {
            per_class_train: a.train_count,
            per_class_test: a.test_count,
            seed: a.seed,
        },
    )?;
    write_aefv(&train, &a.train_out)?;
    write_aefv(&test, &a.test_out)?;
    println!("train {} samples, test {} samples", train.len(), test.len());
    Ok(())
}

pub fn default_layers(kind: ModelKind) -> usize {
    match kind {
        ModelKind::Tlqnn => 4,
        ModelKind::Tlqcnn => 6,
    }
}

fn cmd_train(a: &TrainArgs) -> Result<(), Failure> {
    let train_set = read_aefv(&a.train)?;
    let test_set = read_aefv(&a.test)?;
    if train_set.dim() != test_set.dim() {
        return Err(Error::config(format!(
            "train data has {} features, test data has {}",
            train_set.dim(),
            test_set.dim()
        ))
        .into());
    }
    let layers = a.layers.unwrap_or_else(|| default_layers(a.model));
    let classes = train_set.class_count().max(test_set.class_count()).max(2);
    let model = match a.qubits {
        Some(n) => Model::with_qubits(a.model, train_set.dim(), n, layers, classes)?,
        None => Model::new(a.model, train_set.dim(), layers, classes)?,
    };
    let config = TrainConfig {
        epochs: a.epochs as usize,
        batch_size: a.batch as usize,
        lr0: a.lr,
        decay_every: a.decay_every as usize,
        decay_factor: a.decay_factor,
        seed: a.seed,
        repeats: a.repeats as usize,
    };
    config.validate()?;

    let (pq, pc) = model.param_count();
    let cfg = model.config();
    println!(
        "model {} on {} qubits, {} layers, measuring {:?}",
        cfg.kind, cfg.n_qubits, cfg.layers, cfg.measured
    );
    println!("parameters: quantum={pq} classical={pc} total={}", pq + pc);

    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let mut outcomes = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let run_cfg = TrainConfig {
            seed: config.seed.wrapping_add(r as u64),
            ..config.clone()
        };
        let outcome = train_with(&model, &train_set, &test_set, &run_cfg, |rec| {
            println!(
                "run {r} seed {} epoch {:>3}  loss {:.6}  test acc {:.2}%",
                run_cfg.seed, rec.epoch, rec.mean_train_loss, rec.test_accuracy
            );
        })?;
        let dir = a.out_dir.join(format!("run_{r}"));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_text(&dir.join("loss_curve.csv"), &loss_curve_csv(&outcome.curve))?;
        Checkpoint::from_outcome(&model, &run_cfg, &outcome).save(dir.join("checkpoint.txt"))?;
        outcomes.push(outcome);
    }

    let auc = summary_auc(&model, &outcomes, &test_set, a.pooled_auc)?;
    let accs: Vec<f64> = outcomes.iter().map(|o| o.final_record().test_accuracy).collect();
    let losses: Vec<f64> = outcomes.iter().map(|o| o.final_record().mean_train_loss).collect();
    let summary = RunSummary::from_runs(&accs, &losses, auc)?;
    let csv = summary_csv(&model, &summary);
    write_text(&a.out_dir.join("summary.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn summary_auc(
    model: &Model,
    outcomes: &[TrainOutcome],
    test_set: &FeatureSet,
    pooled: bool,
) -> Result<Option<f64>> {
    if model.config().num_classes != 2 || test_set.class_sizes().contains(&0) {
        return Ok(None);
    }
    let runs = if pooled { outcomes } else { &outcomes[..1] };
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for o in runs {
        let ev = model.evaluate(&o.params, test_set)?;
        scores.extend(ev.scores(1));
        truth.extend(ev.truth);
    }
    Ok(Some(roc_auc(&scores, &truth)?.auc))
}

pub fn loss_curve_csv(curve: &[EpochRecord]) -> String {
    let mut out = format!("{LOSS_CURVE_HEADER}\n");
    for r in curve {
        writeln!(out, "{},{:?},{:?}", r.epoch, r.mean_train_loss, r.test_accuracy).unwrap();
    }
    out
}

pub fn summary_csv(model: &Model, s: &RunSummary) -> String {
    let cfg = model.config();
    let (pq, pc) = model.param_count();
    let auc = s.auc.map(|v| format!("{v:?}")).unwrap_or_default();
    format!(
        "{SUMMARY_HEADER}\n{},{},{},{},{pq},{pc},{:?},{:?},{:?},{auc}\n",
        cfg.kind, cfg.feature_dim, cfg.n_qubits, cfg.layers, s.accuracy_mean, s.accuracy_std, s.final_loss_mean
    )
}

pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        writeln!(out, "{:?},{:?},{:?}", p.threshold, p.fpr, p.tpr).unwrap();
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Failure> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let model = ckpt.model()?;
    let set = read_aefv(&a.data)?;
    let ev = model.evaluate(&ckpt.params, &set)?;
    println!("samples: {}", set.len());
    println!("accuracy: {:.4}%", ev.accuracy);
    let binary = model.config().num_classes == 2 && !set.class_sizes().contains(&0);
    if binary {
        let curve = roc_auc(&ev.scores(1), &ev.truth)?;
        println!("auc: {:.6}", curve.auc);
        if let Some(path) = &a.roc {
            write_text(path, &roc_csv(&curve))?;
        }
    } else if a.roc.is_some() {
        return Err(Error::config("ROC output needs binary labels with both classes present").into());
    }
    Ok(())
}

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<(), Failure> {
    let dim = 1usize << a.qubits.min(crate::statevector::MAX_QUBITS);
    let model = Model::with_qubits(a.model, dim, a.qubits, a.layers, a.classes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let params = model.init_params(&mut rng);
    let mut normal = PolarNormal::default();
    let x: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
    let label = rng.gen_range(0..a.classes);

    let analytic = sample_gradient(&model, &params, &x, label)?;
    let numeric = fd_grad(&model, &params, &x, label, a.step)?;
    let cmp = compare_gradients(&analytic, &numeric, a.tolerance, a.tolerance * 1e-3);
    let worst = cmp
        .worst
        .map(|i| describe_entry(&model, &params, i))
        .unwrap_or_else(|| "-".into());
    println!(
        "{} n={} L={} seed={}: {} parameters, max relative deviation {:.3e} at {worst}",
        a.model,
        a.qubits,
        a.layers,
        a.seed,
        params.len(),
        cmp.max_rel_dev
    );
    if cmp.passed {
        println!("PASS (tolerance {:e})", a.tolerance);
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "FAIL: {} of {} entries exceed tolerance {:e}; worst {worst}",
            cmp.failures,
            params.len(),
            a.tolerance
        )))
    }
}

fn describe_entry(model: &Model, params: &ModelParams, i: usize) -> String {
    let slots = params.theta.len();
    let cols = params.measured_len();
    if i < slots {
        match model.layout().role(i) {
            Some(role) => format!("slot {i} ({role:?})"),
            None => format!("slot {i}"),
        }
    } else if i < slots + params.weights.len() {
        let j = i - slots;
        format!("weight[{}][{}]", j / cols, j % cols)
    } else {
        format!("bias[{}]", i - slots - params.weights.len())
    }
}

/// Trained parameters with enough metadata to rebuild the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: ModelKind,
    pub n_qubits: usize,
    pub layers: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn from_outcome(model: &Model, config: &TrainConfig, outcome: &TrainOutcome) -> Self {
        Self::new(model, config.clone(), outcome.seed, outcome.params.clone())
    }

    pub fn new(model: &Model, train: TrainConfig, seed: u64, params: ModelParams) -> Self {
        let cfg = model.config();
        Self {
            kind: cfg.kind,
            n_qubits: cfg.n_qubits,
            layers: cfg.layers,
            num_classes: cfg.num_classes,
            feature_dim: cfg.feature_dim,
            seed,
            train,
            params,
        }
    }

    pub fn model(&self) -> Result<Model> {
        let model = Model::with_qubits(
            self.kind,
            self.feature_dim,
            self.n_qubits,
            self.layers,
            self.num_classes,
        )?;
        model.check_params(&self.params)?;
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        let t = &self.train;
        let mut out = format!(
            "{CHECKPOINT_HEADER}\nmodel,{}\nqubits,{}\nlayers,{}\nclasses,{}\nfeature_dim,{}\nseed,{}\n\
             train,epochs={};batch={};lr0={:?};decay_every={};decay_factor={:?};repeats={}\n",
            self.kind,
            self.n_qubits,
            self.layers,
            self.num_classes,
            self.feature_dim,
            self.seed,
            t.epochs,
            t.batch_size,
            t.lr0,
            t.decay_every,
            t.decay_factor,
            t.repeats
        );
        for (name, values) in [
            ("theta", &self.params.theta),
            ("weights", &self.params.weights),
            ("bias", &self.params.bias),
        ] {
            write!(out, "{name},{}", values.len()).unwrap();
            for v in values {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&CHECKPOINT_HEADER) {
            return Err(err(1, format!("expected header `{CHECKPOINT_HEADER}`")));
        }
        let field = |i: usize, key: &str| -> Result<&str> {
            let line = lines.get(i).ok_or_else(|| err(i + 1, format!("missing `{key}`")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(','))
                .ok_or_else(|| err(i + 1, format!("expected `{key},...`")))
        };
        let int = |i: usize, key: &str| -> Result<usize> {
            let v = field(i, key)?;
            v.parse().map_err(|_| err(i + 1, format!("invalid {key} `{v}`")))
        };
        let kind: ModelKind = field(1, "model")?
            .parse()
            .map_err(|e: Error| err(2, e.to_string()))?;
        let n_qubits = int(2, "qubits")?;
        let layers = int(3, "layers")?;
        let num_classes = int(4, "classes")?;
        let feature_dim = int(5, "feature_dim")?;
        let seed = int(6, "seed")? as u64;

        let mut train = TrainConfig::default();
        for kv in field(7, "train")?.split(';') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| err(8, format!("malformed train entry `{kv}`")))?;
            let bad = || err(8, format!("invalid value for {k}: `{v}`"));
            match k {
                "epochs" => train.epochs = v.parse().map_err(|_| bad())?,
                "batch" => train.batch_size = v.parse().map_err(|_| bad())?,
                "lr0" => train.lr0 = v.parse().map_err(|_| bad())?,
                "decay_every" => train.decay_every = v.parse().map_err(|_| bad())?,
                "decay_factor" => train.decay_factor = v.parse().map_err(|_| bad())?,
                "repeats" => train.repeats = v.parse().map_err(|_| bad())?,
                _ => return Err(err(8, format!("unknown train key `{k}`"))),
            }
        }

        let vector = |i: usize, key: &str| -> Result<Vec<f64>> {
            let mut parts = field(i, key)?.split(',');
            let n: usize = parts
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| err(i + 1, format!("missing {key} length")))?;
            let values = parts
                .map(|p| {
                    p.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(i + 1, format!("invalid {key} value `{p}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != n {
                return Err(err(
                    i + 1,
                    format!("{key} declares {n} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };
        let params = ModelParams {
            theta: vector(8, "theta")?,
            weights: vector(9, "weights")?,
            bias: vector(10, "bias")?,
            num_classes,
        };
        if lines.len() > 11 {
            return Err(err(12, "unexpected trailing content".into()));
        }
        let ckpt = Self {
            kind,
            n_qubits,
            layers,
            num_classes,
            feature_dim,
            seed,
            train,
            params,
        };
        ckpt.model()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_text())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}
