//! Labelled feature vectors and the AEFV v1 text format.
//!
//! ```text
//! aefv,1,<dim>,<sample_count>,<class_count>
//! <label>,<f0>,<f1>,...,<f{dim-1}>
//! ```
//!
//! UTF-8, one record per line, LF terminated. Features are written as the shortest
//! decimal string that parses back to the same `f64`. Readers tolerate CRLF and
//! reject a byte-order mark, blank lines and non-finite values.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const AEFV_MAGIC: &str = "aefv";
pub const AEFV_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: usize,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    class_count: usize,
    samples: Vec<Sample>,
}

impl FeatureSet {
    pub fn new(dim: usize, class_count: usize, samples: Vec<Sample>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("feature dimension must be positive"));
        }
        if class_count == 0 {
            return Err(Error::config("class count must be positive"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(Error::config(format!(
                    "sample {i} has {} features, expected {dim}",
                    s.features.len()
                )));
            }
            if s.label >= class_count {
                return Err(Error::config(format!(
                    "sample {i} has label {} but only {class_count} classes",
                    s.label
                )));
            }
            if s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("sample {i} has a non-finite feature")));
            }
        }
        Ok(Self {
            dim,
            class_count,
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Canonical AEFV text.
    pub fn to_aefv(&self) -> String {
        use std::fmt::Write;
        let mut out = format!(
            "{AEFV_MAGIC},{AEFV_VERSION},{},{},{}\n",
            self.dim,
            self.samples.len(),
            self.class_count
        );
        for s in &self.samples {
            write!(out, "{}", s.label).unwrap();
            for v in &s.features {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parse AEFV text; `origin` only labels error messages.
    pub fn from_aefv(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        if text.starts_with('\u{feff}') {
            return Err(err(1, "byte-order mark is not allowed".into()));
        }
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.last() == Some(&"") {
            lines.pop();
        }
        let lines: Vec<&str> = lines
            .into_iter()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();

        let header = lines.first().ok_or_else(|| err(1, "empty file".into()))?;
        let fields: Vec<&str> = header.split(',').collect();
        if fields.len() != 5 || fields[0] != AEFV_MAGIC {
            return Err(err(
                1,
                format!("expected header `aefv,1,<dim>,<count>,<classes>`, got `{header}`"),
            ));
        }
        let num = |i: usize, what: &str| -> Result<usize> {
            fields[i]
                .parse()
                .map_err(|_| err(1, format!("invalid {what} `{}`", fields[i])))
        };
        let version = num(1, "version")?;
        if version != AEFV_VERSION as usize {
            return Err(err(1, format!("unsupported version {version}")));
        }
        let dim = num(2, "dimension")?;
        let count = num(3, "sample count")?;
        let class_count = num(4, "class count")?;
        if dim == 0 || class_count == 0 {
            return Err(err(1, "dimension and class count must be positive".into()));
        }
        if lines.len() - 1 != count {
            return Err(err(
                lines.len().max(1),
                format!("header declares {count} samples, found {}", lines.len() - 1),
            ));
        }

        let mut samples = Vec::with_capacity(count);
        for (i, line) in lines.iter().enumerate().skip(1) {
            let lineno = i + 1;
            if line.is_empty() {
                return Err(err(lineno, "blank line".into()));
            }
            let mut parts = line.split(',');
            let label_text = parts.next().unwrap_or_default();
            let label: usize = label_text
                .parse()
                .map_err(|_| err(lineno, format!("invalid label `{label_text}`")))?;
            if label >= class_count {
                return Err(err(
                    lineno,
                    format!("label {label} out of range for {class_count} classes"),
                ));
            }
            let features = parts
                .map(|p| match p.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(err(lineno, format!("non-finite feature `{p}`"))),
                    Err(_) => Err(err(lineno, format!("invalid feature `{p}`"))),
                })
                .collect::<Result<Vec<f64>>>()?;
            if features.len() != dim {
                return Err(err(
                    lineno,
                    format!("expected {dim} features, found {}", features.len()),
                ));
            }
            samples.push(Sample { label, features });
        }
        Ok(Self {
            dim,
            class_count,
            samples,
        })
    }
}

pub fn read_aefv(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FeatureSet::from_aefv(&text, path)
}

pub fn write_aefv(set: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, set.to_aefv()).map_err(|e| Error::io(path, e))
}

/// Standard normal deviates by the Marsaglia polar method over a uniform source.
///
/// Draw `u, v` uniform on `(−1, 1)` until `0 < s = u² + v² < 1`, then emit
/// `u·√(−2 ln s / s)` and cache `v·√(−2 ln s / s)` for the next call.
#[derive(Debug, Default)]
pub struct PolarNormal {
    spare: Option<f64>,
}

impl PolarNormal {
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = rng.gen::<f64>() * 2.0 - 1.0;
            let v = rng.gen::<f64>() * 2.0 - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Gaussian blobs with identity covariance, `per_class` samples around each of `means`.
/// Samples are emitted class by class.
pub fn gen_blobs(means: &[Vec<f64>], per_class: usize, seed: u64) -> Result<FeatureSet> {
    let dim = means.first().map(Vec::len).unwrap_or(0);
    if means.len() < 2 || means.iter().any(|m| m.len() != dim) {
        return Err(Error::config(
            "need at least two class means of equal dimension",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = PolarNormal::default();
    let mut samples = Vec::with_capacity(means.len() * per_class);
    for (label, mean) in means.iter().enumerate() {
        for _ in 0..per_class {
            let features = mean.iter().map(|mu| mu + normal.sample(&mut rng)).collect();
            samples.push(Sample { label, features });
        }
    }
    FeatureSet::new(dim, means.len(), samples)
}

/// Two unit-variance Gaussian classes centred at `+sep·e1` (label 0) and `−sep·e1`
/// (label 1).
///
/// Note the two classes are mirror images of each other through the origin. Any
/// model that amplitude-encodes its input cannot distinguish `x` from `−x`, so these
/// blobs are separable for a linear classifier but not for the quantum models; use
/// [`gen_blobs`] with non-antipodal means for a task those models can learn.
pub fn gen_synthetic(dim: usize, per_class: usize, sep: f64, seed: u64) -> Result<FeatureSet> {
    if dim < 2 {
        return Err(Error::config(format!("dimension must be at least 2, got {dim}")));
    }
    if !(sep >= 0.0) || !sep.is_finite() {
        return Err(Error::config(format!("separation must be finite and ≥ 0, got {sep}")));
    }
    let mut mu0 = vec![0.0; dim];
    let mut mu1 = vec![0.0; dim];
    mu0[0] = sep;
    mu1[0] = -sep;
    gen_blobs(&[mu0, mu1], per_class, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub per_class_train: usize,
    pub per_class_test: usize,
    pub seed: u64,
}

/// Seeded per-class shuffle; the first `per_class_train` samples of each class go to
/// the training set and the next `per_class_test` to the test set.
pub fn split(set: &FeatureSet, spec: SplitSpec) -> Result<(FeatureSet, FeatureSet)> {
    if spec.per_class_train == 0 || spec.per_class_test == 0 {
        return Err(Error::config("split counts must be at least 1"));
    }
    let needed = spec.per_class_train + spec.per_class_test;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..set.class_count() {
        let mut idx: Vec<usize> = (0..set.len())
            .filter(|&i| set.samples[i].label == class)
            .collect();
        if idx.len() < needed {
            return Err(Error::config(format!(
                "class {class} has {} samples, split needs {needed}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        train.extend(idx[..spec.per_class_train].iter().map(|&i| set.samples[i].clone()));
        test.extend(idx[spec.per_class_train..needed].iter().map(|&i| set.samples[i].clone()));
    }
    Ok((
        FeatureSet::new(set.dim, set.class_count, train)?,
        FeatureSet::new(set.dim, set.class_count, test)?,
    ))
}
