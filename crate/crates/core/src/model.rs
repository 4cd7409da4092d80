//! Hybrid forward pass: amplitude encoding, the parameterized circuit, Pauli-Z
//! expectations on the measured qubits and an affine classical head with softmax.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;

pub use crate::circuits::ModelKind;
use crate::circuits::{
    build_tlqcnn, build_tlqnn, param_count_for_classes, Circuit, ParamLayout, PoolingPlan,
};
use crate::data::FeatureSet;
use crate::error::{Error, Result};
use crate::statevector::{StateVector, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n_qubits: usize,
    /// Ansatz layers for TLQNN, quantum fully-connected layers for TLQCNN.
    pub layers: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub measured: Vec<usize>,
}

/// Smallest register that holds `feature_dim` amplitudes, but at least the model's minimum.
pub fn qubits_for_dim(kind: ModelKind, feature_dim: usize) -> usize {
    let needed = feature_dim.max(1).next_power_of_two().trailing_zeros() as usize;
    needed.max(kind.min_qubits())
}

/// A built model: configuration plus its circuit and parameter layout.
#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    circuit: Circuit,
    layout: ParamLayout,
    pooling: Option<PoolingPlan>,
}

impl Model {
    /// Model on the smallest register that fits `feature_dim`.
    pub fn new(kind: ModelKind, feature_dim: usize, layers: usize, num_classes: usize) -> Result<Self> {
        Self::with_qubits(
            kind,
            feature_dim,
            qubits_for_dim(kind, feature_dim),
            layers,
            num_classes,
        )
    }

    pub fn with_qubits(
        kind: ModelKind,
        feature_dim: usize,
        n_qubits: usize,
        layers: usize,
        num_classes: usize,
    ) -> Result<Self> {
        if feature_dim == 0 {
            return Err(Error::config("feature dimension must be positive"));
        }
        if n_qubits > MAX_QUBITS || feature_dim > 1 << n_qubits {
            return Err(Error::config(format!(
                "{feature_dim} features do not fit in {n_qubits} qubits"
            )));
        }
        if num_classes < 2 {
            return Err(Error::config(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        let (circuit, layout, pooling) = match kind {
            ModelKind::Tlqnn => {
                let (c, l) = build_tlqnn(n_qubits, layers)?;
                (c, l, None)
            }
            ModelKind::Tlqcnn => {
                let (c, l, p) = build_tlqcnn(n_qubits, layers)?;
                (c, l, Some(p))
            }
        };
        let measured = match &pooling {
            Some(plan) => plan.retained.clone(),
            None => (0..n_qubits).collect(),
        };
        Ok(Self {
            config: ModelConfig {
                kind,
                n_qubits,
                layers,
                num_classes,
                feature_dim,
                measured,
            },
            circuit,
            layout,
            pooling,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn pooling(&self) -> Option<&PoolingPlan> {
        self.pooling.as_ref()
    }

    pub fn measured(&self) -> &[usize] {
        &self.config.measured
    }

    pub fn num_slots(&self) -> usize {
        self.circuit.num_slots()
    }

    /// `(quantum, classical)` parameter counts.
    pub fn param_count(&self) -> (usize, usize) {
        let c = &self.config;
        param_count_for_classes(c.kind, c.n_qubits, c.layers, c.num_classes)
    }

    pub fn zero_params(&self) -> ModelParams {
        ModelParams {
            theta: vec![0.0; self.num_slots()],
            weights: vec![0.0; self.config.num_classes * self.measured().len()],
            bias: vec![0.0; self.config.num_classes],
            num_classes: self.config.num_classes,
        }
    }

    /// Angles uniform on `[0, 2π)`; head weights and bias uniform on `±1/√m`,
    /// `m` being the number of measured qubits.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ModelParams {
        let mut p = self.zero_params();
        p.theta.iter_mut().for_each(|t| *t = rng.gen_range(0.0..TAU));
        let bound = 1.0 / (self.measured().len() as f64).sqrt();
        p.weights
            .iter_mut()
            .chain(p.bias.iter_mut())
            .for_each(|w| *w = rng.gen_range(-bound..bound));
        p
    }

    pub fn check_params(&self, params: &ModelParams) -> Result<()> {
        let m = self.measured().len();
        let k = self.config.num_classes;
        if params.theta.len() != self.num_slots()
            || params.weights.len() != k * m
            || params.bias.len() != k
            || params.num_classes != k
        {
            return Err(Error::config(format!(
                "parameter shapes ({}, {}, {}) do not match model ({}, {k}x{m}, {k})",
                params.theta.len(),
                params.weights.len(),
                params.bias.len(),
                self.num_slots()
            )));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(())
    }

    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        if x.len() != self.config.feature_dim {
            return Err(Error::config(format!(
                "model expects {} features, got {}",
                self.config.feature_dim,
                x.len()
            )));
        }
        StateVector::amplitude_encode(x, self.config.n_qubits)
    }

    /// `⟨Z_k⟩` for every measured qubit after running the circuit on the encoded `x`.
    pub fn expectations(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let mut state = self.encode(x)?;
        state.apply_circuit(&self.circuit, theta)?;
        Ok(state.expect_z_many(self.measured()))
    }

    /// Logits `W·m + b` and their softmax.
    pub fn head(&self, params: &ModelParams, m: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let cols = m.len();
        let logits: Vec<f64> = params
            .bias
            .iter()
            .enumerate()
            .map(|(c, b)| {
                let row = &params.weights[c * cols..(c + 1) * cols];
                b + row.iter().zip(m).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        let probabilities = softmax(&logits);
        (logits, probabilities)
    }

    pub fn forward(&self, params: &ModelParams, x: &[f64]) -> Result<ForwardTrace> {
        self.check_params(params)?;
        let expectations = self.expectations(&params.theta, x)?;
        let (logits, probabilities) = self.head(params, &expectations);
        let predicted = argmax(&probabilities);
        Ok(ForwardTrace {
            expectations,
            logits,
            probabilities,
            predicted,
        })
    }

    pub fn predict(&self, params: &ModelParams, x: &[f64]) -> Result<usize> {
        Ok(self.forward(params, x)?.predicted)
    }

    /// Classify every sample of `set`.
    pub fn evaluate(&self, params: &ModelParams, set: &FeatureSet) -> Result<Evaluation> {
        if set.dim() != self.config.feature_dim {
            return Err(Error::config(format!(
                "data has {} features, model expects {}",
                set.dim(),
                self.config.feature_dim
            )));
        }
        if set.class_count() > self.config.num_classes {
            return Err(Error::config(format!(
                "data has {} classes, model has {}",
                set.class_count(),
                self.config.num_classes
            )));
        }
        let traces = set
            .samples()
            .par_iter()
            .map(|s| self.forward(params, &s.features))
            .collect::<Result<Vec<_>>>()?;
        let truth: Vec<usize> = set.samples().iter().map(|s| s.label).collect();
        let predictions: Vec<usize> = traces.iter().map(|t| t.predicted).collect();
        let probabilities = traces.into_iter().map(|t| t.probabilities).collect();
        let accuracy = crate::metrics::accuracy(&predictions, &truth)?;
        Ok(Evaluation {
            predictions,
            truth,
            probabilities,
            accuracy,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Circuit angles in radians, indexed by slot.
    pub theta: Vec<f64>,
    /// Head weights, row-major `num_classes × measured`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub num_classes: usize,
}

impl ModelParams {
    pub fn weight(&self, class: usize, k: usize) -> f64 {
        self.weights[class * self.measured_len() + k]
    }

    pub fn measured_len(&self) -> usize {
        self.weights.len() / self.num_classes
    }

    pub fn len(&self) -> usize {
        self.theta.len() + self.weights.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All parameters in `theta, weights, bias` order.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.theta.iter().chain(&self.weights).chain(&self.bias)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.theta
            .iter_mut()
            .chain(self.weights.iter_mut())
            .chain(self.bias.iter_mut())
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.len(), "flat parameter length mismatch");
        self.iter_mut().zip(flat).for_each(|(p, v)| *p = *v);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub expectations: Vec<f64>,
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<usize>,
    pub truth: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
    /// Percent correct.
    pub accuracy: f64,
}

impl Evaluation {
    /// Probability assigned to `class` for every sample.
    pub fn scores(&self, class: usize) -> Vec<f64> {
        self.probabilities.iter().map(|p| p[class]).collect()
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_give_uniform_probabilities() {
        let model = Model::new(ModelKind::Tlqnn, 8, 1, 2).unwrap();
        let t = model
            .forward(&model.zero_params(), &[1.0, 2.0, 0.0, 0.5, 0.1, 0.0, 0.0, 3.0])
            .unwrap();
        assert_eq!(t.probabilities, vec![0.5, 0.5]);
        assert_eq!(t.predicted, 0);
    }

    #[test]
    fn two_qubit_identity_ansatz() {
        // H⊗H then identity U3s and a CNOT ring: the uniform superposition is
        // invariant under both CNOTs, so both qubits read ⟨Z⟩ = 0.
        let model = Model::new(ModelKind::Tlqnn, 4, 1, 2).unwrap();
        let m = model
            .expectations(&vec![0.0; model.num_slots()], &[1.0, 0.0, 0.0, 0.0])
            .unwrap();
        // brute force: amplitudes after H⊗H are all 1/2
        let amps = [0.5f64; 4];
        for k in 0..2 {
            let oracle: f64 = (0..4)
                .map(|i| amps[i] * amps[i] * if (i >> k) & 1 == 0 { 1.0 } else { -1.0 })
                .sum();
            assert!((m[k] - oracle).abs() < 1e-12);
            assert!(m[k].abs() < 1e-12);
        }
    }

    #[test]
    fn predict_tie_break() {
        assert_eq!(argmax(&[0.9, 0.1]), 0);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.8]), 1);
    }

    #[test]
    fn qubit_selection() {
        assert_eq!(qubits_for_dim(ModelKind::Tlqnn, 512), 9);
        assert_eq!(qubits_for_dim(ModelKind::Tlqnn, 1024), 10);
        assert_eq!(qubits_for_dim(ModelKind::Tlqnn, 1000), 10);
        assert_eq!(qubits_for_dim(ModelKind::Tlqnn, 2048), 11);
        assert_eq!(qubits_for_dim(ModelKind::Tlqnn, 3), 2);
        assert_eq!(qubits_for_dim(ModelKind::Tlqcnn, 4), 3);
    }

    #[test]
    fn tlqcnn_measures_retained_qubits() {
        let model = Model::new(ModelKind::Tlqcnn, 512, 6, 2).unwrap();
        assert_eq!(model.measured(), &[1, 3, 5, 7, 8]);
        assert_eq!(model.param_count(), (167, 12));
    }

    #[test]
    fn forward_errors() {
        let model = Model::new(ModelKind::Tlqnn, 4, 1, 2).unwrap();
        let p = model.zero_params();
        assert!(matches!(
            model.forward(&p, &[0.0; 4]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(model.forward(&p, &[1.0; 3]), Err(Error::Config(_))));
        let mut bad = p.clone();
        bad.theta.pop();
        assert!(model.forward(&bad, &[1.0; 4]).is_err());
        assert!(Model::new(ModelKind::Tlqnn, 4, 1, 1).is_err());
        assert!(Model::with_qubits(ModelKind::Tlqnn, 32, 4, 1, 2).is_err());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let model = Model::new(ModelKind::Tlqcnn, 16, 2, 2).unwrap();
        let a = model.init_params(&mut ChaCha8Rng::seed_from_u64(3));
        let b = model.init_params(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!(a.theta.iter().all(|t| (0.0..TAU).contains(t)));
        let bound = 1.0 / (model.measured().len() as f64).sqrt();
        assert!(a.weights.iter().chain(&a.bias).all(|w| w.abs() <= bound));
    }

    #[test]
    fn flat_roundtrip() {
        let model = Model::new(ModelKind::Tlqnn, 4, 1, 3).unwrap();
        let p = model.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        let mut q = model.zero_params();
        q.assign_flat(&p.flatten());
        assert_eq!(p, q);
        assert_eq!(p.weight(2, 1), p.weights[2 * 2 + 1]);
    }
}
