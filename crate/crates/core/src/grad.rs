//! Gradients of the cross-entropy loss.
//!
//! The classical head is differentiated analytically. Circuit angles use the
//! parameter-shift rule: every trainable angle feeds a Pauli rotation (RX, RY, RZ,
//! or one factor of `U3 ∝ RZ(φ)·RY(θ)·RZ(λ)`), so
//! `∂⟨Z_k⟩/∂angle = (⟨Z_k⟩(angle + π/2) − ⟨Z_k⟩(angle − π/2)) / 2` exactly.
//! Slots that enter a gate through `scale·slot + offset` pick up the factor `scale`.
//! Central finite differences serve as the independent check.

use std::f64::consts::FRAC_PI_2;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ForwardTrace, Model, ModelParams};
use crate::statevector::{AngleSource, StateVector};

/// Floor applied to the true-class probability before taking the log.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub loss: f64,
    pub d_theta: Vec<f64>,
    /// Row-major, same shape as [`ModelParams::weights`].
    pub d_weights: Vec<f64>,
    pub d_bias: Vec<f64>,
}

impl GradientBundle {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            loss: 0.0,
            d_theta: vec![0.0; params.theta.len()],
            d_weights: vec![0.0; params.weights.len()],
            d_bias: vec![0.0; params.bias.len()],
        }
    }

    /// Gradient entries in `theta, weights, bias` order, matching [`ModelParams::flatten`].
    pub fn flatten(&self) -> Vec<f64> {
        self.d_theta
            .iter()
            .chain(&self.d_weights)
            .chain(&self.d_bias)
            .copied()
            .collect()
    }

    fn entries_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.d_theta
            .iter_mut()
            .chain(self.d_weights.iter_mut())
            .chain(self.d_bias.iter_mut())
    }

    pub fn is_finite(&self) -> bool {
        self.loss.is_finite() && self.flatten().iter().all(|g| g.is_finite())
    }
}

/// `−ln p_y`, with `p_y` floored at [`PROBABILITY_FLOOR`].
pub fn ce_loss(probabilities: &[f64], label: usize) -> Result<f64> {
    let p = probabilities.get(label).ok_or_else(|| {
        Error::config(format!(
            "label {label} out of range for {} classes",
            probabilities.len()
        ))
    })?;
    Ok(-p.max(PROBABILITY_FLOOR).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGradient {
    pub d_weights: Vec<f64>,
    pub d_bias: Vec<f64>,
    /// `∂L/∂⟨Z_k⟩` for each measured qubit.
    pub d_expectations: Vec<f64>,
}

/// With `g = p − onehot(y)`: `∂L/∂b = g`, `∂L/∂W = g·mᵀ`, `∂L/∂m = Wᵀ·g`.
pub fn backward_classical(
    trace: &ForwardTrace,
    label: usize,
    params: &ModelParams,
) -> Result<ClassicalGradient> {
    let classes = trace.probabilities.len();
    if label >= classes {
        return Err(Error::config(format!(
            "label {label} out of range for {classes} classes"
        )));
    }
    let m = &trace.expectations;
    let g: Vec<f64> = trace
        .probabilities
        .iter()
        .enumerate()
        .map(|(c, p)| if c == label { p - 1.0 } else { *p })
        .collect();
    let d_weights = g
        .iter()
        .flat_map(|gc| m.iter().map(move |mk| gc * mk))
        .collect();
    let d_expectations = (0..m.len())
        .map(|k| (0..classes).map(|c| params.weight(c, k) * g[c]).sum())
        .collect();
    Ok(ClassicalGradient {
        d_weights,
        d_bias: g,
        d_expectations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftGradient {
    pub d_theta: Vec<f64>,
    /// Circuit evaluations performed; always `2 · num_slots`.
    pub evaluations: usize,
}

/// Parameter-shift gradient of `Σ_k d_expectations[k]·⟨Z_k⟩` with respect to every slot.
///
/// Each shifted evaluation restarts from the cached state just before the shifted
/// gate, so only the remainder of the circuit is re-simulated.
pub fn param_shift_grad(
    model: &Model,
    theta: &[f64],
    x: &[f64],
    d_expectations: &[f64],
) -> Result<ShiftGradient> {
    let circuit = model.circuit();
    let measured = model.measured();
    if d_expectations.len() != measured.len() {
        return Err(Error::config(format!(
            "upstream gradient has {} entries, model measures {} qubits",
            d_expectations.len(),
            measured.len()
        )));
    }
    let kernels = circuit.kernels(theta)?;
    let gates = circuit.gates();

    struct Job {
        gate: usize,
        position: usize,
        slot: usize,
        scale: f64,
    }
    let mut jobs = Vec::with_capacity(circuit.num_slots());
    let mut prefixes = Vec::new();
    let mut state = model.encode(x)?;
    for (g, gate) in gates.iter().enumerate() {
        let before = jobs.len();
        for (position, angle) in gate.angles.iter().enumerate() {
            if let AngleSource::Slot { slot, scale, .. } = *angle {
                jobs.push(Job {
                    gate: g,
                    position,
                    slot,
                    scale,
                });
            }
        }
        if jobs.len() > before {
            prefixes.push((g, state.clone()));
        }
        state.apply_kernel(&kernels[g]);
    }

    let evaluations = AtomicUsize::new(0);
    let evaluate = |job: &Job, delta: f64| -> Vec<f64> {
        let idx = prefixes
            .binary_search_by_key(&job.gate, |(g, _)| *g)
            .expect("prefix recorded for every slot-bearing gate");
        let mut s: StateVector = prefixes[idx].1.clone();
        s.apply_kernel(&gates[job.gate].resolved_kernel(theta, Some((job.position, delta))));
        for k in &kernels[job.gate + 1..] {
            s.apply_kernel(k);
        }
        evaluations.fetch_add(1, Ordering::Relaxed);
        s.expect_z_many(measured)
    };

    let partials: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|job| {
            let plus = evaluate(job, FRAC_PI_2);
            let minus = evaluate(job, -FRAC_PI_2);
            let d: f64 = d_expectations
                .iter()
                .zip(plus.iter().zip(&minus))
                .map(|(up, (p, m))| up * (p - m) / 2.0)
                .sum();
            (job.slot, job.scale * d)
        })
        .collect();

    let mut d_theta = vec![0.0; circuit.num_slots()];
    for (slot, d) in partials {
        d_theta[slot] = d;
    }
    Ok(ShiftGradient {
        d_theta,
        evaluations: evaluations.into_inner(),
    })
}

/// Loss and full gradient for one labelled sample.
pub fn sample_gradient(
    model: &Model,
    params: &ModelParams,
    x: &[f64],
    label: usize,
) -> Result<GradientBundle> {
    let trace = model.forward(params, x)?;
    let loss = ce_loss(&trace.probabilities, label)?;
    let classical = backward_classical(&trace, label, params)?;
    let shift = param_shift_grad(model, &params.theta, x, &classical.d_expectations)?;
    Ok(GradientBundle {
        loss,
        d_theta: shift.d_theta,
        d_weights: classical.d_weights,
        d_bias: classical.d_bias,
    })
}

/// Scalar loss of one sample.
pub fn sample_loss(model: &Model, params: &ModelParams, x: &[f64], label: usize) -> Result<f64> {
    ce_loss(&model.forward(params, x)?.probabilities, label)
}

/// Central finite differences `(L(p + h) − L(p − h)) / 2h` for every parameter.
pub fn fd_grad(
    model: &Model,
    params: &ModelParams,
    x: &[f64],
    label: usize,
    h: f64,
) -> Result<GradientBundle> {
    if !(h > 0.0) {
        return Err(Error::config(format!("finite-difference step must be positive, got {h}")));
    }
    let loss = sample_loss(model, params, x, label)?;
    let base = params.flatten();
    let flat: Vec<f64> = (0..base.len())
        .into_par_iter()
        .map(|i| {
            let mut p = params.clone();
            let mut shifted = base.clone();
            shifted[i] = base[i] + h;
            p.assign_flat(&shifted);
            let up = sample_loss(model, &p, x, label)?;
            shifted[i] = base[i] - h;
            p.assign_flat(&shifted);
            let down = sample_loss(model, &p, x, label)?;
            Ok((up - down) / (2.0 * h))
        })
        .collect::<Result<_>>()?;
    let mut bundle = GradientBundle::zeros_like(params);
    bundle.loss = loss;
    bundle.entries_mut().zip(flat).for_each(|(g, v)| *g = v);
    Ok(bundle)
}

/// Mean loss and mean gradient over a mini-batch of `(features, label)` pairs.
///
/// Samples may be processed concurrently; the reduction runs in batch order.
pub fn batch_gradient(
    model: &Model,
    params: &ModelParams,
    batch: &[(&[f64], usize)],
) -> Result<GradientBundle> {
    if batch.is_empty() {
        return Err(Error::config("empty batch"));
    }
    let singles = batch
        .par_iter()
        .map(|(x, y)| sample_gradient(model, params, x, *y))
        .collect::<Result<Vec<_>>>()?;
    let mut total = GradientBundle::zeros_like(params);
    for g in &singles {
        total.loss += g.loss;
        total
            .entries_mut()
            .zip(g.flatten())
            .for_each(|(t, v)| *t += v);
    }
    let n = batch.len() as f64;
    total.loss /= n;
    total.entries_mut().for_each(|t| *t /= n);
    Ok(total)
}

/// Entrywise agreement between two gradient bundles.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientComparison {
    /// Largest `|a − b| / max(|a|, |b|)` among entries whose difference exceeds the
    /// absolute floor.
    pub max_rel_dev: f64,
    /// Flat index (`theta, weights, bias` order) of that entry.
    pub worst: Option<usize>,
    /// Entries outside both the relative tolerance and the absolute floor.
    pub failures: usize,
    pub passed: bool,
}

/// An entry agrees when `|a − b| ≤ abs_floor` or `|a − b| ≤ rel_tol · max(|a|, |b|)`.
pub fn compare_gradients(
    a: &GradientBundle,
    b: &GradientBundle,
    rel_tol: f64,
    abs_floor: f64,
) -> GradientComparison {
    let (fa, fb) = (a.flatten(), b.flatten());
    assert_eq!(fa.len(), fb.len(), "gradient bundles differ in shape");
    let mut max_rel_dev = 0.0;
    let mut worst = None;
    let mut failures = 0;
    for (i, (x, y)) in fa.iter().zip(&fb).enumerate() {
        let diff = (x - y).abs();
        if !(diff > abs_floor) && diff.is_finite() {
            continue;
        }
        let rel = diff / x.abs().max(y.abs());
        if !(rel <= rel_tol) {
            failures += 1;
        }
        if !(rel <= max_rel_dev) {
            max_rel_dev = rel;
            worst = Some(i);
        }
    }
    GradientComparison {
        max_rel_dev,
        worst,
        failures,
        passed: failures == 0,
    }
}
