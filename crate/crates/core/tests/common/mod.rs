//! Independent oracles shared by the integration tests. Nothing here calls into the
//! simulator kernels.

#![allow(dead_code)]

use num_complex::Complex64;

pub type Mat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i][k];
            for j in 0..d {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn scale(a: &Mat, s: Complex64) -> Mat {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn dagger(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

/// `a ⊗ b` with `a` acting on the more significant index bits.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (da, db) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); da * db]; da * db];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn pauli_x() -> Mat {
    vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn pauli_y() -> Mat {
    vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]
}

pub fn pauli_z() -> Mat {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &Mat) -> Mat {
    let norm: f64 = a
        .iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = scale(a, c(0.5f64.powi(squarings as i32), 0.0));
    let d = a.len();
    let mut sum = identity(d);
    let mut term = identity(d);
    for k in 1..=30 {
        term = scale(&matmul(&term, &scaled), c(1.0 / k as f64, 0.0));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// `exp(i(αXX + βYY + γZZ))`.
pub fn n_block_oracle(alpha: f64, beta: f64, gamma: f64) -> Mat {
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let g = add(
        &add(&scale(&kron(&x, &x), c(alpha, 0.0)), &scale(&kron(&y, &y), c(beta, 0.0))),
        &scale(&kron(&z, &z), c(gamma, 0.0)),
    );
    expm(&scale(&g, c(0.0, 1.0)))
}

/// Largest entrywise deviation between `a` and `b` after removing the global phase
/// that best aligns their largest entries.
pub fn max_dev_up_to_phase(a: &Mat, b: &Mat) -> f64 {
    let d = a.len();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..d {
        for j in 0..d {
            if b[i][j].norm() > best {
                best = b[i][j].norm();
                bi = i;
                bj = j;
            }
        }
    }
    let ratio = a[bi][bj] / b[bi][bj];
    let phase = ratio / ratio.norm();
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            dev = dev.max((a[i][j] - phase * b[i][j]).norm());
        }
    }
    dev
}

pub fn max_dev(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Probability that a random positive outscores a random negative, ties at half.
pub fn mann_whitney_auc(scores: &[f64], truth: &[usize]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if truth[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if truth[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Best accuracy (fraction) of any threshold rule on one coordinate, either polarity.
pub fn best_threshold_accuracy(values: &[f64], labels: &[usize]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let n = values.len();
    let ones = labels.iter().filter(|&&l| l == 1).count();
    // rule "predict 1 when value > cut": correct = zeros below + ones above
    let mut zeros_below = 0;
    let mut ones_below = 0;
    let mut best = 0usize;
    for k in 0..=n {
        let correct = zeros_below + (ones - ones_below);
        best = best.max(correct).max(n - correct);
        if k < n {
            if labels[order[k]] == 1 {
                ones_below += 1;
            } else {
                zeros_below += 1;
            }
        }
    }
    best as f64 / n as f64
}

use aecqtl::{AngleSource, GateOp};
use rand::Rng;

/// A uniformly chosen gate type on random qubits with angles in `[−2π, 2π)`.
pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> (GateOp, Vec<f64>) {
    let q = rng.gen_range(0..n);
    let kind = rng.gen_range(0..6);
    let mut angle = || rng.gen_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    let fixed = AngleSource::Fixed(0.0);
    let (gate, angles) = match kind {
        0 => (GateOp::h(q), vec![]),
        1 => (GateOp::rx(q, fixed), vec![angle()]),
        2 => (GateOp::ry(q, fixed), vec![angle()]),
        3 => (GateOp::rz(q, fixed), vec![angle()]),
        4 => (GateOp::u3(q, 0), vec![angle(), angle(), angle()]),
        _ => {
            let t = (q + 1 + (angle().abs() * 1e6) as usize % (n - 1)) % n;
            (GateOp::cnot(q, t), vec![])
        }
    };
    (gate, angles)
}

/// Resolved angles of `gate` under `theta`.
pub fn resolve(gate: &GateOp, theta: &[f64]) -> Vec<f64> {
    gate.angles.iter().map(|a| a.resolve(theta)).collect()
}
