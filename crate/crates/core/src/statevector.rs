//! Dense statevector simulation.
//!
//! Basis index `i` is read with qubit 0 as the least-significant bit, so qubit `k`
//! of basis state `i` is `(i >> k) & 1`. Every module in this crate relies on that
//! convention, including amplitude encoding (feature `x[i]` lands on `|i⟩`).

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuits::Circuit;
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;

/// Largest register `circuit_unitary` will expand into a dense matrix.
pub const MAX_UNITARY_QUBITS: usize = 4;

const NORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    Rx,
    Ry,
    Rz,
    U3,
    Cnot,
}

impl GateKind {
    /// Number of angles the gate consumes; `U3` takes `(θ, φ, λ)`.
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::Cnot => 0,
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U3 => 3,
        }
    }

    pub fn qubit_count(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }
}

/// Where a gate angle comes from.
///
/// A trainable angle is an affine function `scale * theta[slot] + offset` of one
/// entry of the parameter vector. Plain slots use `scale = 1, offset = 0`; the
/// two-qubit canonical block stores `(α, β, γ)` in its slots and maps them to
/// rotation angles such as `π/2 − 2γ` here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    Slot { slot: usize, scale: f64, offset: f64 },
    Fixed(f64),
}

impl AngleSource {
    pub fn slot(slot: usize) -> Self {
        AngleSource::Slot {
            slot,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn affine(slot: usize, scale: f64, offset: f64) -> Self {
        AngleSource::Slot {
            slot,
            scale,
            offset,
        }
    }

    /// Resolve against a parameter vector. Panics if the slot is outside `theta`;
    /// [`Circuit`] checks the vector length before resolving any gate.
    #[inline]
    pub fn resolve(&self, theta: &[f64]) -> f64 {
        match *self {
            AngleSource::Slot {
                slot,
                scale,
                offset,
            } => scale * theta[slot] + offset,
            AngleSource::Fixed(angle) => angle,
        }
    }
}

/// One gate of a circuit program.
///
/// For `Cnot`, `targets[0]` is the control and `targets[1]` the target.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angles: Vec<AngleSource>,
}

impl GateOp {
    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q], vec![])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target], vec![])
    }

    pub fn rx(q: usize, angle: AngleSource) -> Self {
        Self::new(GateKind::Rx, vec![q], vec![angle])
    }

    pub fn ry(q: usize, angle: AngleSource) -> Self {
        Self::new(GateKind::Ry, vec![q], vec![angle])
    }

    pub fn rz(q: usize, angle: AngleSource) -> Self {
        Self::new(GateKind::Rz, vec![q], vec![angle])
    }

    /// U3 with three consecutive slots `(θ, φ, λ)` starting at `first_slot`.
    pub fn u3(q: usize, first_slot: usize) -> Self {
        Self::new(
            GateKind::U3,
            vec![q],
            (first_slot..first_slot + 3).map(AngleSource::slot).collect(),
        )
    }

    pub fn new(kind: GateKind, targets: Vec<usize>, angles: Vec<AngleSource>) -> Self {
        Self {
            kind,
            targets,
            angles,
        }
    }

    pub fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.angles.iter().filter_map(|a| match a {
            AngleSource::Slot { slot, .. } => Some(*slot),
            AngleSource::Fixed(_) => None,
        })
    }

    /// Check arity and targets against a register of `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.qubit_count() {
            return Err(Error::config(format!(
                "{:?} expects {} target(s), got {}",
                self.kind,
                self.kind.qubit_count(),
                self.targets.len()
            )));
        }
        if self.angles.len() != self.kind.arity() {
            return Err(Error::config(format!(
                "{:?} expects {} angle(s), got {}",
                self.kind,
                self.kind.arity(),
                self.angles.len()
            )));
        }
        if let Some(&q) = self.targets.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::config(format!(
                "{:?} targets qubit {q} on a {n_qubits}-qubit register",
                self.kind
            )));
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::config(format!(
                "{:?} control and target are both qubit {}",
                self.kind, self.targets[0]
            )));
        }
        Ok(())
    }

    /// Build the kernel for already-resolved angles.
    pub(crate) fn kernel(&self, angles: &[f64]) -> Kernel {
        let q = self.targets[0];
        match self.kind {
            GateKind::H => Kernel::H(q),
            GateKind::Cnot => Kernel::Cnot {
                control: q,
                target: self.targets[1],
            },
            GateKind::Rx => {
                let (s, c) = (angles[0] / 2.0).sin_cos();
                let off = Complex64::new(0.0, -s);
                Kernel::Dense {
                    q,
                    m: [[c.into(), off], [off, c.into()]],
                }
            }
            GateKind::Ry => {
                let (s, c) = (angles[0] / 2.0).sin_cos();
                Kernel::RealRotation { q, c, s }
            }
            GateKind::Rz => {
                let half = angles[0] / 2.0;
                Kernel::Diagonal {
                    q,
                    d0: Complex64::from_polar(1.0, -half),
                    d1: Complex64::from_polar(1.0, half),
                }
            }
            GateKind::U3 => Kernel::Dense {
                q,
                m: u3_matrix(angles[0], angles[1], angles[2]),
            },
        }
    }

    /// Kernel with every angle resolved from `theta`, optionally displacing angle
    /// position `shift.0` by `shift.1` radians in gate-angle space.
    pub(crate) fn resolved_kernel(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Kernel {
        let mut angles = [0.0; 3];
        for (i, src) in self.angles.iter().enumerate() {
            angles[i] = src.resolve(theta);
        }
        if let Some((pos, delta)) = shift {
            angles[pos] += delta;
        }
        self.kernel(&angles[..self.angles.len()])
    }
}

/// `U3(θ, φ, λ) = [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`,
/// equal to `RZ(φ)·RY(θ)·RZ(λ)` up to the global phase `e^{i(φ+λ)/2}`.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [c.into(), -Complex64::from_polar(s, lambda)],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

/// A gate with its angles baked in, ready to sweep over the amplitude array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kernel {
    H(usize),
    Cnot { control: usize, target: usize },
    /// RY: `[[c, −s], [s, c]]`.
    RealRotation { q: usize, c: f64, s: f64 },
    /// RZ: `diag(d0, d1)`.
    Diagonal { q: usize, d0: Complex64, d1: Complex64 },
    Dense { q: usize, m: [[Complex64; 2]; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wrap an existing amplitude array. The length must be a power of two and the
    /// squared norm must be 1 within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::config(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::config(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Amplitude encoding: zero-pad `x` to `2^n_qubits`, divide by its 2-norm and
    /// install `x[i]` as the real amplitude of `|i⟩`.
    pub fn amplitude_encode(x: &[f64], n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if x.len() > dim {
            return Err(Error::config(format!(
                "feature vector of length {} does not fit in {n_qubits} qubits ({dim} amplitudes)",
                x.len()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "feature vector contains non-finite value {v}"
            )));
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate(
                "cannot amplitude-encode an all-zero feature vector".into(),
            ));
        }
        let mut amplitudes = vec![ZERO; dim];
        for (a, &v) in amplitudes.iter_mut().zip(x) {
            *a = Complex64::new(v / norm, 0.0);
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Multiply every amplitude by a unit-modulus phase.
    pub fn apply_global_phase(&mut self, phase: f64) {
        let p = Complex64::from_polar(1.0, phase);
        self.amplitudes.iter_mut().for_each(|a| *a *= p);
    }

    /// Apply `gate` with explicitly resolved angles (one per angle position).
    pub fn apply_gate(&mut self, gate: &GateOp, angles: &[f64]) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if angles.len() != gate.kind.arity() {
            return Err(Error::config(format!(
                "{:?} needs {} resolved angle(s), got {}",
                gate.kind,
                gate.kind.arity(),
                angles.len()
            )));
        }
        self.apply_kernel(&gate.kernel(angles));
        Ok(())
    }

    /// Apply an arbitrary 2×2 unitary to qubit `q`.
    pub fn apply_matrix(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        check_qubit(q, self.n_qubits)?;
        self.apply_kernel(&Kernel::Dense { q, m });
        Ok(())
    }

    /// Run `circuit` with trainable angles `theta`.
    pub fn apply_circuit(&mut self, circuit: &Circuit, theta: &[f64]) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::config(format!(
                "circuit has {} qubits, state has {}",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        for k in circuit.kernels(theta)? {
            self.apply_kernel(&k);
        }
        Ok(())
    }

    pub(crate) fn apply_kernel(&mut self, kernel: &Kernel) {
        let amps = &mut self.amplitudes;
        match *kernel {
            Kernel::H(q) => {
                let h = FRAC_1_SQRT_2;
                for_each_pair(amps, q, |a0, a1| {
                    let (x, y) = (*a0, *a1);
                    *a0 = (x + y) * h;
                    *a1 = (x - y) * h;
                });
            }
            Kernel::RealRotation { q, c, s } => for_each_pair(amps, q, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = x * c - y * s;
                *a1 = x * s + y * c;
            }),
            Kernel::Diagonal { q, d0, d1 } => for_each_pair(amps, q, |a0, a1| {
                *a0 *= d0;
                *a1 *= d1;
            }),
            Kernel::Dense { q, m } => for_each_pair(amps, q, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }),
            Kernel::Cnot { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..amps.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        amps.swap(i, i | tbit);
                    }
                }
            }
        }
    }

    /// Exact `⟨Z_k⟩` for qubit `k`.
    pub fn expect_z(&self, k: usize) -> Result<f64> {
        check_qubit(k, self.n_qubits)?;
        let bit = 1usize << k;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// `⟨Z_k⟩` for each of `qubits`, in order. Qubits are assumed valid.
    pub(crate) fn expect_z_many(&self, qubits: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (o, &k) in out.iter_mut().zip(qubits) {
                if (i >> k) & 1 == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }
}

/// Visit every amplitude pair `(|…0_q…⟩, |…1_q…⟩)`.
#[inline]
fn for_each_pair(amps: &mut [Complex64], q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::config(format!(
            "register size {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn check_qubit(q: usize, n_qubits: usize) -> Result<()> {
    if q >= n_qubits {
        return Err(Error::config(format!(
            "qubit {q} out of range for {n_qubits}-qubit register"
        )));
    }
    Ok(())
}

/// Dense unitary of `circuit`, column `j` being the circuit applied to `|j⟩`.
///
/// Row-major, `2^n × 2^n`. Refuses registers larger than [`MAX_UNITARY_QUBITS`].
pub fn circuit_unitary(circuit: &Circuit, theta: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::config(format!(
            "circuit_unitary is limited to {MAX_UNITARY_QUBITS} qubits, circuit has {n}"
        )));
    }
    let dim = 1usize << n;
    let kernels = circuit.kernels(theta)?;
    let mut matrix = vec![vec![ZERO; dim]; dim];
    for j in 0..dim {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[j] = ONE;
        let mut state = StateVector {
            n_qubits: n,
            amplitudes,
        };
        for k in &kernels {
            state.apply_kernel(k);
        }
        for (i, a) in state.amplitudes.into_iter().enumerate() {
            matrix[i][j] = a;
        }
    }
    Ok(matrix)
}
