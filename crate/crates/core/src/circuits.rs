//! Parameterized circuit programs for the two model families.
//!
//! * TLQNN: `L` layers of `H → U3 → cyclic CNOT` on every qubit followed by one
//!   closing U3 layer, `3n(L+1)` slots.
//! * TLQCNN: one convolution layer (a 15-slot two-qubit operator on each adjacent
//!   pair), one pooling layer (3 slots per pair, the upper qubit is dropped), then
//!   `L` RY + linear-CNOT layers and a closing RY layer on the retained qubits.
//!
//! Slots are allocated in gate order, so a circuit's slots are always the
//! contiguous range `0..num_slots`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statevector::{AngleSource, GateOp, Kernel, MAX_QUBITS};

pub const CONV_SLOTS: usize = 15;
pub const POOL_SLOTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Tlqnn,
    Tlqcnn,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tlqnn => "tlqnn",
            ModelKind::Tlqcnn => "tlqcnn",
        }
    }

    pub fn min_qubits(self) -> usize {
        match self {
            ModelKind::Tlqnn => 2,
            ModelKind::Tlqcnn => 3,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tlqnn" => Ok(ModelKind::Tlqnn),
            "tlqcnn" => Ok(ModelKind::Tlqcnn),
            other => Err(Error::config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// An ordered gate program over `n_qubits` whose trainable angles are the slots
/// `0..num_slots`, each read by exactly one gate position.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
    num_slots: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "register size {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut seen: Vec<bool> = Vec::new();
        for gate in &gates {
            gate.validate(n_qubits)?;
            for slot in gate.slots() {
                if slot >= seen.len() {
                    seen.resize(slot + 1, false);
                }
                if std::mem::replace(&mut seen[slot], true) {
                    return Err(Error::config(format!("slot {slot} is used twice")));
                }
            }
        }
        if let Some(gap) = seen.iter().position(|used| !used) {
            return Err(Error::config(format!("slot {gap} is never used")));
        }
        Ok(Self {
            n_qubits,
            gates,
            num_slots: seen.len(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub(crate) fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_slots {
            return Err(Error::config(format!(
                "circuit has {} slots, got {} angles",
                self.num_slots,
                theta.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn kernels(&self, theta: &[f64]) -> Result<Vec<Kernel>> {
        self.check_theta(theta)?;
        Ok(self
            .gates
            .iter()
            .map(|g| g.resolved_kernel(theta, None))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum U3Angle {
    Theta,
    Phi,
    Lambda,
}

const U3_ANGLES: [U3Angle; 3] = [U3Angle::Theta, U3Angle::Phi, U3Angle::Lambda];

/// Coefficients of the canonical two-qubit interaction `exp(i(αXX + βYY + γZZ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NAngle {
    Alpha,
    Beta,
    Gamma,
}

const N_ANGLES: [NAngle; 3] = [NAngle::Alpha, NAngle::Beta, NAngle::Gamma];

/// Part of the convolution operator `(A1 ⊗ A2)·N(α,β,γ)·(A3 ⊗ A4)` a slot belongs to.
/// `A1`/`A3` act on the upper qubit of the pair, `A2`/`A4` on the lower one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvPart {
    A3(U3Angle),
    A4(U3Angle),
    Core(NAngle),
    A1(U3Angle),
    A2(U3Angle),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotRole {
    /// TLQNN U3 angle; `layer == L` is the closing U3 layer.
    Ansatz {
        layer: usize,
        qubit: usize,
        angle: U3Angle,
    },
    Conv {
        pair: usize,
        part: ConvPart,
    },
    Pool {
        pair: usize,
        angle: NAngle,
    },
    /// TLQCNN RY angle on the `retained`-th retained qubit; `layer == L` is the
    /// closing RY layer.
    Fc {
        layer: usize,
        retained: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    AnsatzLayer(usize),
    ClosingU3,
    Convolution,
    Pooling,
    FullyConnected,
}

/// A named contiguous block of the circuit, by slot range and gate range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: SectionKind,
    pub slots: Range<usize>,
    pub gates: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    roles: Vec<SlotRole>,
    sections: Vec<Section>,
}

impl ParamLayout {
    pub fn num_slots(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[SlotRole] {
        &self.roles
    }

    pub fn role(&self, slot: usize) -> Option<SlotRole> {
        self.roles.get(slot).copied()
    }

    pub fn slot_of(&self, role: SlotRole) -> Option<usize> {
        self.roles.iter().position(|r| *r == role)
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn section(&self, kind: SectionKind) -> Option<&Section> {
        self.sections.iter().find(|s| s.kind == kind)
    }
}

/// Pairs `(q_{2j}, q_{2j+1})`; the upper qubit `q_{2j}` is dropped and the lower
/// one kept, plus the last qubit when `n` is odd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolingPlan {
    pub pairs: Vec<(usize, usize)>,
    pub retained: Vec<usize>,
}

impl PoolingPlan {
    pub fn new(n_qubits: usize) -> Self {
        let pairs: Vec<_> = (0..n_qubits / 2).map(|j| (2 * j, 2 * j + 1)).collect();
        let mut retained: Vec<_> = pairs.iter().map(|&(_, kept)| kept).collect();
        if n_qubits % 2 == 1 {
            retained.push(n_qubits - 1);
        }
        Self { pairs, retained }
    }

    pub fn discarded(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(dropped, _)| dropped).collect()
    }
}

/// Accumulates gates and slot roles while tracking section boundaries.
struct Builder {
    gates: Vec<GateOp>,
    roles: Vec<SlotRole>,
    sections: Vec<Section>,
    open: Option<(SectionKind, usize, usize)>,
}

impl Builder {
    fn new() -> Self {
        Self {
            gates: Vec::new(),
            roles: Vec::new(),
            sections: Vec::new(),
            open: None,
        }
    }

    fn next_slot(&self) -> usize {
        self.roles.len()
    }

    fn begin(&mut self, kind: SectionKind) {
        self.end();
        self.open = Some((kind, self.roles.len(), self.gates.len()));
    }

    fn end(&mut self) {
        if let Some((kind, slot0, gate0)) = self.open.take() {
            self.sections.push(Section {
                kind,
                slots: slot0..self.roles.len(),
                gates: gate0..self.gates.len(),
            });
        }
    }

    fn push(&mut self, gates: Vec<GateOp>, roles: impl IntoIterator<Item = SlotRole>) {
        self.gates.extend(gates);
        self.roles.extend(roles);
    }

    fn finish(mut self, n_qubits: usize) -> Result<(Circuit, ParamLayout)> {
        self.end();
        let circuit = Circuit::new(n_qubits, self.gates)?;
        debug_assert_eq!(circuit.num_slots(), self.roles.len());
        Ok((
            circuit,
            ParamLayout {
                roles: self.roles,
                sections: self.sections,
            },
        ))
    }
}

/// TLQNN circuit: `layers` repetitions of H, U3 and a cyclic CNOT
/// `q → (q+1) mod n` on every qubit, then one closing U3 layer.
pub fn build_tlqnn(n_qubits: usize, layers: usize) -> Result<(Circuit, ParamLayout)> {
    check_size(ModelKind::Tlqnn, n_qubits, layers)?;
    let mut b = Builder::new();
    for layer in 0..=layers {
        let closing = layer == layers;
        b.begin(if closing {
            SectionKind::ClosingU3
        } else {
            SectionKind::AnsatzLayer(layer)
        });
        if !closing {
            b.push((0..n_qubits).map(GateOp::h).collect(), []);
        }
        for qubit in 0..n_qubits {
            let slot = b.next_slot();
            b.push(
                vec![GateOp::u3(qubit, slot)],
                U3_ANGLES.map(|angle| SlotRole::Ansatz {
                    layer,
                    qubit,
                    angle,
                }),
            );
        }
        if !closing {
            b.push(
                (0..n_qubits)
                    .map(|q| GateOp::cnot(q, (q + 1) % n_qubits))
                    .collect(),
                [],
            );
        }
    }
    b.finish(n_qubits)
}

/// Three-CNOT circuit for `N(α,β,γ) = exp(i(αXX + βYY + γZZ))` on qubits `(a, b)`,
/// reading `(α, β, γ)` from `slots`.
///
/// The rotation angles are affine in the stored coefficients: `RZ(π/2 − 2γ)` on `a`,
/// `RY(2α − π/2)` and `RY(π/2 − 2β)` on `b`, bracketed by fixed `RZ(−π/2)` on `b`
/// and `RZ(π/2)` on `a`.
pub fn build_n_block(pair: (usize, usize), slots: [usize; 3]) -> Vec<GateOp> {
    let (a, b) = pair;
    let mut gates = vec![GateOp::rz(b, AngleSource::Fixed(-FRAC_PI_2))];
    gates.extend(n_interior(pair, slots));
    gates.push(GateOp::rz(a, AngleSource::Fixed(FRAC_PI_2)));
    gates
}

fn n_interior((a, b): (usize, usize), [alpha, beta, gamma]: [usize; 3]) -> Vec<GateOp> {
    vec![
        GateOp::cnot(b, a),
        GateOp::rz(a, AngleSource::affine(gamma, -2.0, FRAC_PI_2)),
        GateOp::ry(b, AngleSource::affine(alpha, 2.0, -FRAC_PI_2)),
        GateOp::cnot(a, b),
        GateOp::ry(b, AngleSource::affine(beta, -2.0, FRAC_PI_2)),
        GateOp::cnot(b, a),
    ]
}

/// Convolution operator on `(a, b)`: U3 on each qubit, the `N` block, U3 on each
/// qubit again. Slots `slot_base..slot_base+15` in the order A3, A4, (α, β, γ), A1, A2.
pub fn build_conv_op(pair: (usize, usize), slot_base: usize) -> Vec<GateOp> {
    let (a, b) = pair;
    let s = slot_base;
    let mut gates = vec![GateOp::u3(a, s), GateOp::u3(b, s + 3)];
    gates.extend(build_n_block(pair, [s + 6, s + 7, s + 8]));
    gates.push(GateOp::u3(a, s + 9));
    gates.push(GateOp::u3(b, s + 12));
    gates
}

fn conv_roles(pair: usize) -> impl Iterator<Item = SlotRole> {
    U3_ANGLES
        .map(ConvPart::A3)
        .into_iter()
        .chain(U3_ANGLES.map(ConvPart::A4))
        .chain(N_ANGLES.map(ConvPart::Core))
        .chain(U3_ANGLES.map(ConvPart::A1))
        .chain(U3_ANGLES.map(ConvPart::A2))
        .map(move |part| SlotRole::Conv { pair, part })
}

/// Pooling operator on `(discarded, retained)`: the `N` block without its two fixed
/// RZ bookends. Slots `slot_base..slot_base+3` hold `(α, β, γ)`.
pub fn build_pool_op(pair: (usize, usize), slot_base: usize) -> Vec<GateOp> {
    n_interior(pair, [slot_base, slot_base + 1, slot_base + 2])
}

/// TLQCNN circuit with one convolution and one pooling layer and `fc_layers`
/// RY/linear-CNOT layers on the retained qubits.
pub fn build_tlqcnn(
    n_qubits: usize,
    fc_layers: usize,
) -> Result<(Circuit, ParamLayout, PoolingPlan)> {
    check_size(ModelKind::Tlqcnn, n_qubits, fc_layers)?;
    let plan = PoolingPlan::new(n_qubits);
    let mut b = Builder::new();

    b.begin(SectionKind::Convolution);
    for q in 0..n_qubits - 1 {
        let gates = build_conv_op((q, q + 1), b.next_slot());
        b.push(gates, conv_roles(q));
    }

    b.begin(SectionKind::Pooling);
    for (pair, &(dropped, kept)) in plan.pairs.iter().enumerate() {
        let gates = build_pool_op((dropped, kept), b.next_slot());
        b.push(gates, N_ANGLES.map(|angle| SlotRole::Pool { pair, angle }));
    }

    b.begin(SectionKind::FullyConnected);
    let kept = &plan.retained;
    for layer in 0..=fc_layers {
        for (retained, &q) in kept.iter().enumerate() {
            let slot = b.next_slot();
            b.push(
                vec![GateOp::ry(q, AngleSource::slot(slot))],
                [SlotRole::Fc { layer, retained }],
            );
        }
        if layer < fc_layers {
            b.push(
                kept.windows(2).map(|w| GateOp::cnot(w[0], w[1])).collect(),
                [],
            );
        }
    }

    let (circuit, layout) = b.finish(n_qubits)?;
    Ok((circuit, layout, plan))
}

/// `(quantum slots, classical parameters)` for a binary classifier.
pub fn param_count(kind: ModelKind, n_qubits: usize, layers: usize) -> (usize, usize) {
    param_count_for_classes(kind, n_qubits, layers, 2)
}

/// `(quantum slots, classical parameters)` with a `num_classes × measured` weight
/// matrix plus bias.
pub fn param_count_for_classes(
    kind: ModelKind,
    n_qubits: usize,
    layers: usize,
    num_classes: usize,
) -> (usize, usize) {
    let n = n_qubits;
    match kind {
        ModelKind::Tlqnn => (3 * n * (layers + 1), num_classes * (n + 1)),
        ModelKind::Tlqcnn => {
            let kept = n.div_ceil(2);
            (
                CONV_SLOTS * (n - 1) + POOL_SLOTS * (n / 2) + (layers + 1) * kept,
                num_classes * (kept + 1),
            )
        }
    }
}

fn check_size(kind: ModelKind, n_qubits: usize, layers: usize) -> Result<()> {
    if n_qubits < kind.min_qubits() || n_qubits > MAX_QUBITS {
        return Err(Error::config(format!(
            "{kind} needs {}..={MAX_QUBITS} qubits, got {n_qubits}",
            kind.min_qubits()
        )));
    }
    if layers < 1 {
        return Err(Error::config(format!("{kind} needs at least one layer")));
    }
    Ok(())
}
