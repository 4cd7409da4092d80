mod common;

use std::f64::consts::{FRAC_PI_4, PI};

use aecqtl::circuits::{build_conv_op, build_n_block, build_pool_op, SectionKind};
use aecqtl::{build_tlqcnn, circuit_unitary, param_count, Circuit, GateKind, GateOp, ModelKind, StateVector};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn n_block_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let circuit = Circuit::new(2, build_n_block((0, 1), [0, 1, 2])).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
        let u = circuit_unitary(&circuit, &t).unwrap();
        worst = worst.max(max_dev_up_to_phase(&u, &n_block_oracle(t[0], t[1], t[2])));
    }
    assert!(worst < 1e-8, "worst deviation {worst:e}");
}

#[test]
fn n_block_on_reversed_pair_is_symmetric() {
    // the generator is symmetric in the two qubits
    let circuit = Circuit::new(2, build_n_block((1, 0), [0, 1, 2])).unwrap();
    let t = [0.3, -1.1, 2.0];
    let u = circuit_unitary(&circuit, &t).unwrap();
    assert!(max_dev_up_to_phase(&u, &n_block_oracle(t[0], t[1], t[2])) < 1e-10);
}

#[test]
fn expm_oracle_sanity() {
    // exp(iθZZ) is diagonal with phases e^{±iθ}
    let u = n_block_oracle(0.0, 0.0, 0.4);
    let e = c(0.0, 0.4).exp();
    assert!((u[0][0] - e).norm() < 1e-14);
    assert!((u[1][1] - e.conj()).norm() < 1e-14);
    assert!(max_dev(&matmul(&dagger(&u), &u), &identity(4)) < 1e-13);
}

#[test]
fn conv_at_zero_is_identity() {
    let circuit = Circuit::new(2, build_conv_op((0, 1), 0)).unwrap();
    let u = circuit_unitary(&circuit, &[0.0; 15]).unwrap();
    assert!(max_dev_up_to_phase(&u, &identity(4)) < 1e-12);
}

#[test]
fn pool_at_quarter_pi_is_three_cnots() {
    let circuit = Circuit::new(2, build_pool_op((0, 1), 0)).unwrap();
    let u = circuit_unitary(&circuit, &[FRAC_PI_4; 3]).unwrap();
    let cnots = Circuit::new(
        2,
        vec![GateOp::cnot(1, 0), GateOp::cnot(0, 1), GateOp::cnot(1, 0)],
    )
    .unwrap();
    let v = circuit_unitary(&cnots, &[]).unwrap();
    assert!(max_dev(&u, &v) < 1e-12);
}

#[test]
fn table_counts() {
    let expected = [
        (ModelKind::Tlqnn, 9, 4, 135, 20),
        (ModelKind::Tlqnn, 10, 4, 150, 22),
        (ModelKind::Tlqnn, 11, 4, 165, 24),
        (ModelKind::Tlqcnn, 9, 6, 167, 12),
        (ModelKind::Tlqcnn, 10, 6, 185, 12),
        (ModelKind::Tlqcnn, 11, 6, 207, 14),
    ];
    for (kind, n, l, q, cl) in expected {
        assert_eq!(param_count(kind, n, l), (q, cl), "{kind} n={n} L={l}");
    }
}

#[test]
fn nothing_touches_discarded_qubits_after_pooling() {
    for n in 3..=11 {
        let (circuit, layout, plan) = build_tlqcnn(n, 6).unwrap();
        let pool_end = layout.section(SectionKind::Pooling).unwrap().gates.end;
        let dropped = plan.discarded();
        for g in &circuit.gates()[pool_end..] {
            assert!(g.targets.iter().all(|q| !dropped.contains(q)), "n={n}: {g:?}");
        }
    }
}

#[test]
fn discarded_qubits_do_not_influence_readout() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [3, 4, 5, 8, 9] {
        let (circuit, layout, plan) = build_tlqcnn(n, 3).unwrap();
        let pool_end = layout.section(SectionKind::Pooling).unwrap().gates.end;
        let theta: Vec<f64> = (0..circuit.num_slots()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let x: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dropped = plan.discarded();

        let run = |inject: bool, rng: &mut ChaCha8Rng| {
            let mut s = StateVector::amplitude_encode(&x, n).unwrap();
            for (i, g) in circuit.gates().iter().enumerate() {
                if inject && i == pool_end {
                    for _ in 0..10 {
                        let q = dropped[rng.gen_range(0..dropped.len())];
                        let a = [rng.gen_range(0.0..PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..PI)];
                        s.apply_gate(&GateOp::u3(q, 0), &a).unwrap();
                        if dropped.len() > 1 {
                            let t = dropped[rng.gen_range(0..dropped.len())];
                            if t != q {
                                s.apply_gate(&GateOp::cnot(q, t), &[]).unwrap();
                            }
                        }
                    }
                }
                s.apply_gate(g, &resolve(g, &theta)).unwrap();
            }
            plan.retained.iter().map(|&k| s.expect_z(k).unwrap()).collect::<Vec<_>>()
        };
        let clean = run(false, &mut rng);
        let poked = run(true, &mut rng);
        for (a, b) in clean.iter().zip(&poked) {
            assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn fc_section_uses_only_ry_and_cnot() {
    let (circuit, layout, _) = build_tlqcnn(9, 6).unwrap();
    let fc = layout.section(SectionKind::FullyConnected).unwrap();
    assert_eq!(fc.slots.len(), 5 * 7);
    for g in &circuit.gates()[fc.gates.clone()] {
        assert!(matches!(g.kind, GateKind::Ry | GateKind::Cnot));
    }
}
