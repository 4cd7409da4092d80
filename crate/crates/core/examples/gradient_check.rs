//! Compare parameter-shift gradients with central finite differences.

use aecqtl::grad::{compare_gradients, param_shift_grad};
use aecqtl::{fd_grad, sample_gradient, Model, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> aecqtl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (kind, n, layers) in [(ModelKind::Tlqnn, 4, 2), (ModelKind::Tlqcnn, 5, 2), (ModelKind::Tlqcnn, 9, 6)] {
        let model = Model::with_qubits(kind, 1 << n, n, layers, 2)?;
        let params = model.init_params(&mut rng);
        let x: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let exact = sample_gradient(&model, &params, &x, 1)?;
        let numeric = fd_grad(&model, &params, &x, 1, 1e-5)?;
        let cmp = compare_gradients(&exact, &numeric, 1e-5, 1e-8);
        let max_abs = exact
            .flatten()
            .iter()
            .zip(numeric.flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let ones = vec![1.0; model.measured().len()];
        let evals = param_shift_grad(&model, &params.theta, &x, &ones)?.evaluations;
        println!(
            "{kind} n={n} L={layers}: {} slots, {evals} circuit evaluations, max |shift - fd| {max_abs:.2e}, {}",
            model.num_slots(),
            if cmp.passed { "agree" } else { "DISAGREE" }
        );
    }
    Ok(())
}
