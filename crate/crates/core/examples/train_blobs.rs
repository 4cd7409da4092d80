//! Train both models on small Gaussian blobs.
//!
//! Amplitude encoding maps `x` and `-x` to the same readout, so blobs centred at
//! `+d·e1` and `-d·e1` stay at chance. Blobs on orthogonal axes are learnable.

use aecqtl::{gen_blobs, split, train, FeatureSet, Model, ModelKind, SplitSpec, TrainConfig};

fn blobs(a: usize, b_axis: usize, sign: f64) -> aecqtl::Result<(FeatureSet, FeatureSet)> {
    let dim = 16;
    let mut m0 = vec![0.0; dim];
    let mut m1 = vec![0.0; dim];
    m0[a] = 4.0;
    m1[b_axis] = 4.0 * sign;
    let all = gen_blobs(&[m0, m1], 60, 11)?;
    split(
        &all,
        SplitSpec {
            per_class_train: 40,
            per_class_test: 20,
            seed: 11,
        },
    )
}

fn main() -> aecqtl::Result<()> {
    let config = TrainConfig {
        epochs: 12,
        lr0: 0.05,
        seed: 1,
        ..TrainConfig::default()
    };
    for (name, (tr, te)) in [("orthogonal", blobs(0, 1, 1.0)?), ("antipodal", blobs(0, 0, -1.0)?)] {
        for (kind, layers) in [(ModelKind::Tlqnn, 2), (ModelKind::Tlqcnn, 2)] {
            let model = Model::new(kind, 16, layers, 2)?;
            let out = train(&model, &tr, &te, &config)?;
            let first = out.curve[0];
            let last = out.final_record();
            println!(
                "{name:<10} {kind:<6}  loss {:.4} -> {:.4}  test acc {:5.1}% -> {:5.1}%",
                first.mean_train_loss, last.mean_train_loss, first.test_accuracy, last.test_accuracy
            );
        }
    }
    Ok(())
}
