//! ROC curve and AUC from a trained model's class-1 probabilities.

use aecqtl::{gen_blobs, roc_auc, split, train, Model, ModelKind, SplitSpec, TrainConfig};

fn main() -> aecqtl::Result<()> {
    let all = gen_blobs(&[vec![2.0, 0.0, 0.5, 0.0], vec![0.0, 2.0, 0.5, 0.0]], 50, 5)?;
    let (tr, te) = split(&all, SplitSpec { per_class_train: 30, per_class_test: 20, seed: 5 })?;
    let model = Model::new(ModelKind::Tlqnn, 4, 2, 2)?;
    let out = train(&model, &tr, &te, &TrainConfig { epochs: 8, lr0: 0.05, ..TrainConfig::default() })?;

    let ev = model.evaluate(&out.params, &te)?;
    let curve = roc_auc(&ev.scores(1), &ev.truth)?;
    println!("test accuracy {:.1}%, AUC {:.4}", ev.accuracy, curve.auc);
    println!("{:>10} {:>6} {:>6}", "threshold", "fpr", "tpr");
    let step = (curve.points.len() / 10).max(1);
    let last = curve.points.len() - 1;
    for (i, p) in curve.points.iter().enumerate() {
        if i % step != 0 && i != last {
            continue;
        }
        println!("{:>10.4} {:>6.3} {:>6.3}", p.threshold, p.fpr, p.tpr);
    }
    Ok(())
}
