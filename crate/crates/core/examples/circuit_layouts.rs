//! Parameter budgets and section layout of both circuit families.

use aecqtl::circuits::SlotRole;
use aecqtl::{param_count, Model, ModelKind};

fn main() -> aecqtl::Result<()> {
    println!("{:<8} {:>4} {:>7} {:>8} {:>10} {:>6}", "model", "dim", "qubits", "quantum", "classical", "total");
    for (kind, layers) in [(ModelKind::Tlqnn, 4), (ModelKind::Tlqcnn, 6)] {
        for dim in [512, 1024, 2048] {
            let model = Model::new(kind, dim, layers, 2)?;
            let n = model.config().n_qubits;
            let (q, c) = param_count(kind, n, layers);
            println!("{:<8} {dim:>4} {n:>7} {q:>8} {c:>10} {:>6}", kind.name(), q + c);
        }
    }

    let model = Model::new(ModelKind::Tlqcnn, 512, 6, 2)?;
    println!("\nTLQCNN on 9 qubits:");
    for section in model.layout().sections() {
        println!(
            "  {:<18} slots {:>3}..{:<3} gates {:>3}..{:<3}",
            format!("{:?}", section.kind),
            section.slots.start,
            section.slots.end,
            section.gates.start,
            section.gates.end
        );
    }
    let plan = model.pooling().expect("TLQCNN pools");
    println!("  pooling pairs {:?}, measured {:?}", plan.pairs, model.measured());
    if let Some(SlotRole::Pool { pair, angle }) = model.layout().role(135) {
        println!("  slot 135 is the {angle:?} angle of pooling pair {pair}");
    }
    Ok(())
}
