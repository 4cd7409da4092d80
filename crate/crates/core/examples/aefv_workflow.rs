//! Generate a feature file, read it back, split it and checkpoint a model.

use aecqtl::cli::Checkpoint;
use aecqtl::{gen_synthetic, read_aefv, split, write_aefv, Model, ModelKind, SplitSpec, TrainConfig};
use rand::SeedableRng;

fn main() -> aecqtl::Result<()> {
    let dir = std::env::temp_dir().join("aecqtl-aefv-example");
    std::fs::create_dir_all(&dir).map_err(|e| aecqtl::Error::Io { path: dir.clone(), source: e })?;

    let set = gen_synthetic(512, 384, 4.0, 7)?;
    let path = dir.join("blobs.aefv");
    write_aefv(&set, &path)?;
    let back = read_aefv(&path)?;
    assert_eq!(back, set);
    println!("{}: {} samples of dim {}, classes {:?}", path.display(), back.len(), back.dim(), back.class_sizes());
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    println!("header: {}", text.lines().next().unwrap_or(""));

    let (tr, te) = split(&back, SplitSpec { per_class_train: 256, per_class_test: 128, seed: 7 })?;
    write_aefv(&tr, dir.join("train.aefv"))?;
    write_aefv(&te, dir.join("test.aefv"))?;
    println!("split: train {:?}, test {:?}", tr.class_sizes(), te.class_sizes());

    let model = Model::new(ModelKind::Tlqcnn, 512, 6, 2)?;
    let params = model.init_params(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7));
    let ckpt = Checkpoint::new(&model, TrainConfig::default(), 7, params);
    let ckpt_path = dir.join("init_checkpoint.txt");
    ckpt.save(&ckpt_path)?;
    let loaded = Checkpoint::load(&ckpt_path)?;
    assert_eq!(loaded.to_text(), ckpt.to_text());
    println!("checkpoint {} ({} lines)", ckpt_path.display(), ckpt.to_text().lines().count());
    Ok(())
}
