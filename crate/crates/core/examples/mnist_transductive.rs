//! Inductive vs semi-supervised training on the bundled 5000-digit MNIST subset,
//! using the test images as the unlabeled pool.

use std::path::Path;

use evogan::data::load_idx;
use evogan::engine::{evaluate, train_classifier, TrainConfig};
use evogan::losses::{SettingParams, UnlabeledBatch};
use evogan::models::Discriminator;
use evogan::rng::substream;

fn main() -> evogan::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist5k");
    let seed = 0;
    let ds = load_idx(&root.join("images-idx3-ubyte.gz"), &root.join("labels-idx1-ubyte.gz"))?.split(600, seed)?;
    let (train, test) = (ds.train_batch(), ds.test_batch());
    let unlabeled = UnlabeledBatch::new(test.features.clone());
    let cfg = TrainConfig { numiter: 1000, seed, log_interval: 1000, ..TrainConfig::default() };
    let init = Discriminator::mlp(784, &[256, 256], 10, &mut substream(seed, 10));

    for (name, params) in [("inductive", SettingParams::inductive()), ("semi_supervised", SettingParams::semi_supervised(0.1))] {
        let (model, _) = train_classifier(&params, &train, &unlabeled, None, &cfg, init.clone())?;
        println!("{name:<16} test accuracy {:.4}", evaluate(&model, &test, 0.0)?.accuracy);
    }
    Ok(())
}
