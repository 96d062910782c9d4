//! Label entropy, contradiction rate and the feature-space Frechet proxy for a
//! few toy "generators".

use evogan::data::gen_gaussian_mixture;
use evogan::engine::{evaluate_generated, train_classifier, TrainConfig};
use evogan::losses::{SettingParams, UnlabeledBatch};
use evogan::models::Discriminator;
use evogan::rng::substream;
use evogan::tensor::Matrix;

fn main() -> evogan::Result<()> {
    let ds = gen_gaussian_mixture(3, 300, 2, 4.0, 2)?;
    let real = ds.train_batch();
    let empty = UnlabeledBatch::new(Matrix::zeros(0, 2));
    let cfg = TrainConfig { numiter: 800, log_interval: 800, ..TrainConfig::default() };
    let init = Discriminator::mlp(2, &[16], 3, &mut substream(2, 10));
    let (disc, _) = train_classifier(&SettingParams::inductive(), &real, &empty, None, &cfg, init)?;

    let class0: Vec<usize> = (0..real.len()).filter(|&i| real.labels[i] == 0).collect();
    let one_class = real.features.select_rows(&class0);
    let origin = Matrix::zeros(300, 2);
    for (name, fake) in [("real data", &real.features), ("one class", &one_class), ("all at origin", &origin)] {
        let s = evaluate_generated(&disc, fake, &real.features, 0.0)?;
        println!(
            "{name:<14} entropy {:>5} bits  contradictions {:.3}  residual {:.3}  frechet {:.3}",
            s.entropy_bits.map_or("-".into(), |h| format!("{h:.3}")),
            s.contradiction_rate,
            s.mean_residual,
            s.frechet_proxy
        );
    }
    Ok(())
}
