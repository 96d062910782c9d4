//! Inductive, universum and semi-supervised classifiers on unlabeled points
//! built by mixing pairs of training examples with ratio a.

use evogan::data::{gen_gaussian_mixture, mix_universum};
use evogan::engine::{evaluate, train_classifier, TrainConfig};
use evogan::losses::{Setting, SettingParams};
use evogan::models::Discriminator;
use evogan::rng::substream;

fn main() -> evogan::Result<()> {
    let seed = 7;
    let ds = gen_gaussian_mixture(3, 400, 10, 4.0, seed)?.split(300, seed)?;
    let (train, test) = (ds.train_batch(), ds.test_batch());
    let cfg = TrainConfig { numiter: 1500, seed, log_interval: 1500, ..TrainConfig::default() };
    let init = Discriminator::mlp(10, &[], 3, &mut substream(seed, 10));

    for a in [0.5, 0.8, 1.0] {
        let unlabeled = mix_universum(&ds, 5000, a, seed)?;
        print!("a = {a:.2}");
        for setting in Setting::ALL {
            let params = SettingParams::for_setting(setting, 0.05, 0.5);
            let (model, _) = train_classifier(&params, &train, &unlabeled, None, &cfg, init.clone())?;
            print!("  {} {:.4}", setting.name(), evaluate(&model, &test, 0.0)?.accuracy);
        }
        println!();
    }
    Ok(())
}
