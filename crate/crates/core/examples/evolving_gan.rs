//! Train a U-GAN and an evolving GAN on a 2-D mixture and save checkpoints.

use evogan::data::gen_gaussian_mixture;
use evogan::engine::{train_evolving_gan, EvolutionSchedule, TrainConfig};
use evogan::models::{load_checkpoint, save_checkpoint, Checkpoint, Discriminator, Generator};
use evogan::rng::substream;

fn main() -> evogan::Result<()> {
    let seed = 1;
    let ds = gen_gaussian_mixture(3, 400, 2, 2.5, seed)?.split(100, seed)?;
    let (train, test) = (ds.train_batch(), ds.test_batch());
    let cfg = TrainConfig { numiter: 6000, seed, log_interval: 1000, eval_samples: 500, ..TrainConfig::default() };
    let disc = Discriminator::mlp(2, &[64, 64], 3, &mut substream(seed, 10));
    let gen = Generator::mlp(16, &[64, 64], 2, &mut substream(seed, 11));

    let schedules = [
        ("ugan", EvolutionSchedule::universum_only(-0.05)?),
        ("evolving", EvolutionSchedule::new(vec![-0.05, -0.01, -0.001, 1.0], 1500)?),
    ];
    let dir = std::env::temp_dir().join("evogan_example");
    std::fs::create_dir_all(&dir).expect("create output directory");
    for (name, schedule) in schedules {
        let (d, g, log) = train_evolving_gan(&schedule, &cfg, &train, Some(&test), disc.clone(), gen.clone())?;
        println!("{name}");
        for r in log.records() {
            println!(
                "  iter {:>5} eps {:>7} test_acc {:.4} entropy {:.3}",
                r.iter,
                r.epsilon,
                r.test_acc.unwrap_or(f64::NAN),
                r.entropy_bits.unwrap_or(f64::NAN)
            );
        }
        let path = dir.join(format!("{name}_disc.ckpt"));
        save_checkpoint(&path, &Checkpoint::Discriminator(d.clone()))?;
        assert_eq!(load_checkpoint(&path)?, Checkpoint::Discriminator(d));
        save_checkpoint(&dir.join(format!("{name}_gen.ckpt")), &Checkpoint::Generator(g))?;
    }
    println!("checkpoints in {}", dir.display());
    Ok(())
}
