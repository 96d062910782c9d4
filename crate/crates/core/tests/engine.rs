use evogan::data::{gen_gaussian_mixture, mix_universum};
use evogan::engine::{train_classifier, train_evolving_gan, EvolutionSchedule, TrainConfig};
use evogan::losses::{contradiction_residual, SettingParams, UnlabeledBatch};
use evogan::models::{Discriminator, Generator, Parameterized};
use evogan::rng::seeded;
use evogan::tensor::Matrix;

fn cfg(numiter: u64) -> TrainConfig {
    TrainConfig {
        numiter,
        batch_size: 32,
        log_interval: 50,
        eval_samples: 100,
        ..TrainConfig::default()
    }
}

#[test]
fn zero_unlabeled_weight_matches_inductive_exactly() {
    let ds = gen_gaussian_mixture(3, 40, 4, 3.0, 1).unwrap().split(80, 1).unwrap();
    let train = ds.train_batch();
    let unl = mix_universum(&ds, 200, 0.5, 1).unwrap();
    let model = Discriminator::mlp(4, &[6], 3, &mut seeded(5));
    let (base, base_log) =
        train_classifier(&SettingParams::inductive(), &train, &unl, None, &cfg(200), model.clone()).unwrap();
    for params in [SettingParams::universum(0.05, 0.0), SettingParams::semi_supervised(0.0)] {
        let (m, log) = train_classifier(&params, &train, &unl, None, &cfg(200), model.clone()).unwrap();
        let bits = |d: &Discriminator| d.flat_params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&m), bits(&base));
        let accs = |l: &evogan::engine::MetricsLog| l.records().iter().map(|r| r.train_acc).collect::<Vec<_>>();
        assert_eq!(accs(&log), accs(&base_log));
    }
}

#[test]
fn universum_points_on_the_symmetry_line_become_contradictions() {
    // two blobs mirrored across x = 0; universum points on x = 0
    let ds = gen_gaussian_mixture(2, 50, 2, 6.0, 3).unwrap();
    let train = ds.train_batch();
    let mut rng = seeded(4);
    let line: Vec<[f64; 2]> = (0..200)
        .map(|_| {
            use rand::Rng;
            [0.0, rng.random_range(-4.0..4.0)]
        })
        .collect();
    // class means sit on the x axis, so the symmetry line is the y axis
    assert!(ds.features.iter_rows().take(50).map(|r| r[0]).sum::<f64>() > 0.0);
    let unl = UnlabeledBatch::new(Matrix::from_rows(&line));
    let model = Discriminator::mlp(2, &[], 2, &mut seeded(6));
    let c = cfg(1000);
    let (ind, _) = train_classifier(&SettingParams::inductive(), &train, &unl, None, &c, model.clone()).unwrap();
    let (uni, _) = train_classifier(&SettingParams::universum(0.05, 0.5), &train, &unl, None, &c, model).unwrap();
    let mean_res = |d: &Discriminator| {
        let r = contradiction_residual(&d.scores(&unl.features).unwrap());
        r.iter().sum::<f64>() / r.len() as f64
    };
    let (ri, ru) = (mean_res(&ind), mean_res(&uni));
    assert!(ru <= 0.5 * ri, "universum residual {ru} vs inductive {ri}");
}

#[test]
fn gan_runs_are_bit_reproducible() {
    let data = gen_gaussian_mixture(3, 30, 2, 4.0, 2).unwrap().train_batch();
    let schedule = EvolutionSchedule::new(vec![-0.05, 1.0], 60).unwrap();
    let run = || {
        let disc = Discriminator::mlp(2, &[8], 3, &mut seeded(1));
        let gen = Generator::mlp(4, &[8], 2, &mut seeded(2));
        let (d, g, log) = train_evolving_gan(&schedule, &cfg(100), &data, Some(&data), disc, gen).unwrap();
        let mut csv = Vec::new();
        log.write_csv(&mut csv, &[]).unwrap();
        (d.flat_params(), g.flat_params(), csv)
    };
    let (a, b) = (run(), run());
    assert_eq!(a.2, b.2);
    assert!(a.0.iter().zip(&b.0).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert!(a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn log_epsilon_follows_schedule() {
    let data = gen_gaussian_mixture(3, 30, 2, 4.0, 2).unwrap().train_batch();
    let schedule = EvolutionSchedule::new(vec![-0.05, -0.01, 1.0], 70).unwrap();
    let disc = Discriminator::mlp(2, &[8], 3, &mut seeded(1));
    let gen = Generator::mlp(4, &[8], 2, &mut seeded(2));
    let c = TrainConfig { log_interval: 10, ..cfg(250) };
    let (_, _, log) = train_evolving_gan(&schedule, &c, &data, None, disc, gen).unwrap();
    assert_eq!(log.len(), 25);
    for r in log.records() {
        assert_eq!(r.epsilon, schedule.epsilon_at(r.iter - 1));
        assert_eq!(r.gen_loss.is_none(), r.epsilon >= 0.0);
    }
}

#[test]
fn nan_inputs_are_reported_as_numeric_failures() {
    let mut data = gen_gaussian_mixture(2, 10, 2, 4.0, 2).unwrap().train_batch();
    data.features.set(0, 0, f64::NAN);
    let model = Discriminator::mlp(2, &[], 2, &mut seeded(1));
    let c = TrainConfig { batch_size: 20, ..cfg(5) };
    let err = train_classifier(
        &SettingParams::inductive(),
        &data,
        &UnlabeledBatch::new(Matrix::zeros(0, 2)),
        None,
        &c,
        model,
    )
    .unwrap_err();
    assert!(matches!(err, evogan::Error::Numeric(_)), "{err}");
}
