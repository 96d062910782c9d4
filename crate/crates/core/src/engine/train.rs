use crate::data::sample_rows;
use crate::error::{Error, Result};
use crate::losses::{LabeledBatch, Setting, SettingParams, UnlabeledBatch};
use crate::metrics::{classification_error, frechet_feature_distance, label_entropy, residual_stats};
use crate::models::{decide_rows, disc_forward, Discriminator, Generator, Parameterized};
use crate::rng::{substream, SeedStream};
use crate::tensor::{Matrix, Tape};

use super::adam::{AdamConfig, AdamState};
use super::log::{MetricsLog, MetricsRecord};
use super::objectives::{disc_loss_ugan, gen_loss, GenObjective};
use super::schedule::EvolutionSchedule;

pub const DEFAULT_BATCH_SIZE: usize = 64;
pub const DEFAULT_LOG_INTERVAL: u64 = 100;
pub const DEFAULT_EVAL_SAMPLES: usize = 1000;

// substream indices of a run seed
const STREAM_LABELED: u64 = 1;
const STREAM_UNLABELED: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_EVAL_NOISE: u64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// `C_U` of the generated term in GAN training. The classifier trainer
    /// takes its weight from [`SettingParams`] instead.
    pub unlabeled_weight: f64,
    pub gen: GenObjective,
    /// `M`. Batches are capped at the number of available rows.
    pub batch_size: usize,
    pub numiter: u64,
    pub adam: AdamConfig,
    pub seed: u64,
    pub log_interval: u64,
    pub tie_tol: f64,
    /// Fixed noise rows used to evaluate the generator.
    pub eval_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            unlabeled_weight: crate::losses::DEFAULT_UNLABELED_WEIGHT,
            gen: GenObjective::default(),
            batch_size: DEFAULT_BATCH_SIZE,
            numiter: 1000,
            adam: AdamConfig::default(),
            seed: 0,
            log_interval: DEFAULT_LOG_INTERVAL,
            tie_tol: 0.0,
            eval_samples: DEFAULT_EVAL_SAMPLES,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("unlabeled_weight", self.unlabeled_weight),
            ("gen_weight", self.gen.gen_weight),
            ("lambda", self.gen.lambda),
            ("tie_tol", self.tie_tol),
        ];
        for (name, w) in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {w}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if self.numiter == 0 {
            return Err(Error::Config("numiter must be >= 1".into()));
        }
        if self.log_interval == 0 {
            return Err(Error::Config("log interval must be >= 1".into()));
        }
        if self.eval_samples < 2 {
            return Err(Error::Config("eval_samples must be >= 2".into()));
        }
        let a = &self.adam;
        if !(a.lr > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
            return Err(Error::Config(format!("invalid Adam parameters {a:?}")));
        }
        Ok(())
    }

    fn should_log(&self, done: u64) -> bool {
        done % self.log_interval == 0 || done == self.numiter
    }
}

fn rows_of(batch: &LabeledBatch, rows: &[usize]) -> LabeledBatch {
    LabeledBatch {
        features: batch.features.select_rows(rows),
        labels: rows.iter().map(|&i| batch.labels[i]).collect(),
        classes: batch.classes,
    }
}

fn draw(n: usize, m: usize, rng: &mut SeedStream) -> Result<Vec<usize>> {
    sample_rows(n, m.min(n), rng)
}

fn check_finite(v: f64, what: &str, iter: u64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("{what} is {v} at iteration {iter}")))
    }
}

fn check_inputs(disc: &Discriminator, labeled: &LabeledBatch, others: &[(&str, &Matrix)]) -> Result<()> {
    if labeled.is_empty() {
        return Err(Error::Domain("no labeled rows".into()));
    }
    if labeled.classes != disc.classes() {
        return Err(Error::shape(
            "train",
            format!("{} classes in data vs {} heads", labeled.classes, disc.classes()),
        ));
    }
    let want = disc.input_dim();
    for (name, m) in [("labeled", &labeled.features)].into_iter().chain(others.iter().copied()) {
        if m.cols() != want {
            return Err(Error::shape(
                "train",
                format!("{name} rows have {} columns, model expects {want}", m.cols()),
            ));
        }
    }
    Ok(())
}

/// Accuracy statistics of `disc` on a labeled set.
pub fn evaluate(disc: &Discriminator, batch: &LabeledBatch, tie_tol: f64) -> Result<crate::metrics::ClassificationStats> {
    let preds = decide_rows(&disc.scores(&batch.features)?, tie_tol);
    classification_error(&preds, &batch.labels)
}

/// Statistics of a discriminator on generated samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratedStats {
    /// `None` when every sample is a contradiction.
    pub entropy_bits: Option<f64>,
    pub contradiction_rate: f64,
    pub mean_residual: f64,
    pub frechet_proxy: f64,
}

/// Label entropy, contradiction rate and residual of `disc` on `fake`, and
/// the feature-space distance to `real`.
pub fn evaluate_generated(disc: &Discriminator, fake: &Matrix, real: &Matrix, tie_tol: f64) -> Result<GeneratedStats> {
    let (fake_feats, fake_scores) = disc.forward_values(fake)?;
    let (real_feats, _) = disc.forward_values(real)?;
    let preds = decide_rows(&fake_scores, tie_tol);
    let contradictions = preds.iter().filter(|p| p.class().is_none()).count();
    Ok(GeneratedStats {
        entropy_bits: label_entropy(&preds, disc.classes()).ok(),
        contradiction_rate: contradictions as f64 / preds.len().max(1) as f64,
        mean_residual: residual_stats(&fake_scores)?.0,
        frechet_proxy: frechet_feature_distance(&real_feats, &fake_feats)?,
    })
}

/// Minibatch training of a classifier on `cs_hinge / n + C_U *
/// unified_hinge / m` under `setting`, with `C_U = setting.unlabeled_weight`.
/// `Inductive` ignores `unlabeled`, as does any setting with `C_U = 0`. `eval` supplies the test columns of the
/// log.
pub fn train_classifier(
    setting: &SettingParams,
    labeled: &LabeledBatch,
    unlabeled: &UnlabeledBatch,
    eval: Option<&LabeledBatch>,
    cfg: &TrainConfig,
    mut model: Discriminator,
) -> Result<(Discriminator, MetricsLog)> {
    setting.validate()?;
    cfg.validate()?;
    let use_unlabeled = setting.setting != Setting::Inductive && setting.unlabeled_weight > 0.0;
    let mut others = vec![];
    if use_unlabeled {
        if unlabeled.is_empty() {
            return Err(Error::Domain("setting needs unlabeled rows".into()));
        }
        others.push(("unlabeled", &unlabeled.features));
    }
    if let Some(e) = eval {
        others.push(("eval", &e.features));
    }
    check_inputs(&model, labeled, &others)?;
    let weight = if use_unlabeled { setting.unlabeled_weight } else { 0.0 };

    let mut lab_rng = substream(cfg.seed, STREAM_LABELED);
    let mut unl_rng = substream(cfg.seed, STREAM_UNLABELED);
    let mut adam = AdamState::new();
    let mut log = MetricsLog::new();

    for i in 0..cfg.numiter {
        let batch = rows_of(labeled, &draw(labeled.len(), cfg.batch_size, &mut lab_rng)?);
        let unl = if use_unlabeled {
            let rows = draw(unlabeled.len(), cfg.batch_size, &mut unl_rng)?;
            unlabeled.features.select_rows(&rows)
        } else {
            Matrix::zeros(0, labeled.features.cols())
        };

        let tape = Tape::new();
        let bound = model.bind(&tape, true);
        let lab_scores = bound.forward(tape.constant(batch.features))?.scores;
        let gen_scores = if use_unlabeled {
            bound.forward(tape.constant(unl))?.scores
        } else {
            lab_scores
        };
        let loss = disc_loss_ugan(lab_scores, &batch.labels, gen_scores, weight, setting.eps)?;
        let loss_value = check_finite(loss.item(), "classifier loss", i)?;
        loss.backward()?;
        let grads = bound.grads();
        drop(bound);
        adam.step(model.params_mut(), &grads, &cfg.adam);

        let done = i + 1;
        if cfg.should_log(done) {
            let train = evaluate(&model, labeled, cfg.tie_tol)?;
            let test = eval.map(|e| evaluate(&model, e, cfg.tie_tol)).transpose()?;
            let (entropy, residual) = if unlabeled.is_empty() || unlabeled.features.cols() != model.input_dim() {
                (None, None)
            } else {
                let scores = model.scores(&unlabeled.features)?;
                let preds = decide_rows(&scores, cfg.tie_tol);
                (
                    label_entropy(&preds, model.classes()).ok(),
                    Some(residual_stats(&scores)?.0),
                )
            };
            log.push(MetricsRecord {
                iter: done,
                epsilon: setting.eps,
                disc_loss: loss_value,
                gen_loss: None,
                train_acc: train.accuracy,
                test_acc: test.map(|t| t.accuracy),
                contradiction_rate: test.map(|t| t.contradiction_rate),
                entropy_bits: entropy,
                mean_residual: residual,
                frechet_proxy: None,
            })?;
        }
    }
    Ok((model, log))
}

/// Evolving GAN training. Each iteration takes one discriminator step on
/// [`disc_loss_ugan`] at `eps = schedule.epsilon_at(i)`; while `eps < 0` it
/// also takes one generator step, and once `eps >= 0` the generator is left
/// untouched. A schedule without a final `1.0` entry is plain U-GAN.
///
/// The log reports accuracy on `labeled` and `eval`, and label entropy,
/// contradiction rate, residual and feature distance on a fixed batch of
/// generated samples.
pub fn train_evolving_gan(
    schedule: &EvolutionSchedule,
    cfg: &TrainConfig,
    labeled: &LabeledBatch,
    eval: Option<&LabeledBatch>,
    mut disc: Discriminator,
    mut gen: Generator,
) -> Result<(Discriminator, Generator, MetricsLog)> {
    schedule.validate()?;
    cfg.validate()?;
    let eval_rows = eval.map(|e| ("eval", &e.features));
    check_inputs(&disc, labeled, eval_rows.as_slice())?;
    if gen.output_dim() != disc.input_dim() {
        return Err(Error::shape(
            "train_evolving_gan",
            format!("generator emits {} columns, discriminator expects {}", gen.output_dim(), disc.input_dim()),
        ));
    }

    let mut lab_rng = substream(cfg.seed, STREAM_LABELED);
    let mut noise_rng = substream(cfg.seed, STREAM_NOISE);
    let eval_noise = gen.sample_noise(cfg.eval_samples, &mut substream(cfg.seed, STREAM_EVAL_NOISE));
    let reference = eval.unwrap_or(labeled);
    let mut disc_adam = AdamState::new();
    let mut gen_adam = AdamState::new();
    let mut log = MetricsLog::new();

    for i in 0..cfg.numiter {
        let eps = schedule.epsilon_at(i);
        let real = rows_of(labeled, &draw(labeled.len(), cfg.batch_size, &mut lab_rng)?);
        let noise = gen.sample_noise(real.len(), &mut noise_rng);
        let fake = gen.forward_values(&noise)?;

        let disc_value = {
            let tape = Tape::new();
            let bound = disc.bind(&tape, true);
            let s_real = bound.forward(tape.constant(real.features.clone()))?.scores;
            let s_fake = bound.forward(tape.constant(fake))?.scores;
            let loss = disc_loss_ugan(s_real, &real.labels, s_fake, cfg.unlabeled_weight, eps)?;
            let v = check_finite(loss.item(), "discriminator loss", i)?;
            loss.backward()?;
            let grads = bound.grads();
            drop(bound);
            disc_adam.step(disc.params_mut(), &grads, &cfg.adam);
            v
        };

        let gen_value = if eps < 0.0 {
            let tape = Tape::new();
            let bound = gen.bind(&tape, true);
            let fake = bound.forward(tape.constant(noise))?;
            let out_fake = disc_forward(&tape, &disc, fake)?;
            let out_real = disc_forward(&tape, &disc, tape.constant(real.features))?;
            let loss = gen_loss(out_fake.scores, out_real.features, out_fake.features, &cfg.gen)?;
            let v = check_finite(loss.item(), "generator loss", i)?;
            loss.backward()?;
            let grads = bound.grads();
            drop(bound);
            gen_adam.step(gen.params_mut(), &grads, &cfg.adam);
            Some(v)
        } else {
            None
        };

        let done = i + 1;
        if cfg.should_log(done) {
            let train = evaluate(&disc, labeled, cfg.tie_tol)?;
            let test = eval.map(|e| evaluate(&disc, e, cfg.tie_tol)).transpose()?;
            let samples = gen.forward_values(&eval_noise)?;
            let g = evaluate_generated(&disc, &samples, &reference.features, cfg.tie_tol)?;
            log.push(MetricsRecord {
                iter: done,
                epsilon: eps,
                disc_loss: disc_value,
                gen_loss: gen_value,
                train_acc: train.accuracy,
                test_acc: test.map(|t| t.accuracy),
                contradiction_rate: test.map(|t| t.contradiction_rate),
                entropy_bits: g.entropy_bits,
                mean_residual: Some(g.mean_residual),
                frechet_proxy: Some(g.frechet_proxy),
            })?;
        }
    }
    Ok((disc, gen, log))
}
