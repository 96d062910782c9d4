use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{AdamConfig, EvolutionSchedule, GenLossKind, GenObjective, TrainConfig};
use crate::error::{Error, Result};
use crate::losses::{Setting, SettingParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Classify,
    Fig2Sweep,
    Gan,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Classify => "classify",
            Experiment::Fig2Sweep => "fig2_sweep",
            Experiment::Gan => "gan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Mixture,
    Idx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub source: DataSource,
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    pub sep: f64,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub n_train: usize,
    /// Cap on test rows; all remaining rows when absent.
    pub n_test: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: DataSource::Mixture,
            classes: 3,
            per_class: 500,
            dim: 2,
            sep: 4.0,
            images: None,
            labels: None,
            n_train: 100,
            n_test: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Discriminator feature-map widths; empty gives a linear model.
    pub hidden: Vec<usize>,
    pub gen_hidden: Vec<usize>,
    pub noise_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: vec![64, 64],
            gen_hidden: vec![64, 64],
            noise_dim: crate::models::DEFAULT_NOISE_DIM,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[allow(non_snake_case)]
pub struct TrainSection {
    pub C_U: f64,
    pub C_gen: f64,
    pub lambda: f64,
    pub M: usize,
    pub numiter: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub gen_loss: String,
    pub tie_tol: f64,
    pub eval_samples: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            C_U: t.unlabeled_weight,
            C_gen: t.gen.gen_weight,
            lambda: t.gen.lambda,
            M: t.batch_size,
            numiter: t.numiter,
            lr: t.adam.lr,
            beta1: t.adam.beta1,
            beta2: t.adam.beta2,
            adam_eps: t.adam.eps,
            gen_loss: t.gen.kind.name().into(),
            tie_tol: t.tie_tol,
            eval_samples: t.eval_samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SettingSection {
    /// Settings trained by `classify`; `fig2_sweep` always uses all three.
    pub list: Vec<String>,
    pub margin: f64,
}

impl Default for SettingSection {
    fn default() -> Self {
        SettingSection {
            list: vec!["inductive".into(), "semi_supervised".into()],
            margin: crate::losses::DEFAULT_MARGIN,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnlabeledSource {
    /// The test split, used transductively.
    Test,
    /// Mixtures of training pairs.
    Mix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnlabeledSection {
    pub source: UnlabeledSource,
    pub pairs: usize,
    /// Mixing ratio for `classify` with `source = "mix"`.
    pub ratio: f64,
    /// Ratio grid of `fig2_sweep`.
    pub ratios: Vec<f64>,
}

impl Default for UnlabeledSection {
    fn default() -> Self {
        UnlabeledSection {
            source: UnlabeledSource::Test,
            pairs: 10_000,
            ratio: 0.5,
            ratios: vec![0.5, 0.7, 0.9, 0.95, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GanSection {
    /// Any of `ugan` (fixed `ugan_eps`) and `evolving` (`schedule.*`).
    pub modes: Vec<String>,
    pub ugan_eps: f64,
    pub checkpoints: bool,
}

impl Default for GanSection {
    fn default() -> Self {
        GanSection {
            modes: vec!["ugan".into(), "evolving".into()],
            ugan_eps: -crate::losses::DEFAULT_MARGIN,
            checkpoints: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub eps_set: Vec<f64>,
    pub evolve_period: u64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        let s = EvolutionSchedule::default();
        ScheduleSection {
            eps_set: s.eps_set,
            evolve_period: s.evolve_period,
        }
    }
}

/// Parsed run configuration. Every section is optional and defaults as
/// documented in the README.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_log_interval")]
    pub log_interval: u64,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub setting: SettingSection,
    #[serde(default)]
    pub unlabeled: UnlabeledSection,
    #[serde(default)]
    pub gan: GanSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_log_interval() -> u64 {
    crate::engine::DEFAULT_LOG_INTERVAL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GanMode {
    UGan,
    Evolving,
}

impl GanMode {
    pub fn name(self) -> &'static str {
        match self {
            GanMode::UGan => "ugan",
            GanMode::Evolving => "evolving",
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies `--seed` and `--out`, then revalidates.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        if let Some(s) = seed {
            self.seeds = vec![s];
        }
        if let Some(o) = out {
            self.output_dir = o;
        }
        self.validate()?;
        Ok(self)
    }

    /// SHA-256 of the canonical TOML rendering, output directory excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let text = toml::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        self.train_config(0)?.validate()?;
        self.validate_data()?;
        if self.model.noise_dim == 0 || self.model.hidden.contains(&0) || self.model.gen_hidden.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        for s in self.settings()? {
            self.setting_params(s).validate()?;
        }
        match self.experiment {
            Experiment::Classify => {
                if self.unlabeled.source == UnlabeledSource::Mix {
                    check_ratio(self.unlabeled.ratio)?;
                }
            }
            Experiment::Fig2Sweep => {
                if self.unlabeled.ratios.is_empty() {
                    return Err(Error::Config("unlabeled.ratios must not be empty".into()));
                }
                for &a in &self.unlabeled.ratios {
                    check_ratio(a)?;
                }
            }
            Experiment::Gan => {
                self.gan_modes()?;
                self.schedule()?;
                EvolutionSchedule::universum_only(self.gan.ugan_eps)?;
            }
        }
        if matches!(self.experiment, Experiment::Classify | Experiment::Fig2Sweep)
            && self.unlabeled.source == UnlabeledSource::Mix
            && self.unlabeled.pairs == 0
        {
            return Err(Error::Config("unlabeled.pairs must be positive".into()));
        }
        if self.experiment == Experiment::Fig2Sweep && self.unlabeled.pairs == 0 {
            return Err(Error::Config("unlabeled.pairs must be positive".into()));
        }
        Ok(())
    }

    fn validate_data(&self) -> Result<()> {
        let d = &self.data;
        if d.n_train == 0 {
            return Err(Error::Config("data.n_train must be positive".into()));
        }
        if d.n_test == Some(0) {
            return Err(Error::Config("data.n_test must be positive".into()));
        }
        match d.source {
            DataSource::Mixture => {
                if d.classes < 2 || d.dim < 2 || d.per_class == 0 || !(d.sep.is_finite() && d.sep >= 0.0) {
                    return Err(Error::Config(
                        "mixture needs classes >= 2, dim >= 2, per_class >= 1 and finite sep >= 0".into(),
                    ));
                }
                if d.n_train >= d.classes * d.per_class {
                    return Err(Error::Config(format!(
                        "data.n_train {} leaves no test rows out of {}",
                        d.n_train,
                        d.classes * d.per_class
                    )));
                }
            }
            DataSource::Idx => {
                if d.images.is_none() || d.labels.is_none() {
                    return Err(Error::Config("idx data needs data.images and data.labels".into()));
                }
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> Result<Vec<Setting>> {
        if self.experiment == Experiment::Fig2Sweep {
            return Ok(Setting::ALL.to_vec());
        }
        if self.setting.list.is_empty() {
            return Err(Error::Config("setting.list must not be empty".into()));
        }
        self.setting
            .list
            .iter()
            .map(|s| s.parse::<Setting>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn setting_params(&self, setting: Setting) -> SettingParams {
        SettingParams::for_setting(setting, self.setting.margin, self.train.C_U)
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let t = &self.train;
        Ok(TrainConfig {
            unlabeled_weight: t.C_U,
            gen: GenObjective {
                kind: t.gen_loss.parse::<GenLossKind>()?,
                gen_weight: t.C_gen,
                lambda: t.lambda,
            },
            batch_size: t.M,
            numiter: t.numiter,
            adam: AdamConfig {
                lr: t.lr,
                beta1: t.beta1,
                beta2: t.beta2,
                eps: t.adam_eps,
            },
            seed,
            log_interval: self.log_interval,
            tie_tol: t.tie_tol,
            eval_samples: t.eval_samples,
        })
    }

    pub fn schedule(&self) -> Result<EvolutionSchedule> {
        EvolutionSchedule::new(self.schedule.eps_set.clone(), self.schedule.evolve_period)
    }

    pub fn gan_modes(&self) -> Result<Vec<GanMode>> {
        if self.gan.modes.is_empty() {
            return Err(Error::Config("gan.modes must not be empty".into()));
        }
        let mut out = Vec::new();
        for m in &self.gan.modes {
            let mode = match m.as_str() {
                "ugan" => GanMode::UGan,
                "evolving" => GanMode::Evolving,
                other => {
                    return Err(Error::Config(format!(
                        "unknown gan mode {other:?} (expected ugan or evolving)"
                    )))
                }
            };
            if out.contains(&mode) {
                return Err(Error::Config(format!("gan mode {m} listed twice")));
            }
            out.push(mode);
        }
        Ok(out)
    }

    pub fn schedule_for(&self, mode: GanMode) -> Result<EvolutionSchedule> {
        match mode {
            GanMode::UGan => EvolutionSchedule::universum_only(self.gan.ugan_eps),
            GanMode::Evolving => self.schedule(),
        }
    }
}

fn check_ratio(a: f64) -> Result<()> {
    if (0.5..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(Error::Config(format!("mixing ratio {a} outside [0.5, 1]")))
    }
}
