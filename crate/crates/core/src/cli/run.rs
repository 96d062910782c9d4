use std::fs;
use std::io::Write;
use std::path::PathBuf;

use super::config::{DataSource, Experiment, RunConfig, UnlabeledSource};
use crate::data::{gen_gaussian_mixture, load_idx, mix_universum, Dataset};
use crate::engine::{fmt4, train_classifier, train_evolving_gan, MetricsLog};
use crate::error::{Error, Result};
use crate::losses::{LabeledBatch, Setting, UnlabeledBatch};
use crate::models::{save_checkpoint, Checkpoint, Discriminator, Generator};
use crate::rng::substream;

const DISC_INIT_STREAM: u64 = 10;
const GEN_INIT_STREAM: u64 = 11;

/// Final accuracies (and, for GAN runs, generated-label entropies) of one
/// group of runs across seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub group: String,
    pub ratio: Option<f64>,
    pub seeds: Vec<u64>,
    pub test_acc: Vec<f64>,
    pub entropy_bits: Vec<f64>,
}

impl Aggregate {
    fn new(group: &str, ratio: Option<f64>) -> Self {
        Aggregate {
            group: group.into(),
            ratio,
            seeds: vec![],
            test_acc: vec![],
            entropy_bits: vec![],
        }
    }

    pub fn mean_acc(&self) -> f64 {
        mean(&self.test_acc)
    }

    pub fn std_acc(&self) -> f64 {
        std_dev(&self.test_acc)
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Output of one experiment: written files and per-group aggregates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub aggregates: Vec<Aggregate>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.experiment {
        Experiment::Classify => run_classify(cfg),
        Experiment::Fig2Sweep => run_fig2_sweep(cfg),
        Experiment::Gan => run_gan(cfg),
    }
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    hash: String,
    out: RunOutput,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
        Ok(Writer {
            cfg,
            hash: cfg.hash(),
            out: RunOutput::default(),
        })
    }

    fn comment(&self, seeds: &[u64]) -> String {
        let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
        format!(
            "config_sha256={} seed={} version={}",
            self.hash,
            seeds.join(";"),
            env!("CARGO_PKG_VERSION")
        )
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn write(&mut self, name: &str, seeds: &[u64], body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let path = self.path(name);
        let mut buf = format!("# {}\n", self.comment(seeds)).into_bytes();
        body(&mut buf).map_err(|e| Error::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        self.out.files.push(path);
        Ok(())
    }

    fn write_log(&mut self, name: &str, seed: u64, log: &MetricsLog) -> Result<()> {
        let path = self.path(name);
        let mut buf = Vec::new();
        log.write_csv(&mut buf, &[self.comment(&[seed])])
            .map_err(|e| Error::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        self.out.files.push(path);
        Ok(())
    }

    fn write_aggregate(&mut self, name: &str, with_ratio: bool, with_entropy: bool) -> Result<()> {
        let seeds = self.cfg.seeds.clone();
        let aggs = self.out.aggregates.clone();
        self.write(name, &seeds, |w| {
            let mut header = vec![];
            if with_ratio {
                header.push("ratio");
            }
            header.extend(["group", "seeds", "mean_test_acc", "std_test_acc"]);
            if with_entropy {
                header.push("mean_entropy_bits");
            }
            writeln!(w, "{}", header.join(","))?;
            for a in &aggs {
                let mut f = vec![];
                if with_ratio {
                    f.push(fmt4(a.ratio.unwrap_or(f64::NAN)));
                }
                f.extend([
                    a.group.clone(),
                    a.seeds.len().to_string(),
                    fmt4(a.mean_acc()),
                    fmt4(a.std_acc()),
                ]);
                if with_entropy {
                    f.push(fmt4(mean(&a.entropy_bits)));
                }
                writeln!(w, "{}", f.join(","))?;
            }
            Ok(())
        })
    }
}

/// Base dataset (before splitting); IDX files are read once per run.
fn base_dataset(cfg: &RunConfig, seed: u64) -> Result<Dataset> {
    let d = &cfg.data;
    match d.source {
        DataSource::Mixture => gen_gaussian_mixture(d.classes, d.per_class, d.dim, d.sep, seed),
        DataSource::Idx => {
            let (Some(images), Some(labels)) = (&d.images, &d.labels) else {
                return Err(Error::Config("idx data needs data.images and data.labels".into()));
            };
            load_idx(images, labels)
        }
    }
}

struct DataCache {
    idx: Option<Dataset>,
}

impl DataCache {
    fn new(cfg: &RunConfig) -> Result<Self> {
        let idx = match cfg.data.source {
            DataSource::Idx => Some(base_dataset(cfg, 0)?),
            DataSource::Mixture => None,
        };
        Ok(DataCache { idx })
    }

    /// Split dataset for `seed`, test rows capped at `data.n_test`.
    fn get(&self, cfg: &RunConfig, seed: u64) -> Result<Dataset> {
        let base = match &self.idx {
            Some(ds) => ds.clone(),
            None => base_dataset(cfg, seed)?,
        };
        if cfg.data.n_train >= base.len() {
            return Err(Error::Consistency(format!(
                "data.n_train {} leaves no test rows out of {}",
                cfg.data.n_train,
                base.len()
            )));
        }
        let mut ds = base.split(cfg.data.n_train, seed)?;
        if let Some(n) = cfg.data.n_test {
            ds.test.truncate(n);
        }
        Ok(ds)
    }
}

/// Dataset of run `seed`, split and capped exactly as the experiments do.
pub fn run_dataset(cfg: &RunConfig, seed: u64) -> Result<Dataset> {
    DataCache::new(cfg)?.get(cfg, seed)
}

/// Discriminator initialization used for run `seed`.
pub fn init_disc(cfg: &RunConfig, ds: &Dataset, seed: u64) -> Discriminator {
    Discriminator::mlp(ds.dim(), &cfg.model.hidden, ds.classes, &mut substream(seed, DISC_INIT_STREAM))
}

/// Generator initialization used for run `seed`.
pub fn init_gen(cfg: &RunConfig, ds: &Dataset, seed: u64) -> Generator {
    Generator::mlp(
        cfg.model.noise_dim,
        &cfg.model.gen_hidden,
        ds.dim(),
        &mut substream(seed, GEN_INIT_STREAM),
    )
}

fn empty_unlabeled(dim: usize) -> UnlabeledBatch {
    UnlabeledBatch::new(crate::tensor::Matrix::zeros(0, dim))
}

struct ClassifierRun {
    log: MetricsLog,
    train_acc: f64,
    test_acc: f64,
    contradiction_rate: f64,
}

fn classify_once(
    cfg: &RunConfig,
    setting: Setting,
    ds: &Dataset,
    train: &LabeledBatch,
    test: &LabeledBatch,
    unlabeled: &UnlabeledBatch,
    seed: u64,
) -> Result<ClassifierRun> {
    let tc = cfg.train_config(seed)?;
    let params = cfg.setting_params(setting);
    let (_, log) = train_classifier(&params, train, unlabeled, Some(test), &tc, init_disc(cfg, ds, seed))?;
    let last = log.last().ok_or_else(|| Error::Consistency("empty training log".into()))?;
    Ok(ClassifierRun {
        train_acc: last.train_acc,
        test_acc: last.test_acc.unwrap_or(f64::NAN),
        contradiction_rate: last.contradiction_rate.unwrap_or(f64::NAN),
        log,
    })
}

/// One model per (setting, seed). Writes a metrics log per run,
/// `classify_seeds.csv` and `classify_aggregate.csv`.
pub fn run_classify(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let settings = cfg.settings()?;
    let cache = DataCache::new(cfg)?;
    let mut w = Writer::new(cfg)?;
    let mut aggs: Vec<Aggregate> = settings.iter().map(|s| Aggregate::new(s.name(), None)).collect();
    let mut rows = vec![];
    for &seed in &cfg.seeds {
        let ds = cache.get(cfg, seed)?;
        let train = ds.train_batch();
        let test = ds.test_batch();
        let unlabeled = match cfg.unlabeled.source {
            UnlabeledSource::Test => UnlabeledBatch::new(test.features.clone()),
            UnlabeledSource::Mix => mix_universum(&ds, cfg.unlabeled.pairs, cfg.unlabeled.ratio, seed)?,
        };
        for (k, &setting) in settings.iter().enumerate() {
            let r = classify_once(cfg, setting, &ds, &train, &test, &unlabeled, seed)?;
            w.write_log(&format!("classify_{}_seed{seed}.csv", setting.name()), seed, &r.log)?;
            rows.push(format!(
                "{},{seed},{},{},{}",
                setting.name(),
                fmt4(r.train_acc),
                fmt4(r.test_acc),
                fmt4(r.contradiction_rate)
            ));
            aggs[k].seeds.push(seed);
            aggs[k].test_acc.push(r.test_acc);
        }
    }
    let seeds = cfg.seeds.clone();
    w.write("classify_seeds.csv", &seeds, |f| {
        writeln!(f, "setting,seed,train_acc,test_acc,contradiction_rate")?;
        rows.iter().try_for_each(|r| writeln!(f, "{r}"))
    })?;
    w.out.aggregates = aggs;
    w.write_aggregate("classify_aggregate.csv", false, false)?;
    Ok(w.out)
}

/// Accuracy of every setting on mixed-pair unlabeled data over the ratio
/// grid. Writes `fig2_seeds.csv` and `fig2_aggregate.csv`
/// (`|ratios| x 3` rows).
pub fn run_fig2_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let cache = DataCache::new(cfg)?;
    let mut w = Writer::new(cfg)?;
    let ratios = &cfg.unlabeled.ratios;
    let mut aggs = vec![];
    for &a in ratios {
        for s in Setting::ALL {
            aggs.push(Aggregate::new(s.name(), Some(a)));
        }
    }
    let mut rows = vec![];
    for &seed in &cfg.seeds {
        let ds = cache.get(cfg, seed)?;
        let train = ds.train_batch();
        let test = ds.test_batch();
        // the inductive model never sees unlabeled rows, so one run per seed
        let inductive = classify_once(cfg, Setting::Inductive, &ds, &train, &test, &empty_unlabeled(ds.dim()), seed)?;
        for (ri, &a) in ratios.iter().enumerate() {
            let unlabeled = mix_universum(&ds, cfg.unlabeled.pairs, a, seed)?;
            for (si, s) in Setting::ALL.into_iter().enumerate() {
                let acc = if s == Setting::Inductive {
                    inductive.test_acc
                } else {
                    classify_once(cfg, s, &ds, &train, &test, &unlabeled, seed)?.test_acc
                };
                rows.push(format!("{},{},{seed},{}", fmt4(a), s.name(), fmt4(acc)));
                let agg = &mut aggs[ri * Setting::ALL.len() + si];
                agg.seeds.push(seed);
                agg.test_acc.push(acc);
            }
        }
    }
    let seeds = cfg.seeds.clone();
    w.write("fig2_seeds.csv", &seeds, |f| {
        writeln!(f, "ratio,setting,seed,test_acc")?;
        rows.iter().try_for_each(|r| writeln!(f, "{r}"))
    })?;
    w.out.aggregates = aggs;
    w.write_aggregate("fig2_aggregate.csv", true, false)?;
    Ok(w.out)
}

/// GAN training per (mode, seed). Writes `gan_<mode>_seed<n>.csv` metric
/// logs, optional checkpoints and `gan_aggregate.csv`.
pub fn run_gan(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let modes = cfg.gan_modes()?;
    let cache = DataCache::new(cfg)?;
    let mut w = Writer::new(cfg)?;
    let mut aggs: Vec<Aggregate> = modes.iter().map(|m| Aggregate::new(m.name(), None)).collect();
    for &seed in &cfg.seeds {
        let ds = cache.get(cfg, seed)?;
        let train = ds.train_batch();
        let test = ds.test_batch();
        let tc = cfg.train_config(seed)?;
        for (k, &mode) in modes.iter().enumerate() {
            let schedule = cfg.schedule_for(mode)?;
            let (disc, gen, log) = train_evolving_gan(
                &schedule,
                &tc,
                &train,
                Some(&test),
                init_disc(cfg, &ds, seed),
                init_gen(cfg, &ds, seed),
            )?;
            let stem = format!("gan_{}_seed{seed}", mode.name());
            w.write_log(&format!("{stem}.csv"), seed, &log)?;
            if cfg.gan.checkpoints {
                for (suffix, ckpt) in [("disc", Checkpoint::Discriminator(disc)), ("gen", Checkpoint::Generator(gen))] {
                    let path = w.path(&format!("{stem}_{suffix}.ckpt"));
                    save_checkpoint(&path, &ckpt)?;
                    w.out.files.push(path);
                }
            }
            let last = log.last().ok_or_else(|| Error::Consistency("empty training log".into()))?;
            aggs[k].seeds.push(seed);
            aggs[k].test_acc.push(last.test_acc.unwrap_or(f64::NAN));
            aggs[k].entropy_bits.push(last.entropy_bits.unwrap_or(0.0));
        }
    }
    w.out.aggregates = aggs;
    w.write_aggregate("gan_aggregate.csv", false, true)?;
    Ok(w.out)
}

/// Process exit code for an error: 2 configuration, 3 data, 4 numeric.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Shape { .. } | Error::Domain(_) => 2,
        Error::Io { .. } | Error::Format { .. } | Error::Consistency(_) => 3,
        Error::Numeric(_) => 4,
    }
}
