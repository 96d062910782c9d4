//! Experiment orchestration: config parsing, the three experiments and
//! their CSV output.

mod config;
mod run;

pub use config::{
    DataConfig, DataSource, Experiment, GanMode, GanSection, ModelConfig, RunConfig, ScheduleSection, SettingSection,
    TrainSection, UnlabeledSection, UnlabeledSource,
};
pub use run::{exit_code, init_disc, init_gen, mean, run, run_dataset, run_classify, run_fig2_sweep, run_gan, std_dev, Aggregate, RunOutput};
