//! U-GAN objectives, the `eps` schedule, Adam, and the training loops.

mod adam;
mod log;
mod objectives;
mod schedule;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use log::{fmt4, MetricsLog, MetricsRecord, CSV_COLUMNS};
pub use objectives::{
    disc_loss_ugan, feature_matching_loss, gen_loss, GenLossKind, GenObjective, DEFAULT_GEN_WEIGHT, DEFAULT_LAMBDA,
};
pub use schedule::{EvolutionSchedule, DEFAULT_EPS_SET, DEFAULT_EVOLVE_PERIOD};
pub use train::{
    evaluate, evaluate_generated, train_classifier, train_evolving_gan, GeneratedStats, TrainConfig,
    DEFAULT_BATCH_SIZE, DEFAULT_EVAL_SAMPLES, DEFAULT_LOG_INTERVAL,
};
