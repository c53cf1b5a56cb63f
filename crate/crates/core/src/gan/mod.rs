//! Generator/discriminator pair, the train-with-generation loop and its
//! quota schedules, checkpoints, and the schedule grid search.

mod checkpoint;
mod config;
mod nets;
mod schedule;
mod train;
mod tune;

pub use checkpoint::{rng_for, Checkpoint, RngState, CHECKPOINT_VERSION, SAMPLE_STREAM, TRAIN_STREAM};
pub use config::GanConfig;
pub use nets::{
    apply_heads, discriminator_loss_and_grads, generator_forward, generator_loss_and_grads, heads_backward,
    init_networks, sample_noise, Gan, INIT_STD,
};
pub use schedule::{
    build_schedule, build_schedule_with_ratio, geometric_sum, solve_common_ratio, GenerationMode,
    GenerationSchedule,
};
pub use train::{sample_rows, train_with_callback, train_with_generation, EpochRecord, TrainOutput};
pub use tune::{run_tune_cell, tune_schedule, TuneCell, TuneResult};
