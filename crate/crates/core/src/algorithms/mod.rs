//! The subgradient method, projected SGD and projected SGD with heavy-ball momentum,
//! with their step-size schedules.

mod runner;
mod schedule;

pub use runner::{
    postprocess_minibatch, postprocess_with_batch, run, run_psgd, run_psgdm, run_sm, Checkpoints, RunOptions, RunOutcome,
};
pub use schedule::{make_schedule, make_schedule_from_gap, post_batch_size, Method, Schedule, TheoremTag};
