//! Full-batch transductive training: splits, Adam, early stopping, metrics
//! and batch runners for grid searches and ablations.

mod adam;
mod grid;
mod metrics;
mod runner;
mod split;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use grid::{
    ablation_sweep, grid_search, run_cells, write_results_csv, write_sweep_csv, Experiment,
    GridOutcome, GridSpec, ResultRow, RunOptions, SweepRow, SweepSpec,
};
pub use metrics::{accuracy, argmax, format_mean_std, mean_std};
pub use runner::{decays, train, train_from, RunResult, RunStatus, TrainConfig};
pub use split::{make_split, Split, SplitProtocol};
