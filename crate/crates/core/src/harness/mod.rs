//! Config loading, Monte Carlo trials and sweep output.

mod config;
mod sweep;
mod trial;

pub use config::{
    AdaptationSection, ChannelSection, CodeModeKind, ExperimentConfig, ExperimentSection, JammerSection,
    Orthogonality, ReceiverSection, JAMMER_MAX_DBM, JAMMER_MIN_DBM,
};
pub use sweep::{
    crossovers, derive_seed, ratio_with_stderr, run_sweep, run_sweep_with_jobs, summary, to_csv, Crossover,
    SweepRow, CSV_HEADER,
};
pub use trial::{mean_cascade_power, run_trial, Prepared, TrialResult};
