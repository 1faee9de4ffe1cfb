//! Detection, delay estimation, orthogonalisation and classification.

mod classify;
mod correlation;
mod detect;
mod spatial;
mod temporal;

pub use classify::{
    classify_jammer, classify_with_pilot, equalize, estimate_jam_gain, ls_gain, similarity_ratio,
    ClassifierThresholds, JammerClass, SimilarityMetrics,
};
pub use correlation::{cross_correlate, cross_correlate_direct, estimate_delay, estimate_delay_in, CorrelationResult};
pub use detect::{detect_jamming, estimate_onset, update_cycle, CycleTracker};
pub use spatial::{
    estimate_aoa, estimate_aoa_with, sample_covariance, separate_spatial, separation_limit, AoaOptions, SpatialSplit,
};
pub use temporal::{partition_temporal, TransmitSchedule};
