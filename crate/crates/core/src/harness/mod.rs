//! Experiment driver: configured runs, decay measurements, estimate reports
//! and persisted results.

mod config;
mod estimates;
mod runs;
mod series;
mod snapshot;
mod studies;

pub use config::{place_random_blobs, ExperimentConfig, Mode, RandomBlobs};
pub use estimates::{
    divergence_data_norm, divergence_data_vorticity, divergence_data_vorticity_at, estimates_with_harmonic,
    verify_semigroup_estimates, EstimateReport, PairEstimate, DIVERGENCE_MATRIX, FREE_HEAT_TIME, TAIL_START,
};
pub use runs::{
    harmonic_trajectory, measure_against_oseen, policy_for, run_linear, run_linear_oseen, run_theorem_main, simulate,
    simulate_config, weak_l2_checkpoint, StepRecord, Trajectory, WeakL2Table,
};
pub use series::{
    decay_weight, fit_points, fit_rate, oseen_tail_bound, read_csv, write_csv, DecayRow, DecaySeries, RateFit,
    CSV_HEADER,
};
pub use snapshot::{Snapshot, MAGIC};
pub use studies::{alpha_scaling_study, refined, rescaling_check, AlphaScalingRow, RescalingReport, STARTUP_EXCLUSION};
