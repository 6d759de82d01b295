//! Scenario configuration, seeded ray generation and the experiment runners
//! behind the command-line tool.

mod config;
mod experiments;
mod result;
mod scenario;
mod stats;

pub use config::{Preset, ScenarioConfig};
pub use experiments::{
    run_linksim_sweep, run_prop_suite, run_schedule, run_spreads, run_sumrate_sweep, schedule_sweep, SweepPoint,
    DECORRELATION_ARRAY, ENVELOPE_BANDWIDTH_HZ, ENVELOPE_GRID, ENVELOPE_LADDER, ONE_RING_BEAMS, ONE_RING_RADIUS_M,
    ONE_RING_RAYS, PROP4_BEAMS, RATIO_BAR_5DB,
};
pub use result::{Cell, Check, ExperimentResult, Table};
pub use scenario::{derive_seed, drop_uts, generate_cluster_rays, rms_delay_spread};
pub use stats::{decorrelation_stats, envelope_variation, DecorrelationStats};
