//! Hard-deadline scheduling over a two-user erasure broadcast channel.
//!
//! Each slot the transmitter sends one packet that each receiver gets or
//! loses. User 1 needs `λ1` packets every `T1` slots, user 2 needs `λ2`
//! every `T2 = N·T1` slots. The crate computes the probability that some
//! deadline is missed under the optimal full-knowledge scheduler, checks it
//! against brute force and simulation, and runs two causal heuristics.

pub mod channel;
pub mod cutset;
pub mod error;
pub mod experiments;
pub mod outage;
pub mod scheduler;
pub mod validate;

pub use channel::{
    block_stats, enumerate_block_configs, enumerate_patterns, pattern_probability, sample_pattern,
    BlockStats, DeadlineConfig, ErasurePattern, ErasureProbs, Symbol,
};
pub use cutset::{
    block_capacities, equivalent_feasible, is_feasible, region_boundary, region_coefficients,
    BlockCapacities, RegionCoefficients,
};
pub use error::{Error, Result};
pub use outage::{
    brute_force_outage, build_cost_table, exact_outage, monte_carlo_outage, rate_solver,
    BruteForceMode, CostToGoTable, Method, OutageResult, RateSolution,
};
pub use scheduler::{
    current_csi_policy, greedy_full_csi, past_csi_policy, run_policy, run_policy_standalone,
    CsiMode, FrameOutcome, PolicyId, Schedule, Scheduler,
};

/// Version string embedded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
