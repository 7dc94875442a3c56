//! Monte Carlo BLER sweeps, the graph-reset ablation, frozen-channel charts
//! and the repetition/polar equivalence check.

mod config;
mod equiv;
mod fcc;
mod seed;
mod stats;
mod sweep;

pub use config::{parse_ebn0, parse_pairs, Design, PhasePolicy, SimConfig};
pub use equiv::{check_equivalence, verify_equivalence, EquivalenceReport, EXHAUSTIVE_LIMIT, SAMPLED_MESSAGES};
pub use fcc::{emit_fcc, fcc_csv, fcc_pgm};
pub use seed::{derive_seed, Role};
pub use stats::{wilson95, wilson_interval};
pub use sweep::{
    run_reset_ablation, run_sweep, to_csv, AblationResult, BlerRecord, SimContext, TrialOutcome,
    CSV_HEADER,
};
