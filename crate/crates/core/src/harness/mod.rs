//! Config-driven experiment runner: single runs, diagnostics over stored
//! runs, and resumable parameter sweeps.

mod config;
mod diagnose;
mod run;
mod sweep;

pub use config::{EnvConfig, ExperimentConfig, ExplorationKind, LearnerKind};
pub use diagnose::{diagnose, diagnose_to_dir, DiagnosticsDocument, DIAGNOSTICS_FILE, DIAGNOSTICS_SCHEMA};
pub use run::{
    config_hash, execute, nrpi_setup, read_policies, read_summary, run_to_dir, ComparatorInfo, ExampleLine,
    NrpiSetup, PolicyDocument, RunArtifacts, SummaryDocument, EXAMPLES_FILE, ITERATIONS_FILE, POLICIES_FILE,
    SUMMARY_FILE, TIMING_FILE,
};
pub use sweep::{sweep, Grid, SweepConfig, SweepOutcome, SweepRow, CELLS_DIR, SWEEP_FILE};

use crate::error::Error;

/// Process exit status for scripting.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INCOMPATIBLE: i32 = 3;
    pub const MISSING_DATA: i32 = 4;
}

/// Maps an error to its exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) => exit::CONFIG,
        Error::Incompatible(_) => exit::INCOMPATIBLE,
        Error::MissingData(_) => exit::MISSING_DATA,
        _ => exit::FAILURE,
    }
}
