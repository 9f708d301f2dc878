//! Command-line front end: configuration, per-mode runs and output files.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Mode, RunConfig, ValidationErrors};
pub use run::run;

/// Process exit code for a failed run: 1 for bad input, 2 for runtime failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ValidationErrors>().is_some() {
        1
    } else {
        2
    }
}
