//! Batch driver for `mflab-core`: scenario files in, CSV reports and one
//! summary line per scenario out.

pub mod error;
pub mod fit;
pub mod run;
pub mod scenario;

pub use error::{Error, Result};
pub use fit::{fit_rate, RateEstimate};
pub use run::{run_file, run_scenario, RunOptions, Summary};
pub use scenario::{Kind, Scenario};
