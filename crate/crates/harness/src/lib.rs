//! Instance generation, Monte Carlo experiments and file formats for the `spip`
//! command line.

pub mod experiment;
pub mod generate;
pub mod io;
pub mod seeds;

use spip_core::adapters::AdapterError;
use spip_core::instance::InstanceError;
use spip_core::sparsifier::SparsifyError;
use spip_core::strategies::StrategyError;
use spip_core::witness::WitnessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl HarnessError {
    /// Process exit code for the category.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse(_) | HarnessError::Invalid(_) => 3,
            HarnessError::Io(_) => 4,
            HarnessError::Compute(_) => 5,
        }
    }
}

impl From<InstanceError> for HarnessError {
    fn from(e: InstanceError) -> Self {
        HarnessError::Invalid(e.to_string())
    }
}

macro_rules! compute_error {
    ($($t:ty),*) => {$(
        impl From<$t> for HarnessError {
            fn from(e: $t) -> Self {
                HarnessError::Compute(e.to_string())
            }
        }
    )*};
}

compute_error!(AdapterError, StrategyError, SparsifyError, WitnessError);
