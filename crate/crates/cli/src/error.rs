use evp_core::boundedness::BoundednessError;
use evp_core::evp::EvpError;
use evp_core::geometry::GeometryError;
use evp_core::scalarization::ScalarizationError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const INTERNAL: i32 = 3;
    pub const HYPOTHESIS: i32 = 4;
    pub const SELF_CHECK: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("self-verification failed: {0}")]
    SelfCheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::Internal(_) => exit::INTERNAL,
            CliError::Hypothesis(_) => exit::HYPOTHESIS,
            CliError::SelfCheck(_) => exit::SELF_CHECK,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Lp(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ScalarizationError> for CliError {
    fn from(e: ScalarizationError) -> Self {
        match e {
            ScalarizationError::Geometry(g) => g.into(),
            ScalarizationError::Internal(_)
            | ScalarizationError::BracketExhausted(_)
            | ScalarizationError::InfiniteValue => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<BoundednessError> for CliError {
    fn from(e: BoundednessError) -> Self {
        match e {
            BoundednessError::Geometry(g) => g.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<EvpError> for CliError {
    fn from(e: EvpError) -> Self {
        match e {
            EvpError::Scalarization(s) => s.into(),
            EvpError::HypothesisViolated(_) => CliError::Hypothesis(e.to_string()),
            EvpError::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
