use thiserror::Error;

/// Errors raised by the lab.
///
/// `Config` is for bad inputs (model files, flags, out of range indices);
/// everything else means the numerics could not produce a trustworthy value.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("x = {x} is at or outside a band edge (-discr = {neg_discr:e})")]
    BandEdge { x: f64, neg_discr: f64 },

    #[error("x = {x} is not inside the band set")]
    NotInBand { x: f64 },

    #[error("polynomial overflow at degree {degree}")]
    Overflow { degree: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        LabError::Numerical(msg.into())
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
