use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid length: expected {expected}, got {actual} ({context})")]
    Length {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{0}")]
    InvalidInput(String),
    #[error("burst profile {modulation:?} rate {rate} is not one of the six supported profiles")]
    UnsupportedProfile {
        modulation: crate::params::Modulation,
        rate: crate::params::CodeRate,
    },
    #[error("singular channel matrix with zero noise variance")]
    SingularChannel,
    #[error("no STBC/SM crossover found in the SNR grid")]
    NoCrossover,
    #[error("incomplete sweep: {0}")]
    IncompleteSweep(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Length {
            context,
            expected,
            actual,
        })
    }
}
