use qthermal::bounds::FunctionalError;
use qthermal::channel::ChannelError;
use qthermal::cnn::CnnError;
use qthermal::gaussian::GaussianError;
use qthermal::sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::Gaussian(GaussianError::NoConvergence) => CliError::NonConvergence(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FunctionalError> for CliError {
    fn from(e: FunctionalError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Idx(e) => CliError::Data(e.to_string()),
            SimError::Channel(e) => e.into(),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CnnError> for CliError {
    fn from(e: CnnError) -> Self {
        match e {
            CnnError::Io(_) | CnnError::Checkpoint(_) => CliError::Data(e.to_string()),
            CnnError::Sim(e) => e.into(),
            CnnError::NonFiniteLoss => CliError::NonConvergence(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qthermal::sim::idx::IdxError;

    #[test]
    fn exit_codes_by_cause() {
        assert_eq!(
            CliError::from(ChannelError::Gaussian(GaussianError::NoConvergence)).exit_code(),
            4
        );
        assert_eq!(CliError::from(ChannelError::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(SimError::Idx(IdxError::BadMagic(7))).exit_code(), 3);
        assert_eq!(CliError::from(CnnError::Checkpoint("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(CnnError::NonFiniteLoss).exit_code(), 4);
        assert_eq!(CliError::from(SimError::InvalidNoise(0.7)).exit_code(), 2);
    }
}
