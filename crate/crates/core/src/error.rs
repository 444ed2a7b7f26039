use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure in {context}: {message}")]
    Numerics { context: &'static str, message: String },

    #[error("simulation failure: {0}")]
    Sim(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerics(context: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerics { context, message: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
