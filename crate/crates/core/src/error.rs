use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("item {item} out of range for a universe of {universe} items")]
    ItemOutOfRange { item: usize, universe: usize },
    #[error("item {0} appears more than once in a query set")]
    DuplicateItem(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }
}
