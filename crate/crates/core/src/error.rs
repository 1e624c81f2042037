use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid tuning parameters: {0}")]
    Config(&'static str),
    #[error("comparison mode requested but the key adapter has no less-than")]
    MissingOrder,
    #[error("could not allocate scratch space for {0} records")]
    Allocation(usize),
}
