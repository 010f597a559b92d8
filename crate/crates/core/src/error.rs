use alloc::string::String;

/// Errors shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("capacity exceeded: {what} needs {needed}, cap is {cap}")]
    Capacity {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("observables {first} and {second} do not commute (commutator max-norm {norm:e})")]
    CommutationViolation { first: usize, second: usize, norm: f64 },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("source unavailable: {0}")]
    Unavailable(String),
}

pub type Result<T> = core::result::Result<T, Error>;

#[macro_export]
#[doc(hidden)]
macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(::alloc::format!($($arg)*))
    };
}
