use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violates the operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method ran out of budget before reaching its tolerance.
    /// `best` is the last estimate it produced.
    #[error("accuracy error: {what} (best estimate {best:e}, error estimate {err:e})")]
    Accuracy { what: String, best: f64, err: f64 },
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err($crate::Error::Domain(alloc::format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
