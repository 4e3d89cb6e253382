use thiserror::Error;

/// Errors raised by the library.
///
/// The three kinds map onto the CLI exit statuses: input errors (2),
/// resource-cap errors (3) and internal errors (1).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("resource limit exceeded: {what} needs {needed}, cap is {cap}")]
    Resource {
        what: &'static str,
        needed: String,
        cap: usize,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub(crate) fn resource(what: &'static str, needed: impl ToString, cap: usize) -> Self {
        Error::Resource {
            what,
            needed: needed.to_string(),
            cap,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// `base^exp`, saturating at `usize::MAX`.
pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Fails with a resource error when `base^exp` exceeds `cap`.
pub(crate) fn ensure_pow_within(
    what: &'static str,
    base: usize,
    exp: usize,
    cap: usize,
) -> Result<usize> {
    match checked_pow(base, exp) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::resource(what, n, cap)),
        None => Err(Error::resource(what, format!("{base}^{exp}"), cap)),
    }
}
