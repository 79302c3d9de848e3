use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Two virtual coordinates came within the safe radius. Along exact
    /// trajectories this cannot happen, so it means the step size is too
    /// coarse.
    #[error("{}", describe_separation(.pair, *.separation, *.safe_radius, .time))]
    SeparationViolation {
        pair: Option<(usize, usize)>,
        separation: f64,
        safe_radius: f64,
        time: Option<f64>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub(crate) fn separation(separation: f64, safe_radius: f64) -> Self {
        Error::SeparationViolation {
            pair: None,
            separation,
            safe_radius,
            time: None,
        }
    }
}

fn describe_separation(
    pair: &Option<(usize, usize)>,
    separation: f64,
    safe_radius: f64,
    time: &Option<f64>,
) -> String {
    let mut s = String::from("separation violation");
    if let Some((i, k)) = pair {
        s.push_str(&format!(" between robots {i} and {k}"));
    }
    if let Some(t) = time {
        s.push_str(&format!(" at t={t}"));
    }
    s.push_str(&format!(
        ": |Omega_i - Omega_k| = {separation} <= safe radius {safe_radius} (reduce dt)"
    ));
    s
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
