use crate::quad::QuadError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter `{name}` out of domain: {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown material preset `{name}` (known: {})", known.join(", "))]
    UnknownPreset { name: String, known: Vec<String> },

    #[error(
        "degenerate Bohr radii (sigma = {sigma:e} below threshold {threshold:e}); \
         use the equal-radii branch"
    )]
    Degenerate { sigma: f64, threshold: f64 },

    #[error(transparent)]
    Quadrature(#[from] QuadError),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
