use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a physical law or parameter range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A cell average of the section area became nonpositive during an update.
    #[error("nonpositive section area {area} in cell {cell} at t = {t}")]
    NonPositiveArea { cell: usize, area: f64, t: f64 },

    /// The relaxation speed does not dominate the characteristic speeds.
    #[error("subcharacteristic condition violated: lambda = {lambda}, required {required}")]
    Subcharacteristic { lambda: f64, required: f64 },

    /// Zero pivot during tridiagonal elimination.
    #[error("singular pivot in tridiagonal solve at row {0}")]
    SingularPivot(usize),

    /// A scalar or polynomial equation had no admissible solution.
    #[error("no admissible root: {0}")]
    NoRoot(String),

    /// Newton iteration failed to reach the requested residual.
    #[error("Newton iteration did not converge (residual history {history:?})")]
    NewtonDiverged { history: Vec<f64> },

    /// A solved coupling or boundary state violates its defining equations.
    #[error("residual {residual:e} exceeds tolerance {tolerance:e} ({what})")]
    Residual {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    /// Invalid network configuration.
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    /// Grids of two records cannot be compared.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    /// A failure attributed to a network component at a given time.
    #[error("{component} at t = {t}: {source}")]
    At {
        component: String,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn at(self, component: impl Into<String>, t: f64) -> Self {
        Error::At {
            component: component.into(),
            t,
            source: Box::new(self),
        }
    }

    /// True for configuration and validation failures, false for solver failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Domain(_) | Error::GridMismatch(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
