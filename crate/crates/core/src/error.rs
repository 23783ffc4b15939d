use thiserror::Error;

/// Errors raised by the dephasing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// A qubit Bloch vector (or derived quantity) violates the state invariants.
    #[error("invalid qubit state: {0}")]
    InvalidState(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: estimated error {achieved:.3e} > requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// A kernel value is not representable in double precision.
    #[error("kernel {kernel} overflows at T = {temperature} (omega_c/T = {ratio:.1}); use a threshold comparison")]
    Overflow {
        kernel: &'static str,
        temperature: f64,
        ratio: f64,
    },

    /// The accumulated decoherence exponent never reaches one.
    #[error("no decoherence: Gamma({t_max:e}) = {gamma:.3e} < 1")]
    NoDecoherence { t_max: f64, gamma: f64 },

    /// Both the separability and the entanglement test fired for the same point.
    #[error("criteria co-fire at T = {temperature}, t = {time}: S = {s:.6e} <= {sep_bound:.6e} but E > {ent_bound:.6e}")]
    Inconsistency {
        temperature: f64,
        time: f64,
        s: f64,
        sep_bound: f64,
        ent_bound: f64,
    },

    /// Fock truncation is too small for the requested mode or evolution.
    #[error("Fock truncation N = {n} too small: {detail}")]
    Truncation { n: usize, detail: String },

    /// The Hermitian eigensolver did not converge.
    #[error("eigensolver failed for a {0}x{0} matrix")]
    Eigensolver(usize),

    /// A closed-form kernel diverges (vanishing thermal occupation).
    #[error("divergent kernel: {0}")]
    Divergent(String),

    /// Failure at one point of a grid scan.
    #[error("at T = {temperature}, t = {time}: {source}")]
    AtGridPoint {
        temperature: f64,
        time: f64,
        source: Box<Error>,
    },

    /// Bad configuration value.
    #[error("invalid configuration `{field}`: {detail}")]
    Config { field: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: &'static str, detail: impl Into<String>) -> Self {
        Error::Config {
            field,
            detail: detail.into(),
        }
    }

    /// The innermost error, looking through grid-point wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtGridPoint { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors that stem from invalid inputs rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Domain { .. } | Error::InvalidState(_) | Error::Config { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
