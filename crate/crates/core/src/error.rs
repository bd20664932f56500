use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Variants fall into three families which map to process exit codes:
/// configuration problems, domain/geometry failures, and numerical
/// non-convergence. See [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected a real-valued function, imaginary part {max_imag:.3e} exceeds tolerance")]
    NotReal { max_imag: f64 },

    #[error("boundary data is not holomorphic: relative negative-mode content {content:.3e}")]
    NotHolomorphic { content: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("manifold is not generic at the base point (rank of r_z is {rank}, expected {expected})")]
    NotGeneric { rank: usize, expected: usize },

    #[error("point is off the manifold by {residual:.3e}")]
    OffManifold { residual: f64 },

    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    Contraction { residual: f64, iterations: usize },

    #[error("iterate left the trust region (sup norm {norm:.3e} > {radius})")]
    TrustRegion { norm: f64, radius: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("no good disc found within the search budget; closest approach to N was {closest:.3e}")]
    NoGoodDisc { closest: f64 },

    #[error("factorization outside the contraction region: sup |m - I| = {distance:.3e}")]
    OutOfContraction { distance: f64 },

    #[error("nu-factorization did not converge (residual trace {trace:?})")]
    FactorizationFailure { trace: Vec<f64> },

    #[error("parameter slice has {have} directions, at least {need} are required")]
    InsufficientSlice { have: usize, need: usize },

    #[error("direction cloud is degenerate: rank {rank} < {expected}")]
    ERank { rank: usize, expected: usize },

    #[error("disc is not embedded: lower bi-Lipschitz constant {c:.3e}")]
    NonEmbedded { c: f64 },

    #[error("germs disagree on an overlap by {disagreement:.3e} between centers {a} and {b}")]
    Monodromy { disagreement: f64, a: usize, b: usize },

    #[error("isotopy blocked at s = {s:.6}, nearest singular point {nearest:?}")]
    IsotopyBlocked { s: f64, nearest: Vec<f64> },

    #[error("boundary values do not extend holomorphically: negative-mode content {content:.3e}")]
    NonExtendible { content: f64 },

    #[error("quadrature did not converge: refinement changed the value by {difference:.3e}")]
    Quadrature { difference: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// 1 for configuration and I/O, 3 for convergence failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::Toml(_) => 1,
            Error::Contraction { .. }
            | Error::TrustRegion { .. }
            | Error::FactorizationFailure { .. }
            | Error::OutOfContraction { .. }
            | Error::Quadrature { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
