use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate tangent at t = {t} on component {component}")]
    DegenerateTangent { component: usize, t: f64 },

    #[error("quadrature did not converge: requested {requested:e}, achieved {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("root not bracketed on [{lo}, {hi}]: g = ({g_lo:e}, {g_hi:e})")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("mesh size h = {h} too large for this geometry; try h <= {suggested}")]
    MeshTooCoarse { h: f64, suggested: f64 },

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("energy is not differentiable at triangle {triangle} (zero gradient with eps = 0 and p < 2)")]
    NonDifferentiable { triangle: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("line search stagnated at eps = {eps:e}, iteration {iteration}\n{trace}")]
    LineSearchStagnation { eps: f64, iteration: usize, trace: String },

    #[error("Newton iteration limit reached at eps = {eps:e} (relative gradient {grad_norm:e})")]
    IterationLimit { eps: f64, grad_norm: f64 },

    #[error("maximum principle violated: interior vertex {vertex} has value {value:e}")]
    MaximumPrinciple { vertex: usize, value: f64 },

    #[error("rank-deficient recovery patch at vertex {vertex}")]
    RankDeficientPatch { vertex: usize },

    #[error("solver failure: outward normal derivative is non-negative at boundary edge {edge} (u_nu = {u_nu:e})")]
    NonNegativeNormalDerivative { edge: usize, u_nu: f64 },

    #[error("soap-bubble statements require a connected boundary; domain has {components} components")]
    UnsupportedForSbt { components: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
