use ptorsion::Error;

pub const OK: u8 = 0;
pub const CONFIG: u8 = 1;
pub const SOLVER: u8 = 2;
pub const CHAIN: u8 = 3;
pub const PARTIAL: u8 = 4;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: CONFIG, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = error.chain().find_map(|c| c.downcast_ref::<Error>()).map_or(CONFIG, code_for);
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

pub fn code_for(e: &Error) -> u8 {
    match e {
        Error::NonDifferentiable { .. }
        | Error::LinearSolve(_)
        | Error::LineSearchStagnation { .. }
        | Error::IterationLimit { .. }
        | Error::MaximumPrinciple { .. }
        | Error::RankDeficientPatch { .. }
        | Error::NonNegativeNormalDerivative { .. }
        | Error::Quadrature { .. }
        | Error::Bracket { .. } => SOLVER,
        _ => CONFIG,
    }
}

pub type Outcome = Result<u8, Failure>;
