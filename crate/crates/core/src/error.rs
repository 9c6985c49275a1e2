use thiserror::Error;

use crate::geom::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    // polynomials
    #[error("segment endpoints coincide")]
    DegeneratePoints,
    #[error("polynomial vanishes identically on the requested range")]
    IdenticallyZero,
    #[error("roots near {near} cannot be separated at tolerance {tol:e}")]
    ToleranceTooCoarse { near: f64, tol: f64 },

    // systems
    #[error("subdivision budget of {budget} boxes exhausted")]
    BudgetExceeded { budget: usize },
    #[error("solutions cluster near {at:?}; cannot certify them apart")]
    SingularCluster { at: Vec<f64> },
    #[error("newton iteration diverged from {start:?}")]
    Diverged { start: Vec<f64> },
    #[error("jacobian is singular at {at:?}")]
    SingularJacobian { at: Vec<f64> },

    // curve geometry
    #[error("gradient vanishes at {0}")]
    SingularPoint(Point),
    #[error("curve tracing stalled near {0}")]
    TraceStalled(Point),
    #[error("sign of {what} is undetermined near {at}")]
    SignUndetermined { what: &'static str, at: Point },

    // domain
    #[error("three or more curves meet near {0}")]
    TriplePoint(Point),
    #[error("curves {a} and {b} meet tangentially near {at}")]
    TangentialCrossing { a: usize, b: usize, at: Point },
    #[error("curve {0} does not meet the closure of the domain")]
    CurveMissesClosure(usize),
    #[error("the domain reaches the boundary of the work box")]
    UnboundedDomain,
    #[error("curve {index} is singular at {at:?}")]
    SingularCurve { index: usize, at: Vec<Point> },
    #[error("point {0} lies on a curve")]
    OnCurve(Point),
    #[error("point {0} lies outside the work box")]
    OutsideBox(Point),
    #[error("closure membership of {0} is undecided")]
    ClosureMembershipUndecided(Point),
    #[error("fiber membership undecided near {0}")]
    MembershipUndecided(Point),

    // reeb
    #[error("domain is not Morse: {0}")]
    NotMorse(String),
    #[error("sweep matching ambiguous at station {0}")]
    SweepMatchingAmbiguous(f64),
    #[error("graph has {0} vertices; isomorphism search is capped at 64")]
    TooLarge(usize),

    // surgery
    #[error("no valid disk radius found for target {0}")]
    NoValidRadius(Point),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("inserted disk swallows the seed point")]
    SeedSwallowed,
    #[error("surgery result failed validation: {0}")]
    ValidationFailed(String),
    #[error("Poincaré-Reeb graph changed along axis {0}")]
    GraphChanged(&'static str),
    #[error("surgery did not converge after {0} insertions")]
    NotConverged(usize),

    // realize
    #[error("vertex {0} has too little clearance for splitting")]
    ClearanceTooSmall(usize),
    #[error("polynomial fit failed: {0}")]
    FitFailed(String),
    #[error("fitted polynomial is singular")]
    SingularFit,
    #[error("circle placement failed: {0}")]
    PlacementFailed(String),
    #[error("realized graph does not match the input graph")]
    GraphMismatch,

    // oracle cross-check
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidInput(_) => "InvalidInput",
            DegeneratePoints => "DegeneratePoints",
            IdenticallyZero => "IdenticallyZero",
            ToleranceTooCoarse { .. } => "ToleranceTooCoarse",
            BudgetExceeded { .. } => "BudgetExceeded",
            SingularCluster { .. } => "SingularCluster",
            Diverged { .. } => "Diverged",
            SingularJacobian { .. } => "SingularJacobian",
            SingularPoint(_) => "SingularPoint",
            TraceStalled(_) => "TraceStalled",
            SignUndetermined { .. } => "SignUndetermined",
            TriplePoint(_) => "TriplePoint",
            TangentialCrossing { .. } => "TangentialCrossing",
            CurveMissesClosure(_) => "CurveMissesClosure",
            UnboundedDomain => "UnboundedDomain",
            SingularCurve { .. } => "SingularCurve",
            OnCurve(_) => "OnCurve",
            OutsideBox(_) => "OutsideBox",
            ClosureMembershipUndecided(_) => "ClosureMembershipUndecided",
            MembershipUndecided(_) => "MembershipUndecided",
            NotMorse(_) => "NotMorse",
            SweepMatchingAmbiguous(_) => "SweepMatchingAmbiguous",
            TooLarge(_) => "TooLarge",
            NoValidRadius(_) => "NoValidRadius",
            HypothesisViolated(_) => "HypothesisViolated",
            SeedSwallowed => "SeedSwallowed",
            ValidationFailed(_) => "ValidationFailed",
            GraphChanged(_) => "GraphChanged",
            NotConverged(_) => "NotConverged",
            ClearanceTooSmall(_) => "ClearanceTooSmall",
            FitFailed(_) => "FitFailed",
            SingularFit => "SingularFit",
            PlacementFailed(_) => "PlacementFailed",
            GraphMismatch => "GraphMismatch",
            OracleMismatch(_) => "OracleMismatch",
            Io(_) => "Io",
            Json(_) => "Json",
        }
    }

    /// Process exit code: 2 validation, 3 hypothesis or assertion failure,
    /// 4 oracle mismatch, 1 anything else (I/O).
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            HypothesisViolated(_) | GraphChanged(_) | GraphMismatch | NotConverged(_)
            | NoValidRadius(_) | PlacementFailed(_) | FitFailed(_) | SingularFit => 3,
            OracleMismatch(_) => 4,
            Io(_) => 1,
            _ => 2,
        }
    }
}
