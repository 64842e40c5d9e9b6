use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register mismatch: {0}")]
    RegisterMismatch(String),
    #[error("overlapping labels: {0}")]
    OverlappingLabels(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("map is not CPTP: {0}")]
    NotCptp(String),
    #[error("infeasible acceptance threshold {eta} for trace {trace}")]
    InfeasibleEta { eta: f64, trace: f64 },
    #[error("target {0:?} is not an edge of the connectivity graph")]
    OffGraph((usize, usize)),
    #[error("enumeration budget of {cap} candidates exceeded")]
    BudgetExceeded { cap: u64 },
    #[error("extract on qubit {qubit} which is not in |0> (fidelity {fidelity:.3e})")]
    IllegalExtract { qubit: usize, fidelity: f64 },
    #[error("gate set lacks a SWAP gate")]
    MissingSwap,
    #[error("operation does not preserve the thermal operator: {0}")]
    NotGibbsPreserving(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty candidate class: {0}")]
    EmptyCandidates(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
