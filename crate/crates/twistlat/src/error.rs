use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("BadInput: {0}")]
    BadInput(String),
    #[error("EtaInconsistent: no sign assignment on the basis satisfies the eta recursion")]
    EtaInconsistent,
    #[error("NotInvertible: automorphism has determinant {0}")]
    NotInvertible(i64),
    #[error("DecompositionResidual: {what} residual {residual:e} exceeds {tol:e}")]
    DecompositionResidual { what: String, residual: f64, tol: f64 },
    #[error("ZeroEigenvalue")]
    ZeroEigenvalue,
    #[error("UnknownBlock: {0}")]
    UnknownBlock(String),
    #[error("SingularRestriction: {0}")]
    SingularRestriction(String),
    #[error("InsufficientDerivatives: block {block} needs {needed}, got {got}")]
    InsufficientDerivatives { block: usize, needed: usize, got: usize },
    #[error("AtPole: {0}")]
    AtPole(String),
    #[error("OutOfDomain: {0}")]
    OutOfDomain(String),
    #[error("NotLatticeVector: {0}")]
    NotLatticeVector(String),
    #[error("RepInconsistent: {0}")]
    RepInconsistent(String),
    #[error("BasisTooLarge: {size} states exceeds limit {limit}")]
    BasisTooLarge { size: usize, limit: usize },
    #[error("TruncationExceeded: {0}")]
    TruncationExceeded(String),
    #[error("NoUDescriptor: {0}")]
    NoUDescriptor(String),
    #[error("ThetaWindowOverflow: {0}")]
    ThetaWindowOverflow(String),
    #[error("UnsupportedBlockStructure: {0}")]
    UnsupportedBlockStructure(String),
    #[error("UnsupportedProductOrder: {0}")]
    UnsupportedProductOrder(String),
}

impl Error {
    /// Stable identifier used in reports and CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            Error::BadInput(_) => "BadInput",
            Error::EtaInconsistent => "EtaInconsistent",
            Error::NotInvertible(_) => "NotInvertible",
            Error::DecompositionResidual { .. } => "DecompositionResidual",
            Error::ZeroEigenvalue => "ZeroEigenvalue",
            Error::UnknownBlock(_) => "UnknownBlock",
            Error::SingularRestriction(_) => "SingularRestriction",
            Error::InsufficientDerivatives { .. } => "InsufficientDerivatives",
            Error::AtPole(_) => "AtPole",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::NotLatticeVector(_) => "NotLatticeVector",
            Error::RepInconsistent(_) => "RepInconsistent",
            Error::BasisTooLarge { .. } => "BasisTooLarge",
            Error::TruncationExceeded(_) => "TruncationExceeded",
            Error::NoUDescriptor(_) => "NoUDescriptor",
            Error::ThetaWindowOverflow(_) => "ThetaWindowOverflow",
            Error::UnsupportedBlockStructure(_) => "UnsupportedBlockStructure",
            Error::UnsupportedProductOrder(_) => "UnsupportedProductOrder",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
