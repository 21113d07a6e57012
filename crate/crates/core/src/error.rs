use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kappa must be a nonzero integer")]
    ZeroKappa,
    #[error("invalid angular momentum arguments: {0}")]
    InvalidAngularMomentum(String),
    #[error("invalid basis parameters: {0}")]
    InvalidBasis(String),
    #[error("divergent radial integral: combined power {power} with r^{shift}")]
    DivergentIntegral { power: i32, shift: i32 },
    #[error("overlap matrix is not positive definite (basis linear dependence)")]
    IndefiniteOverlap,
    #[error("eigensolver residual {residual:.3e} exceeds tolerance")]
    EigenResidual { residual: f64 },
    #[error("supercritical charge: Z*alpha = {z_alpha} >= |kappa| = {kappa}")]
    Supercritical { z_alpha: f64, kappa: i32 },
    #[error("confluent hypergeometric evaluation lost precision at x = {x:.3e}")]
    PrecisionLoss { x: f64 },
    #[error("photon pole encountered: |denominator| = {denominator:.3e}")]
    PhotonPole { denominator: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("finite-difference step unstable: relative change {change:.3e} on halving")]
    UnstableDerivative { change: f64 },
    #[error("kinematics outside the validated domain: {0}")]
    Kinematics(String),
    #[error("ill-conditioned extrapolation: {0}")]
    Extrapolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
