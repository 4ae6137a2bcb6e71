use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("transfer pole at lambda = {re}{im:+}i")]
    TransferPole { re: f64, im: f64 },
    #[error("step size resonance: I - dt/2*A is singular (halve dt)")]
    StepResonance,
    #[error("mode k={k}: {what}")]
    Mode { k: i64, what: String },
    #[error("family member {member}, mode k={k}: {what}")]
    FamilyMode { member: usize, k: i64, what: String },
    #[error("untrackable mode k={0}: reference not in range of the transfer function")]
    Untrackable(i64),
    #[error("construction check '{check}' failed: residual {residual:.3e} > {tol:.1e}")]
    SelfCheck { check: String, residual: f64, tol: f64 },
    #[error("imaginary residue {0:.3e} in a real-valued signal")]
    ImaginaryResidue(f64),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
