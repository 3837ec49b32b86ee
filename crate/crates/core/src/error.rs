use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("weight mismatch: left operator has source weight {left_lambda}, right operator has target weight {right_mu}")]
    WeightMismatch {
        left_lambda: String,
        right_mu: String,
    },

    #[error("{0} is not parity-homogeneous")]
    NotHomogeneous(&'static str),

    #[error("not a contact field: {0}")]
    NotContactField(String),

    #[error("resonant weights: {0}")]
    Resonant(String),

    #[error("intermediate singularity: {0} vanishes")]
    IntermediateSingularity(String),

    #[error("index out of range: n = {n} exceeds k2 = {k2}")]
    IndexOutOfRange { n: u32, k2: u32 },

    #[error("negative exponent in divergence row for n = {n}, k2 = {k2}")]
    NegativeExponent { n: u32, k2: u32 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}
