use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
  #[error("unsupported coefficient: {0}")]
  UnsupportedCoefficient(String),

  #[error("dimension mismatch: {0}")]
  DimensionMismatch(String),

  #[error("induced map is not well defined: {reason}; witness {witness}")]
  NotWellDefined { reason: String, witness: String },

  #[error("invalid input: {0}")]
  Schema(String),

  #[error("invalid model: {0}")]
  InvalidModel(String),

  #[error("d^2 != 0 on basis monomial {monomial} (structure constants violate the Jacobi identity)")]
  JacobiViolation { monomial: String },

  #[error("frequency {freq:?} lies outside the model window")]
  WindowOverflow { freq: Vec<i64> },

  #[error("parity violation in term `{term}`: {reason}")]
  ParityViolation { term: String, reason: String },

  #[error("operator is not parity homogeneous: {0}")]
  NotHomogeneous(String),

  #[error("subspace is not invariant: {0}")]
  NotInvariant(String),

  #[error("form is not closed: {0}")]
  FormNotClosed(String),

  #[error("reeb field does not annihilate the form: {0}")]
  ReebNotInKernel(String),

  #[error("precondition failed: {0}")]
  Precondition(String),

  #[error("not constructible: {0}")]
  NonConstructible(String),

  #[error("fields do not commute: {0}")]
  NonCommuting(String),

  #[error("unsupported input: {0}")]
  Unsupported(String),

  #[error("structural inconsistency: {0}")]
  Structural(String),

  #[error("internal contradiction: {0}")]
  Contradiction(String),

  #[error("i/o error: {0}")]
  Io(String),
}
