use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime number")]
    NotPrime(u64),

    #[error("multiplicity of prime {0} must be at least 1 or \"inf\"")]
    BadMultiplicity(u64),

    #[error("character {0} does not belong to the character group")]
    CharacterOutsideGroup(String),

    #[error("{0} is not a topological automorphism of this solenoid")]
    NotAnAutomorphism(String),

    #[error("operands refer to different solenoids")]
    SpecMismatch,

    #[error("weights must be nonnegative and sum to exactly 1")]
    BadWeights,

    #[error("depth {have} is insufficient, at least {need} is required")]
    DepthInsufficient { have: usize, need: usize },

    #[error("character {y} is deeper than the batch depth {depth}")]
    CharacterTooDeep { y: String, depth: usize },

    #[error("term budget of {0} exceeded while combining characteristic functions")]
    TooManyTerms(usize),

    #[error("coefficient vector must be nonempty")]
    EmptyCoefficients,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("value too large: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}
