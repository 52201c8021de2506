use thiserror::Error;

use crate::oracle::QueryKind;

pub type Result<T, E = FenError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FenError {
    #[error("player {player} is out of range 1..={n}")]
    PlayerOutOfRange { player: usize, n: usize },

    #[error("player {player} is not a member of the coalition")]
    NotMember { player: usize },

    #[error("coalition of size {size} exceeds the size bound {bound}")]
    CoalitionTooLarge { size: usize, bound: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("edit step {index} rejected: {reason}")]
    InvalidEdit { index: usize, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{kind} query budget of {budget} exhausted")]
    BudgetExhausted { kind: QueryKind, budget: u64 },

    #[error("unknown coalition key {0}")]
    UnknownKey(usize),

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),

    #[error("{0} requires a bounded coalition size")]
    UnboundedSize(&'static str),

    #[error("instance too large for exhaustive search: n = {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("game and partition disagree on the player count ({game} vs {partition})")]
    SizeMismatch { game: usize, partition: usize },
}
