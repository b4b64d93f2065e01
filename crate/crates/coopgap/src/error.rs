use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The game is inessential: the grand coalition is worth exactly the sum
    /// of the singletons, so the normalizing transform is undefined.
    #[error("degenerate game: grand coalition value equals the sum of singleton values")]
    DegenerateGame,

    /// A known-coalition set lacks the minimal information every incomplete
    /// game starts from: the empty set, all singletons, and the grand
    /// coalition.
    #[error("known set is missing minimal information (empty set, singletons, grand coalition)")]
    MissingMinimalInfo,

    /// Bound computations require a normalized game.
    #[error("game is not normalized: singletons must be worth 0 and the grand coalition 1")]
    NotNormalized,

    /// A revelation budget larger than the number of unknown coalitions.
    #[error("budget {requested} exceeds the {available} unknown coalitions")]
    BudgetInfeasible { requested: usize, available: usize },

    /// The operation is only implemented for a bounded range of player counts.
    #[error("n={n} is outside the supported range for this operation (boundary {limit})")]
    SizeLimit { n: usize, limit: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("{0}")]
    InvalidArgument(String),

    /// Preconditions that demand a strict superadditivity margin.
    #[error("the game is not strictly superadditive")]
    NotStrictlySuperadditive,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
