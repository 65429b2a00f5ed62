use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("graph contains a cycle through `{0}`")]
    Cycle(String),

    #[error("invalid cpd for `{child}`: {reason}")]
    InvalidCpd { child: String, reason: String },

    #[error("assignment is missing variables: {}", .0.join(", "))]
    PartialAssignment(Vec<String>),

    #[error("state {state} out of range for `{variable}` with {cardinality} states")]
    StateOutOfRange {
        variable: String,
        state: usize,
        cardinality: usize,
    },

    #[error("`{variable}` is hidden but has no state assignment")]
    MissingAssignment { variable: String },

    #[error("`{0}` is not in the hidden set")]
    NotHidden(String),

    #[error("`{0}` has an empty Markov blanket; its cardinality is unidentifiable")]
    EmptyBlanket(String),

    #[error("invalid merge of states {i} and {j} of `{variable}`: {reason}")]
    InvalidMerge {
        variable: String,
        i: usize,
        j: usize,
        reason: String,
    },

    #[error("hidden state space of {size} joint states exceeds the cap of {cap}; reduce the number or cardinality of hidden variables")]
    StateSpaceTooLarge { size: usize, cap: usize },

    #[error("missing sufficient statistics for family `{0}`")]
    MissingFamily(String),

    #[error("dataset is incomplete: `{0}` is hidden")]
    IncompleteData(String),

    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
