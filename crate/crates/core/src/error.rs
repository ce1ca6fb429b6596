use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subtask network has a directed cycle through nodes {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("subtask `{task}` references unknown node `{node}`")]
    DanglingNode { task: String, node: String },
    #[error("subtask network must contain at least one subtask")]
    EmptyNetwork,
    #[error("at most {max} subtasks are supported, got {got}")]
    TooManyTasks { got: usize, max: usize },
    #[error("unknown subtask `{0}`")]
    UnknownTask(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error(
        "solved set is not closed under predecessors: `{task}` is solved but `{missing}` is not"
    )]
    InvalidKnowledgeState { task: String, missing: String },
    #[error("invalid subgame pair: {0}")]
    InvalidPair(String),
    #[error("state space has more than {cap} states")]
    StateSpaceExceeded { cap: usize },
    #[error("assignment space {size} exceeds the limit {limit}")]
    AssignmentSpaceExceeded { size: u128, limit: u128 },
    #[error("{agents} agents exceed the coalition enumeration limit {limit}")]
    CoalitionSpaceExceeded { agents: usize, limit: usize },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: String, value: f64 },
    #[error("{name} must be non-negative and finite, got {value}")]
    InvalidReward { name: String, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation requires at least two agents")]
    SingleAgent,
    #[error("operation requires a linear subtask network")]
    NotALine,
    #[error("stackelberg set is empty")]
    EmptyStackelbergSet,
    #[error("operation requires separable aptitudes")]
    NotSeparable,
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("{0}")]
    BoundViolated(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
