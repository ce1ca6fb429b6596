//! Exact analysis and seeded simulation of the treasure-hunt game of
//! collaborative research under partial-progress sharing.

pub mod analysis;
pub mod error;
pub mod instances;
pub mod model;
pub mod network;
pub mod sim;

pub use analysis::Caps;
pub use error::{Error, Result};
pub use model::{AptitudeMatrix, Aptitudes, GameSpec, RewardVector, SaProfile, EPS};
pub use network::{KnowledgeState, SubgamePair, Subtask, SubtaskNetwork, TaskSet};
pub use sim::Strategy;
