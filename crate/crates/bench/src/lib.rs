//! Fixtures shared by the criterion benches.

use pps_core::sim::Stream;
use pps_core::{Aptitudes, GameSpec, Result, SaProfile, Subtask, SubtaskNetwork};

pub use pps_core::instances::{specialists, two_by_two, two_task_line, uniform_line};

/// A random DAG with separable aptitudes drawn from `[0.5, 2]` and unit
/// rewards. Task `k` runs from node `k` to node `k + 1` or `k + 2`.
pub fn random_sa_game(seed: u64, m: usize, n: usize) -> Result<GameSpec> {
    let mut rng = Stream::new(seed, 0);
    let mut draw = move || 0.5 + 1.5 * rng.uniform();
    let tasks = (0..m)
        .map(|k| {
            let to = k + if draw() < 1.25 { 1 } else { 2 };
            Subtask::new(
                format!("t{k:02}"),
                format!("v{k:02}"),
                format!("v{:02}", to.min(m)),
            )
        })
        .collect();
    let net = SubtaskNetwork::new(None, tasks)?;
    let abilities = (0..n).map(|_| draw()).collect();
    let simplicities = (0..m).map(|_| draw()).collect();
    GameSpec::with_numbered_agents(
        net,
        Aptitudes::Separable(SaProfile::new(abilities, simplicities)?),
        vec![1.0; m],
    )
}
