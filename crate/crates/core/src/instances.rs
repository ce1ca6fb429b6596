//! Named instances used by the command line, tests and benches.

use crate::error::{Error, Result};
use crate::model::{AptitudeMatrix, Aptitudes, GameSpec, SaProfile};
use crate::network::SubtaskNetwork;

/// Zero-padded ids so lexicographic order follows position.
fn ids(prefix: &str, m: usize) -> Vec<String> {
    let width = m.to_string().len();
    (1..=m).map(|k| format!("{prefix}{k:0width$}")).collect()
}

fn at_least(name: &str, value: usize, min: usize) -> Result<()> {
    if value < min {
        return Err(Error::NonPositiveParameter {
            name: format!("{name} (must be at least {min})"),
            value: value as f64,
        });
    }
    Ok(())
}

/// Two tasks `p -> q` with simplicities 2 and 1, two agents of ability 1.
pub fn two_task_line(rp: f64, rq: f64) -> Result<GameSpec> {
    GameSpec::with_numbered_agents(
        SubtaskNetwork::line(&["p", "q"])?,
        Aptitudes::Separable(SaProfile::new(vec![1.0, 1.0], vec![2.0, 1.0])?),
        vec![rp, rq],
    )
}

/// A line of `m` unit tasks and `n` unit agents, unit rewards.
pub fn uniform_line(m: usize, n: usize) -> Result<GameSpec> {
    at_least("m", m, 1)?;
    at_least("n", n, 1)?;
    let ids = ids("t", m);
    let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    GameSpec::with_numbered_agents(
        SubtaskNetwork::line(&refs)?,
        Aptitudes::Separable(SaProfile::new(vec![1.0; n], vec![1.0; m])?),
        vec![1.0; m],
    )
}

/// `m` parallel tasks and `m` specialists: agent `i` solves task `i` at rate 1
/// and every other task at rate `1/(m-1)`. Rewards `R_u = m^(m-1-u)` make all
/// agents rank the tasks in index order by virtual reward.
pub fn specialists(m: usize) -> Result<GameSpec> {
    at_least("m", m, 2)?;
    let off = 1.0 / (m - 1) as f64;
    let rates = (0..m)
        .map(|i| (0..m).map(|u| if i == u { 1.0 } else { off }).collect())
        .collect();
    let ids = ids("t", m);
    let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    GameSpec::with_numbered_agents(
        SubtaskNetwork::parallel(&refs)?,
        Aptitudes::General(AptitudeMatrix::new(rates)?),
        (0..m)
            .map(|u| (m as f64).powi((m - 1 - u) as i32))
            .collect(),
    )
}

/// Two parallel tasks, two agents, each twice as fast on its own task.
pub fn two_by_two() -> Result<GameSpec> {
    GameSpec::with_numbered_agents(
        SubtaskNetwork::parallel(&["u", "v"])?,
        Aptitudes::General(AptitudeMatrix::new(vec![vec![1.0, 0.5], vec![0.5, 1.0]])?),
        vec![1.0, 1.0],
    )
}
