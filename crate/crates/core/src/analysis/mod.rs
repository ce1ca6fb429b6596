//! Exact computations on a game: closed-form PPS utilities, herding and
//! optimal makespans, the best-response dynamic program and coalition values.

mod best_response;
mod coalition;
mod makespan;

use serde::Serialize;

pub use best_response::{
    best_response_value, verify_nash_pps, Action, AgentVerdict, BestResponseResult, NashReport,
    PairValue,
};
pub use coalition::{coalition_analysis, CoalitionValue, CoreReport};
pub use makespan::{opt_makespan, poa_ratio, MakespanResult, OptState};

use crate::error::Result;
use crate::model::{GameSpec, DEFAULT_COALITION_LIMIT};
use crate::network::{SubgamePair, TaskSet, DEFAULT_STATE_CAP};

pub const DEFAULT_ASSIGNMENT_CAP: u128 = 1_000_000;

/// Enumeration limits shared by the exact analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of knowledge states or subgame pairs.
    pub state_cap: usize,
    /// Maximum `|M_o|^n` assignments examined at one state.
    pub assignment_cap: u128,
    /// Maximum number of agents for coalition enumeration.
    pub coalition_limit: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            state_cap: DEFAULT_STATE_CAP,
            assignment_cap: DEFAULT_ASSIGNMENT_CAP,
            coalition_limit: DEFAULT_COALITION_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilityProfile {
    pub utilities: Vec<f64>,
    pub total: f64,
}

/// `Σ_{u∈M\T} R_u + Σ_{u∈T} R_u a_i(u) / a(u)`.
pub fn pps_utility(g: &GameSpec, agent: usize, pair: SubgamePair) -> Result<f64> {
    g.network().validate_pair(pair)?;
    let apt = g.matrix();
    let captive: f64 = pair.captive().iter().map(|u| g.reward(u)).sum();
    let contested: f64 = pair
        .agent_open
        .iter()
        .map(|u| g.reward(u) * apt.rate(agent, u) / apt.total(u))
        .sum();
    Ok(captive + contested)
}

/// Root utilities of every agent under PPS with herding.
pub fn utility_profile(g: &GameSpec) -> UtilityProfile {
    let root = SubgamePair::root(g.m());
    UtilityProfile {
        utilities: (0..g.n())
            .map(|i| pps_utility(g, i, root).expect("root pair is valid"))
            .collect(),
        total: g.rewards().total(),
    }
}

/// `T_H(M) = Σ_{u∈M} 1/a(u)` for an open set whose complement is a knowledge
/// state.
pub fn herding_makespan(g: &GameSpec, open: TaskSet) -> Result<f64> {
    g.network().knowledge_state(open.complement(g.m()))?;
    Ok(open.iter().map(|u| 1.0 / g.matrix().total(u)).sum())
}

/// Task agent `j` herds on among `available`: the largest virtual reward,
/// lowest index among near-ties.
pub fn herding_target(g: &GameSpec, agent: usize, available: TaskSet) -> usize {
    argmax_lowest(available, |u| g.gamma(agent, u))
}

/// Lowest-index element whose key is within a relative `1e-12` of the maximum.
pub(crate) fn argmax_lowest(set: TaskSet, key: impl Fn(usize) -> f64) -> usize {
    let keys: Vec<(usize, f64)> = set.iter().map(|u| (u, key(u))).collect();
    let best = keys
        .iter()
        .map(|&(_, k)| k)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    keys.iter()
        .find(|&&(_, k)| k >= best - tol)
        .map(|&(u, _)| u)
        .expect("non-empty task set")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::{AptitudeMatrix, Aptitudes, SaProfile};
    use crate::network::SubtaskNetwork;

    fn example_1_1(rp: f64, rq: f64) -> GameSpec {
        GameSpec::with_numbered_agents(
            SubtaskNetwork::line(&["p", "q"]).unwrap(),
            Aptitudes::Separable(SaProfile::new(vec![1.0, 1.0], vec![2.0, 1.0]).unwrap()),
            vec![rp, rq],
        )
        .unwrap()
    }

    #[test]
    fn root_utility_is_even_split() {
        let g = example_1_1(1.0, 5.0);
        let root = SubgamePair::root(2);
        assert!((pps_utility(&g, 0, root).unwrap() - 3.0).abs() < 1e-12);
        let p = utility_profile(&g);
        assert!((p.utilities.iter().sum::<f64>() - p.total).abs() < 1e-12);
    }

    #[test]
    fn captive_term() {
        let g = example_1_1(1.0, 5.0);
        let pair = SubgamePair {
            public_open: TaskSet::full(2),
            agent_open: TaskSet::single(1),
        };
        assert!((pps_utility(&g, 0, pair).unwrap() - 3.5).abs() < 1e-12);
        let bad = SubgamePair {
            public_open: TaskSet::single(1),
            agent_open: TaskSet::full(2),
        };
        assert!(matches!(
            pps_utility(&g, 0, bad),
            Err(Error::InvalidPair(_))
        ));
    }

    #[test]
    fn single_agent_takes_everything() {
        let g = GameSpec::with_numbered_agents(
            SubtaskNetwork::line(&["p", "q"]).unwrap(),
            Aptitudes::Separable(SaProfile::new(vec![3.0], vec![2.0, 1.0]).unwrap()),
            vec![1.0, 5.0],
        )
        .unwrap();
        assert!((pps_utility(&g, 0, SubgamePair::root(2)).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn herding_time() {
        let g = GameSpec::with_numbered_agents(
            SubtaskNetwork::line(&["a", "b", "c", "d", "e", "f"]).unwrap(),
            Aptitudes::Separable(SaProfile::new(vec![1.0; 3], vec![1.0; 6]).unwrap()),
            vec![1.0; 6],
        )
        .unwrap();
        assert!((herding_makespan(&g, TaskSet::full(6)).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            herding_makespan(&g, TaskSet::single(0)),
            Err(Error::InvalidKnowledgeState { .. })
        ));
        let one = GameSpec::with_numbered_agents(
            SubtaskNetwork::line(&["a"]).unwrap(),
            Aptitudes::General(AptitudeMatrix::new(vec![vec![2.0]]).unwrap()),
            vec![1.0],
        )
        .unwrap();
        assert_eq!(herding_makespan(&one, TaskSet::full(1)).unwrap(), 0.5);
    }

    #[test]
    fn herding_target_prefers_lowest_index_on_ties() {
        let g = GameSpec::with_numbered_agents(
            SubtaskNetwork::parallel(&["a", "b"]).unwrap(),
            Aptitudes::Separable(SaProfile::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap()),
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(herding_target(&g, 1, TaskSet::full(2)), 0);
        assert_eq!(herding_target(&g, 1, TaskSet::single(1)), 1);
    }
}
