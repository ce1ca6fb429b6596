//! Aptitudes, rewards and the game specification, plus the sufficient-condition
//! checkers and reward designers built on them.

pub(crate) mod checks;
mod design;

use std::collections::HashSet;

pub use checks::{
    check_dag_core, check_dag_ne, check_dag_sa, check_dag_stackelberg, check_line_core,
    check_line_ne, check_line_stackelberg, ConditionReport, Subject, Theorem, Thresholds, Witness,
    WitnessKind, DEFAULT_COALITION_LIMIT,
};
pub use design::{design_rewards, RewardDesign};

use crate::error::{Error, Result};
use crate::network::SubtaskNetwork;

/// Absolute tolerance used by every inequality and value comparison.
pub const EPS: f64 = 1e-9;

fn positive(name: impl FnOnce() -> String, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveParameter {
            name: name(),
            value,
        })
    }
}

/// Rates `a_i(u)` indexed `[agent][task]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AptitudeMatrix {
    rates: Vec<Vec<f64>>,
}

impl AptitudeMatrix {
    pub fn new(rates: Vec<Vec<f64>>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::DimensionMismatch("no agents".into()));
        }
        let m = rates[0].len();
        for (i, row) in rates.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "agent {i} has {} aptitudes, expected {m}",
                    row.len()
                )));
            }
            for (u, &a) in row.iter().enumerate() {
                positive(|| format!("aptitude[{i}][{u}]"), a)?;
            }
        }
        Ok(AptitudeMatrix { rates })
    }

    pub fn agents(&self) -> usize {
        self.rates.len()
    }

    pub fn tasks(&self) -> usize {
        self.rates[0].len()
    }

    pub fn rate(&self, agent: usize, task: usize) -> f64 {
        self.rates[agent][task]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rates
    }

    /// `a(u)`, the sum over all agents.
    pub fn total(&self, task: usize) -> f64 {
        self.rates.iter().map(|row| row[task]).sum()
    }

    /// `a_{-i}(u)`.
    pub fn others(&self, agent: usize, task: usize) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != agent)
            .map(|(_, row)| row[task])
            .sum()
    }

    /// `a_C(u)` for the agents whose bits are set in `coalition`.
    pub fn coalition(&self, coalition: u64, task: usize) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .filter(|&(j, _)| coalition >> j & 1 == 1)
            .map(|(_, row)| row[task])
            .sum()
    }
}

/// Separable aptitudes `a_i(u) = a_i · s_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaProfile {
    abilities: Vec<f64>,
    simplicities: Vec<f64>,
}

impl SaProfile {
    pub fn new(abilities: Vec<f64>, simplicities: Vec<f64>) -> Result<Self> {
        if abilities.is_empty() {
            return Err(Error::DimensionMismatch("no agents".into()));
        }
        if simplicities.is_empty() {
            return Err(Error::DimensionMismatch("no subtasks".into()));
        }
        for (i, &a) in abilities.iter().enumerate() {
            positive(|| format!("ability[{i}]"), a)?;
        }
        for (u, &s) in simplicities.iter().enumerate() {
            positive(|| format!("simplicity[{u}]"), s)?;
        }
        Ok(SaProfile {
            abilities,
            simplicities,
        })
    }

    pub fn abilities(&self) -> &[f64] {
        &self.abilities
    }

    pub fn simplicities(&self) -> &[f64] {
        &self.simplicities
    }

    /// `A = Σ a_i`.
    pub fn total_ability(&self) -> f64 {
        self.abilities.iter().sum()
    }

    pub fn expand(&self) -> AptitudeMatrix {
        AptitudeMatrix {
            rates: self
                .abilities
                .iter()
                .map(|&a| self.simplicities.iter().map(|&s| a * s).collect())
                .collect(),
        }
    }
}

/// Product-form thresholds for separable aptitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaThresholds {
    /// `max_i a_i / A`.
    pub alpha_ne: f64,
    /// `1 - min_i a_i / A`.
    pub alpha_c: f64,
    /// `max_i (a_i / a_S) · a_{-i} / (a_i + a_{-i})`, when a Stackelberg set is given.
    pub alpha_s: Option<f64>,
}

pub fn sa_thresholds(profile: &SaProfile, stackelberg: Option<&[usize]>) -> Result<SaThresholds> {
    let abilities = profile.abilities();
    if abilities.len() < 2 {
        return Err(Error::SingleAgent);
    }
    let total = profile.total_ability();
    let max = abilities.iter().cloned().fold(f64::MIN, f64::max);
    let min = abilities.iter().cloned().fold(f64::MAX, f64::min);
    let alpha_ne = max / total;
    let alpha_c = 1.0 - min / total;
    let alpha_s = match stackelberg {
        None => None,
        Some([]) => return Err(Error::EmptyStackelbergSet),
        Some(set) => {
            let leaders: f64 = set.iter().map(|&i| abilities[i]).sum();
            Some(
                abilities
                    .iter()
                    .map(|&a| (a / leaders) * (total - a) / total)
                    .fold(f64::MIN, f64::max),
            )
        }
    };
    assert!(
        alpha_ne <= alpha_c + EPS && alpha_c < 1.0,
        "threshold ordering violated: alpha_ne={alpha_ne} alpha_c={alpha_c}"
    );
    Ok(SaThresholds {
        alpha_ne,
        alpha_c,
        alpha_s,
    })
}

/// Non-negative finite reward per subtask.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (u, &r) in values.iter().enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidReward {
                    name: format!("reward[{u}]"),
                    value: r,
                });
            }
        }
        Ok(RewardVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, task: usize) -> f64 {
        self.0[task]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> RewardVector {
        RewardVector(self.0.iter().map(|r| r * c).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Aptitudes {
    Separable(SaProfile),
    General(AptitudeMatrix),
}

/// A complete game instance. Task-indexed vectors follow the network's
/// canonical (lexicographic) subtask order.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    network: SubtaskNetwork,
    agents: Vec<String>,
    aptitudes: Aptitudes,
    matrix: AptitudeMatrix,
    rewards: RewardVector,
    stackelberg: Option<Vec<usize>>,
}

impl GameSpec {
    pub fn new(
        network: SubtaskNetwork,
        agents: Vec<String>,
        aptitudes: Aptitudes,
        rewards: RewardVector,
        stackelberg: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for a in &agents {
            if !seen.insert(a.as_str()) {
                return Err(Error::DuplicateId(a.clone()));
            }
        }
        let matrix = match &aptitudes {
            Aptitudes::Separable(p) => p.expand(),
            Aptitudes::General(m) => m.clone(),
        };
        if matrix.agents() != agents.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} agents but {} aptitude rows",
                agents.len(),
                matrix.agents()
            )));
        }
        if matrix.tasks() != network.len() || rewards.len() != network.len() {
            return Err(Error::DimensionMismatch(format!(
                "network has {} subtasks, aptitudes {}, rewards {}",
                network.len(),
                matrix.tasks(),
                rewards.len()
            )));
        }
        let stackelberg = match stackelberg {
            None => None,
            Some(ids) => {
                let mut idx = Vec::with_capacity(ids.len());
                for id in ids {
                    let i = agents
                        .iter()
                        .position(|a| *a == id)
                        .ok_or_else(|| Error::UnknownAgent(id.clone()))?;
                    if idx.contains(&i) {
                        return Err(Error::DuplicateId(id));
                    }
                    idx.push(i);
                }
                idx.sort_unstable();
                Some(idx)
            }
        };
        Ok(GameSpec {
            network,
            agents,
            aptitudes,
            matrix,
            rewards,
            stackelberg,
        })
    }

    /// Agents named `"1"`, `"2"`, ... with no Stackelberg set.
    pub fn with_numbered_agents(
        network: SubtaskNetwork,
        aptitudes: Aptitudes,
        rewards: Vec<f64>,
    ) -> Result<Self> {
        let n = match &aptitudes {
            Aptitudes::Separable(p) => p.abilities().len(),
            Aptitudes::General(m) => m.agents(),
        };
        let agents = (1..=n).map(|i| i.to_string()).collect();
        GameSpec::new(
            network,
            agents,
            aptitudes,
            RewardVector::new(rewards)?,
            None,
        )
    }

    pub fn network(&self) -> &SubtaskNetwork {
        &self.network
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == id)
    }

    pub fn aptitudes(&self) -> &Aptitudes {
        &self.aptitudes
    }

    pub fn matrix(&self) -> &AptitudeMatrix {
        &self.matrix
    }

    pub fn rewards(&self) -> &RewardVector {
        &self.rewards
    }

    pub fn reward(&self, task: usize) -> f64 {
        self.rewards.get(task)
    }

    pub fn stackelberg(&self) -> Option<&[usize]> {
        self.stackelberg.as_deref()
    }

    pub fn sa(&self) -> Option<&SaProfile> {
        match &self.aptitudes {
            Aptitudes::Separable(p) => Some(p),
            Aptitudes::General(_) => None,
        }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.network.len()
    }

    pub fn rate(&self, agent: usize, task: usize) -> f64 {
        self.matrix.rate(agent, task)
    }

    /// `γ_i(u) = R_u a_i(u) a_{-i}(u) / (a_i(u) + a_{-i}(u))`.
    pub fn virtual_reward(&self, agent: usize, task: usize) -> Result<f64> {
        if self.n() < 2 {
            return Err(Error::SingleAgent);
        }
        Ok(self.gamma(agent, task))
    }

    /// Unchecked virtual reward; zero for a lone agent.
    pub(crate) fn gamma(&self, agent: usize, task: usize) -> f64 {
        let own = self.rate(agent, task);
        let rest = self.matrix.others(agent, task);
        self.reward(task) * own * rest / (own + rest)
    }

    /// The same game with a different reward vector.
    pub fn with_rewards(&self, rewards: RewardVector) -> Result<GameSpec> {
        if rewards.len() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} rewards, got {}",
                self.m(),
                rewards.len()
            )));
        }
        Ok(GameSpec {
            rewards,
            ..self.clone()
        })
    }

    /// Every aptitude multiplied by `c`.
    pub fn with_scaled_aptitudes(&self, c: f64) -> Result<GameSpec> {
        positive(|| "aptitude scale".into(), c)?;
        let aptitudes = match &self.aptitudes {
            Aptitudes::Separable(p) => Aptitudes::Separable(SaProfile::new(
                p.abilities().iter().map(|a| a * c).collect(),
                p.simplicities().to_vec(),
            )?),
            Aptitudes::General(m) => Aptitudes::General(AptitudeMatrix::new(
                m.rows()
                    .iter()
                    .map(|row| row.iter().map(|a| a * c).collect())
                    .collect(),
            )?),
        };
        let matrix = match &aptitudes {
            Aptitudes::Separable(p) => p.expand(),
            Aptitudes::General(m) => m.clone(),
        };
        Ok(GameSpec {
            aptitudes,
            matrix,
            ..self.clone()
        })
    }

    /// Game in which the agents of `coalition` (bitmask) act as one agent with
    /// aptitude `a_C(u)`. The merged agent comes first; the others keep their
    /// relative order. The Stackelberg set is dropped.
    pub fn merged(&self, coalition: u64) -> Result<GameSpec> {
        let members: Vec<usize> = (0..self.n()).filter(|&j| coalition >> j & 1 == 1).collect();
        if members.is_empty() {
            return Err(Error::DimensionMismatch("empty coalition".into()));
        }
        let rest: Vec<usize> = (0..self.n()).filter(|&j| coalition >> j & 1 == 0).collect();
        let mut agents = vec![members
            .iter()
            .map(|&j| self.agents[j].as_str())
            .collect::<Vec<_>>()
            .join("+")];
        agents.extend(rest.iter().map(|&j| self.agents[j].clone()));
        let aptitudes = match &self.aptitudes {
            Aptitudes::Separable(p) => {
                let mut abilities = vec![members.iter().map(|&j| p.abilities()[j]).sum()];
                abilities.extend(rest.iter().map(|&j| p.abilities()[j]));
                Aptitudes::Separable(SaProfile::new(abilities, p.simplicities().to_vec())?)
            }
            Aptitudes::General(m) => {
                let mut rows = vec![(0..self.m()).map(|u| m.coalition(coalition, u)).collect()];
                rows.extend(rest.iter().map(|&j| m.rows()[j].clone()));
                Aptitudes::General(AptitudeMatrix::new(rows)?)
            }
        };
        GameSpec::new(
            self.network.clone(),
            agents,
            aptitudes,
            self.rewards.clone(),
            None,
        )
    }
}
