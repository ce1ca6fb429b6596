//! JSON game specification files.
//!
//! ```json
//! {
//!   "tasks": [
//!     {"id": "p", "from": "n0", "to": "n1", "simplicity": 2, "reward": 1},
//!     {"id": "q", "from": "n1", "to": "n2", "simplicity": 1, "reward": 5}
//!   ],
//!   "agents": [{"id": "1", "ability": 1}, {"id": "2", "ability": 1}]
//! }
//! ```
//!
//! Separable files give every task a `simplicity` and every agent an
//! `ability`; general files give every agent an `aptitudes` map over all task
//! ids and no simplicities. `nodes` is optional and `stackelberg` lists agent
//! ids.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report;
use pps_core::{
    AptitudeMatrix, Aptitudes, GameSpec, RewardVector, SaProfile, Subtask, SubtaskNetwork,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<String>>,
    pub tasks: Vec<TaskEntry>,
    pub agents: Vec<AgentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stackelberg: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub id: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplicity: Option<f64>,
    pub reward: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aptitudes: Option<BTreeMap<String, f64>>,
}

pub fn parse_game_spec(text: &str) -> Result<GameSpec> {
    let file: GameSpecFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.to_game()
}

pub fn load_game_spec(path: &Path) -> Result<GameSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_game_spec(&text)
}

fn positive(field: String, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::validation(
            field,
            format!("must be positive, got {value}"),
        ))
    }
}

impl GameSpecFile {
    pub fn to_game(&self) -> Result<GameSpec> {
        if self.tasks.is_empty() {
            return Err(CliError::validation(
                "tasks",
                "at least one task is required",
            ));
        }
        if self.agents.is_empty() {
            return Err(CliError::validation(
                "agents",
                "at least one agent is required",
            ));
        }
        let mut rewards_by_id = BTreeMap::new();
        for (k, t) in self.tasks.iter().enumerate() {
            let r = t
                .reward
                .ok_or_else(|| CliError::validation(format!("tasks[{k}].reward"), "missing"))?;
            if !(r.is_finite() && r >= 0.0) {
                return Err(CliError::validation(
                    format!("tasks[{k}].reward"),
                    format!("must be non-negative, got {r}"),
                ));
            }
            rewards_by_id.insert(t.id.as_str(), r);
        }
        let subtasks = self
            .tasks
            .iter()
            .map(|t| Subtask::new(t.id.clone(), t.from.clone(), t.to.clone()))
            .collect();
        let net = SubtaskNetwork::new(self.nodes.clone(), subtasks)
            .map_err(|e| CliError::validation("tasks", e.to_string()))?;

        for (k, a) in self.agents.iter().enumerate() {
            match (&a.ability, &a.aptitudes) {
                (Some(_), Some(_)) => {
                    return Err(CliError::validation(
                        format!("agents[{k}]"),
                        "give either `ability` or `aptitudes`, not both",
                    ))
                }
                (None, None) => {
                    return Err(CliError::validation(
                        format!("agents[{k}]"),
                        "missing `ability` or `aptitudes`",
                    ))
                }
                _ => {}
            }
        }
        let separable = self.agents[0].ability.is_some();
        let aptitudes = if separable {
            if let Some(k) = self.agents.iter().position(|a| a.ability.is_none()) {
                return Err(CliError::validation(
                    format!("agents[{k}].aptitudes"),
                    "mixes general aptitudes with separable abilities",
                ));
            }
            let abilities = self
                .agents
                .iter()
                .enumerate()
                .map(|(k, a)| positive(format!("agents[{k}].ability"), a.ability.unwrap()))
                .collect::<Result<Vec<_>>>()?;
            let mut simplicities = vec![0.0; net.len()];
            for (k, t) in self.tasks.iter().enumerate() {
                let field = format!("tasks[{k}].simplicity");
                let s = t
                    .simplicity
                    .ok_or_else(|| CliError::validation(field.clone(), "missing"))?;
                simplicities[net.index_of(&t.id).expect("task in network")] = positive(field, s)?;
            }
            Aptitudes::Separable(SaProfile::new(abilities, simplicities)?)
        } else {
            if let Some(k) = self.agents.iter().position(|a| a.aptitudes.is_none()) {
                return Err(CliError::validation(
                    format!("agents[{k}].ability"),
                    "mixes a separable ability with general aptitudes",
                ));
            }
            if let Some(k) = self.tasks.iter().position(|t| t.simplicity.is_some()) {
                return Err(CliError::validation(
                    format!("tasks[{k}].simplicity"),
                    "simplicities require separable abilities",
                ));
            }
            let mut rows = Vec::with_capacity(self.agents.len());
            for (k, a) in self.agents.iter().enumerate() {
                let map = a.aptitudes.as_ref().unwrap();
                if let Some(extra) = map.keys().find(|id| net.index_of(id).is_none()) {
                    return Err(CliError::validation(
                        format!("agents[{k}].aptitudes.{extra}"),
                        "unknown task",
                    ));
                }
                let row = (0..net.len())
                    .map(|u| {
                        let id = net.task_id(u);
                        let field = format!("agents[{k}].aptitudes.{id}");
                        let rate = *map
                            .get(id)
                            .ok_or_else(|| CliError::validation(field.clone(), "missing"))?;
                        positive(field, rate)
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            Aptitudes::General(AptitudeMatrix::new(rows)?)
        };

        let rewards = (0..net.len())
            .map(|u| rewards_by_id[net.task_id(u)])
            .collect();
        let agents = self.agents.iter().map(|a| a.id.clone()).collect();
        GameSpec::new(
            net,
            agents,
            aptitudes,
            RewardVector::new(rewards)?,
            self.stackelberg.clone(),
        )
        .map_err(|e| match e {
            pps_core::Error::DuplicateId(id) => {
                CliError::validation("agents", format!("duplicate id `{id}`"))
            }
            pps_core::Error::UnknownAgent(id) => {
                CliError::validation("stackelberg", format!("unknown agent `{id}`"))
            }
            other => other.into(),
        })
    }

    /// Canonical file for a game: tasks in id order, agents in game order.
    pub fn from_game(g: &GameSpec) -> GameSpecFile {
        let net = g.network();
        let sa = g.sa();
        let tasks = net
            .tasks()
            .iter()
            .enumerate()
            .map(|(u, t)| TaskEntry {
                id: t.id.clone(),
                from: t.from.clone(),
                to: t.to.clone(),
                simplicity: sa.map(|p| p.simplicities()[u]),
                reward: Some(g.reward(u)),
            })
            .collect();
        let agents = g
            .agents()
            .iter()
            .enumerate()
            .map(|(i, id)| AgentEntry {
                id: id.clone(),
                ability: sa.map(|p| p.abilities()[i]),
                aptitudes: match sa {
                    Some(_) => None,
                    None => Some(
                        (0..g.m())
                            .map(|u| (net.task_id(u).to_string(), g.rate(i, u)))
                            .collect(),
                    ),
                },
            })
            .collect();
        GameSpecFile {
            nodes: Some(net.nodes().to_vec()),
            tasks,
            agents,
            stackelberg: g
                .stackelberg()
                .map(|s| s.iter().map(|&i| g.agents()[i].clone()).collect()),
        }
    }
}

/// Pretty JSON of the canonical file, numbers with 17 significant digits.
pub fn serialize_game(g: &GameSpec) -> String {
    report::to_pretty(&GameSpecFile::from_game(g))
}

/// `sha256:<hex>` of the canonical compact serialization.
pub fn digest(g: &GameSpec) -> String {
    use sha2::{Digest, Sha256};
    let bytes = report::to_compact(&GameSpecFile::from_game(g));
    format!("sha256:{}", hex::encode(Sha256::digest(bytes.as_bytes())))
}
