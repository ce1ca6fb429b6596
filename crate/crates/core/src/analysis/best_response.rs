//! Best-response dynamic program over subgame pairs `(M, T)`.
//!
//! `M` is the set of tasks still open publicly, `T ⊆ M` the tasks the
//! deviating agent has not solved; `M \ T` are its captive solutions. The
//! other agents share immediately and each herds on their own highest virtual
//! reward among the publicly available tasks. At every state the deviator
//! either releases all captive solutions, collecting their rewards, or keeps
//! them private while working on one task it can attempt until the next event
//! of the exponential race. A captive task that another agent solves and
//! shares first is forfeited.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{herding_target, Caps};
use crate::error::{Error, Result};
use crate::model::{GameSpec, EPS};
use crate::network::{SubgamePair, TaskSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Action {
    /// Publish every captive solution now.
    Share,
    /// Keep captive solutions private and work on this task.
    Work(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairValue {
    pub pair: SubgamePair,
    /// Value when the deviator follows PPS from here on.
    pub pps: f64,
    /// Value of the best deviation from here on.
    pub best: f64,
    /// Value when withholding until every task is solved.
    pub withhold: f64,
    /// Action attaining `best`; sharing wins ties.
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestResponseResult {
    pub agent: usize,
    pub pps_value: f64,
    pub best_value: f64,
    pub withhold_value: f64,
    /// PPS attains the best value at every subgame pair, within `EPS`.
    pub is_best_response: bool,
    /// First pair, in table order, where deviating gains more than `EPS`.
    pub profitable_deviation: Option<SubgamePair>,
    /// Ordered by `(|M| + |T|, M, T)`.
    pub states: Vec<PairValue>,
}

/// Aggregate solve rate of the non-deviators per publicly available task.
fn rival_rates(g: &GameSpec, deviator: usize, public_open: TaskSet) -> Vec<(usize, f64)> {
    let avail = g.network().frontier(public_open);
    let mut rates: Vec<(usize, f64)> = Vec::new();
    for j in (0..g.n()).filter(|&j| j != deviator) {
        let u = herding_target(g, j, avail);
        match rates.iter_mut().find(|(t, _)| *t == u) {
            Some(entry) => entry.1 += g.rate(j, u),
            None => rates.push((u, g.rate(j, u))),
        }
    }
    rates.sort_by_key(|&(u, _)| u);
    rates
}

pub fn best_response_value(g: &GameSpec, agent: usize, caps: Caps) -> Result<BestResponseResult> {
    if g.n() < 2 {
        return Err(Error::SingleAgent);
    }
    if agent >= g.n() {
        return Err(Error::UnknownAgent(agent.to_string()));
    }
    let net = g.network();
    let pairs = net.subgame_pairs(caps.state_cap)?;
    let index: HashMap<(u64, u64), usize> = pairs
        .iter()
        .enumerate()
        .map(|(k, p)| ((p.public_open.bits(), p.agent_open.bits()), k))
        .collect();
    let at = |m: TaskSet, t: TaskSet| index[&(m.bits(), t.bits())];
    let reward_of = |s: TaskSet| -> f64 { s.iter().map(|u| g.reward(u)).sum() };

    let mut pps = vec![0.0; pairs.len()];
    let mut best = vec![0.0; pairs.len()];
    let mut withhold = vec![0.0; pairs.len()];
    let mut actions = vec![Action::Share; pairs.len()];
    let mut rivals_cache: HashMap<u64, Vec<(usize, f64)>> = HashMap::new();

    for (k, pair) in pairs.iter().enumerate() {
        let (m_open, t_open) = (pair.public_open, pair.agent_open);
        if t_open.is_empty() {
            let all = reward_of(m_open);
            pps[k] = all;
            best[k] = all;
            withhold[k] = all;
            continue;
        }
        let rivals = rivals_cache
            .entry(m_open.bits())
            .or_insert_with(|| rival_rates(g, agent, m_open))
            .clone();
        let successors = |v: usize| -> (usize, Vec<(f64, usize)>) {
            let own = at(m_open, t_open.without(v));
            let others = rivals
                .iter()
                .map(|&(u, rate)| {
                    let next = if t_open.contains(u) {
                        at(m_open.without(u), t_open.without(u))
                    } else {
                        at(m_open.without(u), t_open)
                    };
                    (rate, next)
                })
                .collect();
            (own, others)
        };
        let work = |v: usize, table: &[f64]| -> f64 {
            let mu = g.rate(agent, v);
            let (own, others) = successors(v);
            let total: f64 = mu + others.iter().map(|(r, _)| r).sum::<f64>();
            let weighted: f64 =
                mu * table[own] + others.iter().map(|&(r, s)| r * table[s]).sum::<f64>();
            weighted / total
        };
        let can_work = net.frontier(t_open);
        let captive = pair.captive();

        pps[k] = if captive.is_empty() {
            work(herding_target(g, agent, can_work), &pps)
        } else {
            reward_of(captive) + pps[at(t_open, t_open)]
        };
        withhold[k] = can_work
            .iter()
            .map(|v| work(v, &withhold))
            .fold(f64::NEG_INFINITY, f64::max);

        let mut options: Vec<(Action, f64)> = Vec::with_capacity(can_work.len() + 1);
        if !captive.is_empty() {
            options.push((Action::Share, reward_of(captive) + best[at(t_open, t_open)]));
        }
        options.extend(can_work.iter().map(|v| (Action::Work(v), work(v, &best))));
        let top = options
            .iter()
            .map(|o| o.1)
            .fold(f64::NEG_INFINITY, f64::max);
        best[k] = top;
        actions[k] = options
            .iter()
            .find(|o| o.1 >= top - EPS)
            .map(|o| o.0)
            .expect("at least one option");
    }

    let root = at(TaskSet::full(g.m()), TaskSet::full(g.m()));
    let profitable_deviation = (0..pairs.len())
        .find(|&k| best[k] > pps[k] + EPS)
        .map(|k| pairs[k]);
    let states = pairs
        .iter()
        .enumerate()
        .map(|(k, &pair)| PairValue {
            pair,
            pps: pps[k],
            best: best[k],
            withhold: withhold[k],
            action: actions[k],
        })
        .collect();
    Ok(BestResponseResult {
        agent,
        pps_value: pps[root],
        best_value: best[root],
        withhold_value: withhold[root],
        is_best_response: profitable_deviation.is_none(),
        profitable_deviation,
        states,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgentVerdict {
    pub agent: usize,
    pub pps_value: f64,
    pub best_value: f64,
    pub withhold_value: f64,
    pub is_best_response: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashReport {
    pub holds: bool,
    pub agents: Vec<AgentVerdict>,
    /// Agents with a profitable deviation somewhere.
    pub deviators: Vec<usize>,
    /// Whether every agent ranks the tasks identically by virtual reward;
    /// otherwise each agent herds on their own argmax.
    pub common_herding_order: bool,
}

fn gamma_order(g: &GameSpec, agent: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by(|&a, &b| {
        g.gamma(agent, b)
            .total_cmp(&g.gamma(agent, a))
            .then(a.cmp(&b))
    });
    order
}

/// Runs [`best_response_value`] for every agent. A lone agent has nobody to
/// deviate against, so the report holds trivially.
pub fn verify_nash_pps(g: &GameSpec, caps: Caps) -> Result<NashReport> {
    if g.n() < 2 {
        return Ok(NashReport {
            holds: true,
            agents: Vec::new(),
            deviators: Vec::new(),
            common_herding_order: true,
        });
    }
    let agents: Vec<AgentVerdict> = (0..g.n())
        .into_par_iter()
        .map(|i| {
            best_response_value(g, i, caps).map(|r| AgentVerdict {
                agent: i,
                pps_value: r.pps_value,
                best_value: r.best_value,
                withhold_value: r.withhold_value,
                is_best_response: r.is_best_response,
            })
        })
        .collect::<Result<_>>()?;
    let deviators: Vec<usize> = agents
        .iter()
        .filter(|a| !a.is_best_response)
        .map(|a| a.agent)
        .collect();
    let first = gamma_order(g, 0);
    Ok(NashReport {
        holds: deviators.is_empty(),
        common_herding_order: (1..g.n()).all(|i| gamma_order(g, i) == first),
        agents,
        deviators,
    })
}
