use std::collections::HashMap;

use serde::Serialize;

use super::{herding_makespan, Caps};
use crate::error::{Error, Result};
use crate::model::{GameSpec, EPS};
use crate::network::TaskSet;

/// Optimal value and a minimizing assignment at one knowledge state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptState {
    pub solved: TaskSet,
    pub value: f64,
    /// Task index each agent works on; empty once everything is solved.
    pub assignment: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MakespanResult {
    pub herding: f64,
    pub optimal: f64,
    pub ratio: f64,
    /// Ordered by ascending number of solved tasks.
    pub states: Vec<OptState>,
}

fn assignment_count(choices: usize, agents: usize) -> u128 {
    (0..agents).fold(1u128, |acc, _| acc.saturating_mul(choices as u128))
}

/// Next assignment in odometer order, last agent fastest; false after the last.
fn advance(choice: &mut [usize], base: usize) -> bool {
    for digit in choice.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Expected makespan of the best centralized policy. At each knowledge state
/// the policy fixes one task per agent; the minimum over such vertex
/// assignments equals the minimum over mixed effort splits because the
/// one-step objective is linear-fractional in the split.
pub fn opt_makespan(g: &GameSpec, caps: Caps) -> Result<MakespanResult> {
    let net = g.network();
    let n = g.n();
    let m = g.m();
    let mut states = net.enumerate_knowledge_states(caps.state_cap)?;
    states.reverse();
    let mut values: HashMap<u64, f64> = HashMap::with_capacity(states.len());
    let mut out = Vec::with_capacity(states.len());
    let full = TaskSet::full(m);

    for ks in &states {
        let solved = ks.solved();
        if solved == full {
            values.insert(solved.bits(), 0.0);
            out.push(OptState {
                solved,
                value: 0.0,
                assignment: Vec::new(),
            });
            continue;
        }
        let avail: Vec<usize> = net.frontier(solved.complement(m)).iter().collect();
        let size = assignment_count(avail.len(), n);
        if size > caps.assignment_cap {
            return Err(Error::AssignmentSpaceExceeded {
                size,
                limit: caps.assignment_cap,
            });
        }
        let next: Vec<f64> = avail
            .iter()
            .map(|&u| values[&solved.with(u).bits()])
            .collect();
        let mut choice = vec![0usize; n];
        let mut best = (f64::INFINITY, Vec::new());
        loop {
            let mut lambda = vec![0.0; avail.len()];
            for (i, &k) in choice.iter().enumerate() {
                lambda[k] += g.rate(i, avail[k]);
            }
            let rate: f64 = lambda.iter().sum();
            let weighted: f64 = lambda.iter().zip(&next).map(|(l, v)| l * v).sum();
            let value = (1.0 + weighted) / rate;
            if value < best.0 {
                best = (value, choice.iter().map(|&k| avail[k]).collect());
            }
            if !advance(&mut choice, avail.len()) {
                break;
            }
        }
        values.insert(solved.bits(), best.0);
        out.push(OptState {
            solved,
            value: best.0,
            assignment: best.1,
        });
    }
    out.reverse();
    let optimal = values[&0];
    let herding = herding_makespan(g, full)?;
    Ok(MakespanResult {
        herding,
        optimal,
        ratio: herding / optimal,
        states: out,
    })
}

/// `T_H / T_OPT`, checked against `1 <= ratio <= m`.
pub fn poa_ratio(g: &GameSpec, caps: Caps) -> Result<f64> {
    let r = opt_makespan(g, caps)?.ratio;
    let m = g.m() as f64;
    if r < 1.0 - EPS || r > m + EPS {
        return Err(Error::BoundViolated(format!(
            "price of anarchy {r} outside [1, {m}]"
        )));
    }
    Ok(r)
}
