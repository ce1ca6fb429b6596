//! Event-driven simulation of one play of the game.
//!
//! Between events every agent works at a constant rate on its chosen tasks, so
//! the time to the next solve is exponential in the total rate and the solver
//! is drawn in proportion to the individual rates. All clocks are redrawn
//! after every event, which memorylessness permits.

use serde::Serialize;

use super::rng::Stream;
use super::Strategy;
use crate::analysis::{argmax_lowest, herding_target};
use crate::error::{Error, Result};
use crate::model::GameSpec;
use crate::network::TaskSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Solve,
    Share,
    Claim,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub agent: usize,
    pub kind: EventKind,
    pub task: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimOptions {
    pub record_events: bool,
    /// Times at which all clocks are redrawn without any state change.
    pub resample_at: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    /// First time every task is solved by at least one agent.
    pub makespan: f64,
    /// Rewards claimed by each agent.
    pub rewards: Vec<f64>,
    pub events: Vec<Event>,
    pub seed: u64,
    pub stream: u64,
}

pub fn validate_profile(g: &GameSpec, profile: &[Strategy]) -> Result<()> {
    if profile.len() != g.n() {
        return Err(Error::InvalidStrategy(format!(
            "{} strategies for {} agents",
            profile.len(),
            g.n()
        )));
    }
    profile.iter().try_for_each(|s| s.validate(g.m()))
}

/// One replication on stream 0 of `seed`, with the event log recorded.
pub fn simulate_once(g: &GameSpec, profile: &[Strategy], seed: u64) -> Result<SimResult> {
    let opts = SimOptions {
        record_events: true,
        ..SimOptions::default()
    };
    simulate_with(g, profile, seed, 0, &opts)
}

pub fn simulate_with(
    g: &GameSpec,
    profile: &[Strategy],
    seed: u64,
    stream: u64,
    opts: &SimOptions,
) -> Result<SimResult> {
    validate_profile(g, profile)?;
    Ok(
        Play::new(g, profile, opts.record_events).run(
            Stream::new(seed, stream),
            opts,
            seed,
            stream,
        ),
    )
}

struct Play<'a> {
    g: &'a GameSpec,
    profile: &'a [Strategy],
    full: TaskSet,
    /// Tasks each agent knows: public ones plus its own captive solutions.
    known: Vec<TaskSet>,
    public: TaskSet,
    solved_by_anyone: TaskSet,
    deadline: Vec<f64>,
    rewards: Vec<f64>,
    events: Vec<Event>,
    record: bool,
    now: f64,
    makespan: Option<f64>,
}

impl<'a> Play<'a> {
    fn new(g: &'a GameSpec, profile: &'a [Strategy], record: bool) -> Self {
        Play {
            g,
            profile,
            full: TaskSet::full(g.m()),
            known: vec![TaskSet::EMPTY; g.n()],
            public: TaskSet::EMPTY,
            solved_by_anyone: TaskSet::EMPTY,
            deadline: vec![f64::INFINITY; g.n()],
            rewards: vec![0.0; g.n()],
            events: Vec::new(),
            record,
            now: 0.0,
            makespan: None,
        }
    }

    fn log(&mut self, agent: usize, kind: EventKind, task: usize) {
        if self.record {
            self.events.push(Event {
                time: self.now,
                agent,
                kind,
                task,
            });
        }
    }

    /// Effort split of agent `i` over its available tasks.
    fn effort(&self, i: usize) -> Vec<(usize, f64)> {
        let avail = self
            .g
            .network()
            .frontier(self.known[i].complement(self.g.m()));
        match &self.profile[i] {
            Strategy::PpsSplit { weights } => {
                let key = |u: usize| self.g.reward(u) * self.g.rate(i, u);
                let top = key(argmax_lowest(avail, key));
                let tol = 1e-12 * top.abs().max(1.0);
                let support: Vec<usize> = avail.iter().filter(|&u| key(u) >= top - tol).collect();
                let w: Vec<f64> = match weights {
                    Some(w) if support.iter().any(|&u| w[u] > 0.0) => {
                        support.iter().map(|&u| w[u]).collect()
                    }
                    _ => vec![1.0; support.len()],
                };
                let sum: f64 = w.iter().sum();
                support
                    .into_iter()
                    .zip(w)
                    .filter(|&(_, x)| x > 0.0)
                    .map(|(u, x)| (u, x / sum))
                    .collect()
            }
            _ => vec![(herding_target(self.g, i, avail), 1.0)],
        }
    }

    fn run(mut self, mut rng: Stream, opts: &SimOptions, seed: u64, stream: u64) -> SimResult {
        let mut resample: Vec<f64> = opts
            .resample_at
            .iter()
            .copied()
            .filter(|t| t.is_finite() && *t >= 0.0)
            .collect();
        resample.sort_by(f64::total_cmp);
        let mut resample = resample.into_iter().peekable();

        while self.public != self.full {
            let mut clocks: Vec<(usize, usize, f64)> = Vec::new();
            for i in (0..self.g.n()).filter(|&i| self.known[i] != self.full) {
                for (u, x) in self.effort(i) {
                    clocks.push((i, u, x * self.g.rate(i, u)));
                }
            }
            let total: f64 = clocks.iter().map(|c| c.2).sum();
            let t_solve = if total > 0.0 {
                self.now + rng.exponential(total)
            } else {
                f64::INFINITY
            };
            let (who, t_release) = self.deadline.iter().copied().enumerate().fold(
                (0, f64::INFINITY),
                |acc, (i, t)| if t < acc.1 { (i, t) } else { acc },
            );
            let t_noop = resample.peek().copied().unwrap_or(f64::INFINITY);
            assert!(
                t_solve.min(t_release).is_finite(),
                "simulation stalled with unshared solutions"
            );

            if t_noop < t_solve && t_noop < t_release {
                self.now = self.now.max(t_noop);
                resample.next();
            } else if t_release <= t_solve {
                self.now = t_release;
                self.share(who);
            } else {
                self.now = t_solve;
                let mut pick = rng.uniform() * total;
                let mut solver = clocks[clocks.len() - 1];
                for &c in &clocks {
                    if pick < c.2 {
                        solver = c;
                        break;
                    }
                    pick -= c.2;
                }
                self.solve(solver.0, solver.1);
            }
        }
        SimResult {
            makespan: self.makespan.expect("all tasks solved"),
            rewards: self.rewards,
            events: self.events,
            seed,
            stream,
        }
    }

    fn solve(&mut self, i: usize, u: usize) {
        self.known[i] = self.known[i].with(u);
        self.log(i, EventKind::Solve, u);
        self.solved_by_anyone = self.solved_by_anyone.with(u);
        if self.makespan.is_none() && self.solved_by_anyone == self.full {
            self.makespan = Some(self.now);
        }
        if self.known[i] == self.full || self.profile[i].shares_immediately() {
            self.share(i);
        } else if let Strategy::Delay { tau } = self.profile[i] {
            self.deadline[i] = self.now + tau;
        }
    }

    /// Agent `i` publishes every captive solution and claims its reward. Other
    /// agents holding solutions then react: delayers release early, and anyone
    /// who now knows everything releases what is left.
    fn share(&mut self, i: usize) {
        self.deadline[i] = f64::INFINITY;
        let batch = self.known[i].difference(self.public);
        if batch.is_empty() {
            return;
        }
        for u in batch.iter() {
            self.log(i, EventKind::Share, u);
            self.log(i, EventKind::Claim, u);
            self.rewards[i] += self.g.reward(u);
        }
        self.public = self.public.union(batch);
        for k in &mut self.known {
            *k = k.union(batch);
        }
        for j in (0..self.g.n()).filter(|&j| j != i) {
            let holding = !self.known[j].difference(self.public).is_empty();
            let delayer = matches!(self.profile[j], Strategy::Delay { .. });
            if holding && (delayer || self.known[j] == self.full) {
                self.share(j);
            } else if !holding {
                self.deadline[j] = f64::INFINITY;
            }
        }
    }
}
