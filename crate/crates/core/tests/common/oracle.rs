//! Exact rational reference computations, written independently of the
//! library: exhaustive subset filters and memoized recursions.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap()
}

pub struct Game {
    /// All transitive predecessors of each task, as a bitmask.
    pub preds: Vec<u64>,
    /// `rates[i][u]`.
    pub rates: Vec<Vec<Q>>,
    pub rewards: Vec<Q>,
}

impl Game {
    fn m(&self) -> usize {
        self.preds.len()
    }

    fn n(&self) -> usize {
        self.rates.len()
    }

    fn total(&self, u: usize) -> Q {
        self.rates.iter().map(|r| r[u].clone()).sum()
    }

    fn frontier(&self, open: u64) -> Vec<usize> {
        (0..self.m())
            .filter(|&u| open >> u & 1 == 1 && self.preds[u] & open == 0)
            .collect()
    }

    fn gamma(&self, i: usize, u: usize) -> Q {
        let own = &self.rates[i][u];
        let rest = self.total(u) - own;
        &self.rewards[u] * own * &rest / (own + &rest)
    }

    /// Highest virtual reward, lowest index on exact ties.
    fn target(&self, i: usize, open: u64) -> usize {
        let mut best: Option<(usize, Q)> = None;
        for u in self.frontier(open) {
            let g = self.gamma(i, u);
            if best.as_ref().is_none_or(|(_, b)| g > *b) {
                best = Some((u, g));
            }
        }
        best.unwrap().0
    }

    fn reward_of(&self, set: u64) -> Q {
        (0..self.m())
            .filter(|&u| set >> u & 1 == 1)
            .map(|u| self.rewards[u].clone())
            .sum()
    }
}

/// Predecessor-closed subsets by exhaustive filtering.
pub fn closed_sets(preds: &[u64]) -> Vec<u64> {
    (0..1u64 << preds.len())
        .filter(|&s| (0..preds.len()).all(|u| s >> u & 1 == 0 || preds[u] & !s == 0))
        .collect()
}

/// Number of `(M, T)` with `T ⊆ M` and both complements closed.
pub fn nested_pair_count(preds: &[u64]) -> usize {
    let full = (1u64 << preds.len()) - 1;
    let closed = closed_sets(preds);
    let mut count = 0;
    for &a in &closed {
        for &b in &closed {
            let (m_open, t_open) = (full & !a, full & !b);
            if t_open & !m_open == 0 {
                count += 1;
            }
        }
    }
    count
}

pub fn herding_makespan(g: &Game) -> Q {
    (0..g.m())
        .map(|u| Q::from_integer(1.into()) / g.total(u))
        .sum()
}

/// Minimum expected makespan by recursion over all deterministic
/// agent-to-task assignments.
pub fn opt_makespan(g: &Game) -> Q {
    fn assignments(choices: &[usize], n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for rest in assignments(choices, n - 1) {
            for &c in choices {
                let mut a = rest.clone();
                a.push(c);
                out.push(a);
            }
        }
        out
    }
    fn value(g: &Game, open: u64, memo: &mut HashMap<u64, Q>) -> Q {
        if open == 0 {
            return Q::zero();
        }
        if let Some(v) = memo.get(&open) {
            return v.clone();
        }
        let avail = g.frontier(open);
        let next: Vec<Q> = avail
            .iter()
            .map(|&u| value(g, open & !(1 << u), memo))
            .collect();
        let mut best: Option<Q> = None;
        for a in assignments(&(0..avail.len()).collect::<Vec<_>>(), g.n()) {
            let mut rate = Q::zero();
            let mut acc = Q::from_integer(1.into());
            for (i, &k) in a.iter().enumerate() {
                let r = &g.rates[i][avail[k]];
                rate += r;
                acc += r * &next[k];
            }
            let v = acc / rate;
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        let v = best.unwrap();
        memo.insert(open, v.clone());
        v
    }
    value(g, (1u64 << g.m()) - 1, &mut HashMap::new())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Mode {
    Pps,
    Best,
    Withhold,
}

/// Root values `(pps, best, withhold)` for `deviator`.
pub fn deviation_values(g: &Game, deviator: usize) -> (Q, Q, Q) {
    fn value(
        g: &Game,
        i: usize,
        m_open: u64,
        t_open: u64,
        mode: Mode,
        memo: &mut HashMap<(u64, u64, Mode), Q>,
    ) -> Q {
        if t_open == 0 {
            return g.reward_of(m_open);
        }
        if let Some(v) = memo.get(&(m_open, t_open, mode)) {
            return v.clone();
        }
        let rivals: Vec<(usize, Q)> = (0..g.n())
            .filter(|&j| j != i)
            .map(|j| {
                let u = g.target(j, m_open);
                (u, g.rates[j][u].clone())
            })
            .collect();
        let work = |v: usize, memo: &mut HashMap<(u64, u64, Mode), Q>| -> Q {
            let mu = g.rates[i][v].clone();
            let mut rate = mu.clone();
            let mut acc = mu * value(g, i, m_open, t_open & !(1 << v), mode, memo);
            for (u, r) in &rivals {
                let next_t = if t_open >> u & 1 == 1 {
                    t_open & !(1 << u)
                } else {
                    t_open
                };
                rate += r;
                acc += r * value(g, i, m_open & !(1 << u), next_t, mode, memo);
            }
            acc / rate
        };
        let captive = m_open & !t_open;
        let share = |memo: &mut HashMap<(u64, u64, Mode), Q>| {
            g.reward_of(captive) + value(g, i, t_open, t_open, mode, memo)
        };
        let v = match mode {
            Mode::Pps if captive != 0 => share(memo),
            Mode::Pps => work(g.target(i, t_open), memo),
            _ => {
                let mut best: Option<Q> = None;
                if mode == Mode::Best && captive != 0 {
                    best = Some(share(memo));
                }
                for v in g.frontier(t_open) {
                    let w = work(v, memo);
                    if best.as_ref().is_none_or(|b| w > *b) {
                        best = Some(w);
                    }
                }
                best.unwrap()
            }
        };
        memo.insert((m_open, t_open, mode), v.clone());
        v
    }
    let full = (1u64 << g.m()) - 1;
    let mut memo = HashMap::new();
    (
        value(g, deviator, full, full, Mode::Pps, &mut memo),
        value(g, deviator, full, full, Mode::Best, &mut memo),
        value(g, deviator, full, full, Mode::Withhold, &mut memo),
    )
}

/// Game with every `a_i(u)` of the given separable form.
pub fn separable(preds: Vec<u64>, abilities: &[Q], simplicities: &[Q], rewards: Vec<Q>) -> Game {
    Game {
        preds,
        rates: abilities
            .iter()
            .map(|a| simplicities.iter().map(|s| a * s).collect())
            .collect(),
        rewards,
    }
}

/// The coalition `members` merged into a single agent placed first.
pub fn merged(g: &Game, members: &[usize]) -> Game {
    let m = g.m();
    let mut rates = vec![(0..m)
        .map(|u| members.iter().map(|&j| g.rates[j][u].clone()).sum())
        .collect()];
    rates.extend(
        (0..g.n())
            .filter(|j| !members.contains(j))
            .map(|j| g.rates[j].clone()),
    );
    Game {
        preds: g.preds.clone(),
        rates,
        rewards: g.rewards.clone(),
    }
}

pub fn line_preds(m: usize) -> Vec<u64> {
    (0..m).map(|u| (1u64 << u) - 1).collect()
}

pub fn parallel_preds(m: usize) -> Vec<u64> {
    vec![0; m]
}
