//! Sufficient-condition checkers for partial-progress sharing.
//!
//! Every inequality is evaluated with denominators cleared, then compared with
//! the absolute tolerance [`EPS`](super::EPS): weak inequalities pass when
//! `lhs - rhs >= -EPS`, strict ones when `lhs - rhs > EPS`. A failing report
//! carries exactly one witness, the smallest violator in the checker's
//! documented iteration order.

use serde::Serialize;

use super::{sa_thresholds, GameSpec, SaProfile, EPS};
use crate::error::{Error, Result};

pub const DEFAULT_COALITION_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    LineNe,
    LineCore,
    LineStackelberg,
    DagNe,
    DagSa,
    DagStackelberg,
    DagCore,
}

impl Theorem {
    pub const ALL: [Theorem; 7] = [
        Theorem::LineNe,
        Theorem::LineCore,
        Theorem::LineStackelberg,
        Theorem::DagNe,
        Theorem::DagSa,
        Theorem::DagStackelberg,
        Theorem::DagCore,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Theorem::LineNe => "line-ne",
            Theorem::LineCore => "line-core",
            Theorem::LineStackelberg => "line-stackelberg",
            Theorem::DagNe => "dag-ne",
            Theorem::DagSa => "dag-sa",
            Theorem::DagStackelberg => "dag-stackelberg",
            Theorem::DagCore => "dag-core",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Theorem> {
        Theorem::ALL.into_iter().find(|t| t.tag() == tag)
    }
}

/// Who a witness is about. Agent and coalition members are agent indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Subject {
    Agent(usize),
    Coalition(Vec<usize>),
    /// Two agents whose orderings disagree.
    AgentPair(usize, usize),
    /// The common task ordering.
    Order,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    /// A pairwise inequality failed.
    Inequality,
    /// Two tasks have equal keys where a strict order is required.
    Tie,
    /// Two agents rank a pair of tasks differently.
    Disagreement,
    /// The order ranks a task below one reachable from it.
    Reachability,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub subject: Subject,
    /// Task indices `(u, v)`.
    pub tasks: (usize, usize),
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Thresholds {
    pub alpha_ne: Option<f64>,
    pub alpha_c: Option<f64>,
    pub alpha_s: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub theorem: Theorem,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub thresholds: Thresholds,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(theorem: Theorem, witness: Option<Witness>, thresholds: Thresholds) -> Self {
        ConditionReport {
            theorem,
            pass: witness.is_none(),
            witnesses: witness.into_iter().collect(),
            thresholds,
            notes: Vec::new(),
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

fn weak_ge(lhs: f64, rhs: f64) -> bool {
    lhs - rhs >= -EPS
}

fn strict_gt(lhs: f64, rhs: f64) -> bool {
    lhs - rhs > EPS
}

fn sa_threshold_fields(g: &GameSpec) -> Thresholds {
    match g.sa().filter(|p| p.abilities().len() >= 2) {
        Some(p) => {
            let t = sa_thresholds(p, g.stackelberg().filter(|s| !s.is_empty()))
                .expect("validated profile");
            Thresholds {
                alpha_ne: Some(t.alpha_ne),
                alpha_c: Some(t.alpha_c),
                alpha_s: t.alpha_s,
                beta: None,
            }
        }
        None => Thresholds::default(),
    }
}

/// Precedence pairs `(u, v)`, `u` before `v`, in path order.
fn line_pairs(g: &GameSpec) -> Result<Vec<(usize, usize)>> {
    let order = g.network().line_order().ok_or(Error::NotALine)?;
    let mut pairs = Vec::new();
    for (k, &u) in order.iter().enumerate() {
        for &v in &order[k + 1..] {
            pairs.push((u, v));
        }
    }
    Ok(pairs)
}

/// `R_u a_{-X}(u) / (R_v a_{-X}(v)) >= a_X(v) / a(v)` over precedence pairs,
/// with `X` an agent or a coalition given as a bitmask.
fn line_inequality(
    g: &GameSpec,
    pairs: &[(usize, usize)],
    group: u64,
    upstream_rate: impl Fn(usize) -> f64,
) -> Option<((usize, usize), f64, f64)> {
    let apt = g.matrix();
    for &(u, v) in pairs {
        let inside_v = apt.coalition(group, v);
        let outside_v = apt.total(v) - inside_v;
        let lhs = g.reward(u) * upstream_rate(u) * apt.total(v);
        let rhs = g.reward(v) * outside_v * inside_v;
        if !weak_ge(lhs, rhs) {
            return Some(((u, v), lhs, rhs));
        }
    }
    None
}

/// Line game: PPS is a subgame-perfect equilibrium when, for every agent `i`
/// and every `u` preceding `v`,
/// `R_u a_{-i}(u) (a_i(v) + a_{-i}(v)) >= R_v a_{-i}(v) a_i(v)`.
///
/// A single agent passes vacuously.
pub fn check_line_ne(g: &GameSpec) -> Result<ConditionReport> {
    let pairs = line_pairs(g)?;
    let thresholds = sa_threshold_fields(g);
    if g.n() < 2 {
        return Ok(ConditionReport::new(Theorem::LineNe, None, thresholds)
            .note("single agent: no competitor, condition holds vacuously"));
    }
    let apt = g.matrix();
    for i in 0..g.n() {
        if let Some((tasks, lhs, rhs)) = line_inequality(g, &pairs, 1 << i, |u| apt.others(i, u)) {
            let w = Witness {
                kind: WitnessKind::Inequality,
                subject: Subject::Agent(i),
                tasks,
                lhs,
                rhs,
            };
            return Ok(ConditionReport::new(Theorem::LineNe, Some(w), thresholds));
        }
    }
    Ok(ConditionReport::new(Theorem::LineNe, None, thresholds))
}

/// Proper nonempty coalitions ordered by size, then bitmask.
pub(crate) fn proper_coalitions(n: usize) -> Vec<u64> {
    let full = (1u64 << n) - 1;
    let mut all: Vec<u64> = (1..full).collect();
    all.sort_by_key(|c| (c.count_ones(), *c));
    all
}

pub(crate) fn coalition_members(c: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&j| c >> j & 1 == 1).collect()
}

/// Line game: the PPS payoff vector is in the core when the line inequality
/// holds with `(a_C, a_{-C})` in place of `(a_i, a_{-i})` for every proper
/// nonempty coalition `C`.
pub fn check_line_core(g: &GameSpec, coalition_limit: usize) -> Result<ConditionReport> {
    let pairs = line_pairs(g)?;
    let n = g.n();
    if n < 2 {
        return Err(Error::SingleAgent);
    }
    if n > coalition_limit || n > 63 {
        return Err(Error::CoalitionSpaceExceeded {
            agents: n,
            limit: coalition_limit.min(63),
        });
    }
    let apt = g.matrix();
    let thresholds = sa_threshold_fields(g);
    for c in proper_coalitions(n) {
        let outside = |u| apt.total(u) - apt.coalition(c, u);
        if let Some((tasks, lhs, rhs)) = line_inequality(g, &pairs, c, outside) {
            let w = Witness {
                kind: WitnessKind::Inequality,
                subject: Subject::Coalition(coalition_members(c, n)),
                tasks,
                lhs,
                rhs,
            };
            return Ok(ConditionReport::new(Theorem::LineCore, Some(w), thresholds));
        }
    }
    Ok(ConditionReport::new(Theorem::LineCore, None, thresholds))
}

/// Line game with Stackelberg leaders `L`: for every `i ∉ L` and `u` before
/// `v`, `R_u β(u) (a_i(v) + a_{-i}(v)) >= R_v a_{-i}(v) a_i(v)` with
/// `β(u) = Σ_{j∈L} a_j(u)`.
pub fn check_line_stackelberg(g: &GameSpec) -> Result<ConditionReport> {
    let pairs = line_pairs(g)?;
    let leaders = match g.stackelberg() {
        None | Some([]) => return Err(Error::EmptyStackelbergSet),
        Some(l) => l,
    };
    let mask: u64 = leaders.iter().fold(0, |acc, &j| acc | 1 << j);
    let apt = g.matrix();
    let thresholds = sa_threshold_fields(g);
    if leaders.len() == g.n() {
        return Ok(
            ConditionReport::new(Theorem::LineStackelberg, None, thresholds)
                .note("every agent is a Stackelberg leader: nothing to check"),
        );
    }
    for i in (0..g.n()).filter(|i| mask >> i & 1 == 0) {
        if let Some((tasks, lhs, rhs)) =
            line_inequality(g, &pairs, 1 << i, |u| apt.coalition(mask, u))
        {
            let w = Witness {
                kind: WitnessKind::Inequality,
                subject: Subject::Agent(i),
                tasks,
                lhs,
                rhs,
            };
            return Ok(ConditionReport::new(
                Theorem::LineStackelberg,
                Some(w),
                thresholds,
            ));
        }
    }
    Ok(ConditionReport::new(
        Theorem::LineStackelberg,
        None,
        thresholds,
    ))
}

/// Tasks sorted by descending key, ties broken by ascending index.
fn descending(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    order
}

/// First adjacent pair in `order` whose keys are not strictly separated.
fn first_tie(keys: &[f64], order: &[usize]) -> Option<(usize, usize)> {
    order
        .windows(2)
        .find(|w| !strict_gt(keys[w[0]], keys[w[1]]))
        .map(|w| (w[0], w[1]))
}

/// Shared body of the monotonicity checkers: every agent's key must induce the
/// same strict order, and that order must rank `u` above `v` whenever `v` is
/// reachable from `u`.
fn check_common_order(
    g: &GameSpec,
    theorem: Theorem,
    key: impl Fn(usize, usize) -> f64,
) -> Result<ConditionReport> {
    if g.n() < 2 {
        return Err(Error::SingleAgent);
    }
    let thresholds = sa_threshold_fields(g);
    let keys: Vec<Vec<f64>> = (0..g.n())
        .map(|i| (0..g.m()).map(|u| key(i, u)).collect())
        .collect();
    let orders: Vec<Vec<usize>> = keys.iter().map(|k| descending(k)).collect();

    for (i, (k, order)) in keys.iter().zip(&orders).enumerate() {
        if let Some((u, v)) = first_tie(k, order) {
            let w = Witness {
                kind: WitnessKind::Tie,
                subject: Subject::Agent(i),
                tasks: (u, v),
                lhs: k[u],
                rhs: k[v],
            };
            return Ok(ConditionReport::new(theorem, Some(w), thresholds));
        }
    }
    for i in 1..g.n() {
        if let Some(pos) = (0..g.m()).find(|&p| orders[i][p] != orders[0][p]) {
            // agent 0 ranks u higher than v, agent i ranks v higher than u
            let u = orders[0][pos];
            let v = orders[i][pos];
            let w = Witness {
                kind: WitnessKind::Disagreement,
                subject: Subject::AgentPair(0, i),
                tasks: (u, v),
                lhs: keys[i][u],
                rhs: keys[i][v],
            };
            return Ok(ConditionReport::new(theorem, Some(w), thresholds));
        }
    }
    for (u, v) in g.network().reachable_pairs() {
        if !strict_gt(keys[0][u], keys[0][v]) {
            let w = Witness {
                kind: WitnessKind::Reachability,
                subject: Subject::Order,
                tasks: (u, v),
                lhs: keys[0][u],
                rhs: keys[0][v],
            };
            return Ok(ConditionReport::new(theorem, Some(w), thresholds));
        }
    }
    Ok(ConditionReport::new(theorem, None, thresholds))
}

/// General network, general aptitudes: all agents must share one strict
/// descending order of virtual rewards `γ_i`, and it must respect
/// reachability.
pub fn check_dag_ne(g: &GameSpec) -> Result<ConditionReport> {
    check_common_order(g, Theorem::DagNe, |i, u| g.gamma(i, u))
}

/// As [`check_dag_ne`] but keyed on `R_u a_i(u)`; passing implies the PPS
/// payoff vector is in the core.
pub fn check_dag_core(g: &GameSpec) -> Result<ConditionReport> {
    check_common_order(g, Theorem::DagCore, |i, u| g.reward(u) * g.rate(i, u))
}

fn require_sa(g: &GameSpec) -> Result<&SaProfile> {
    g.sa().ok_or(Error::NotSeparable)
}

/// Separable aptitudes on any network: `R_v s_v <= R_u s_u` whenever `v` is
/// reachable from `u` (weak).
pub fn check_dag_sa(g: &GameSpec) -> Result<ConditionReport> {
    let p = require_sa(g)?;
    let s = p.simplicities();
    let thresholds = sa_threshold_fields(g);
    for (u, v) in g.network().reachable_pairs() {
        let lhs = g.reward(u) * s[u];
        let rhs = g.reward(v) * s[v];
        if !weak_ge(lhs, rhs) {
            let w = Witness {
                kind: WitnessKind::Reachability,
                subject: Subject::Order,
                tasks: (u, v),
                lhs,
                rhs,
            };
            return Ok(ConditionReport::new(Theorem::DagSa, Some(w), thresholds));
        }
    }
    Ok(ConditionReport::new(Theorem::DagSa, None, thresholds))
}

/// Separable aptitudes with Stackelberg leaders `L`, `β = Σ_{i∈L} a_i`. The
/// candidate order is descending `R_u s_u`; it must be strict, respect
/// reachability, and satisfy `R_u s_u β > a_{-i} R_v s_v` for every agent `i`
/// whenever `u` ranks above `v`.
pub fn check_dag_stackelberg(g: &GameSpec) -> Result<ConditionReport> {
    let p = require_sa(g)?;
    let leaders = match g.stackelberg() {
        None | Some([]) => return Err(Error::EmptyStackelbergSet),
        Some(l) => l,
    };
    let beta: f64 = leaders.iter().map(|&i| p.abilities()[i]).sum();
    let total = p.total_ability();
    let s = p.simplicities();
    let mut thresholds = sa_threshold_fields(g);
    thresholds.beta = Some(beta);
    let products: Vec<f64> = (0..g.m()).map(|u| g.reward(u) * s[u]).collect();
    let order = descending(&products);
    let fail = |w: Witness| {
        Ok(ConditionReport::new(
            Theorem::DagStackelberg,
            Some(w),
            thresholds,
        ))
    };

    if let Some((u, v)) = first_tie(&products, &order) {
        return fail(Witness {
            kind: WitnessKind::Tie,
            subject: Subject::Order,
            tasks: (u, v),
            lhs: products[u],
            rhs: products[v],
        });
    }
    let mut rank = vec![0; g.m()];
    for (r, &u) in order.iter().enumerate() {
        rank[u] = r;
    }
    for (u, v) in g.network().reachable_pairs() {
        if rank[u] > rank[v] {
            return fail(Witness {
                kind: WitnessKind::Reachability,
                subject: Subject::Order,
                tasks: (u, v),
                lhs: products[u],
                rhs: products[v],
            });
        }
    }
    for i in 0..g.n() {
        let others = total - p.abilities()[i];
        for (k, &hi) in order.iter().enumerate() {
            for &lo in &order[k + 1..] {
                let lhs = products[hi] * beta;
                let rhs = others * products[lo];
                if !strict_gt(lhs, rhs) {
                    return fail(Witness {
                        kind: WitnessKind::Inequality,
                        subject: Subject::Agent(i),
                        tasks: (hi, lo),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    let report = ConditionReport::new(Theorem::DagStackelberg, None, thresholds);
    Ok(if leaders.len() == g.n() {
        report.note("every agent is a Stackelberg leader")
    } else {
        report
    })
}
