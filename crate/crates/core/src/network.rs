//! Acyclic subtask networks and their combinatorial state spaces.
//!
//! Subtasks are the *edges* of a directed acyclic graph over nodes. A subtask
//! whose source node is `v` becomes available once every subtask from which it
//! is reachable has been solved. Subtasks are indexed `0..m` in lexicographic
//! order of their identifiers; every set of subtasks is a [`TaskSet`] bitmask
//! over those indices.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of subtasks (one bit per subtask).
pub const MAX_TASKS: usize = 64;

/// Default cap on enumerated states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// A set of subtask indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaskSet(u64);

impl TaskSet {
    pub const EMPTY: TaskSet = TaskSet(0);

    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_TASKS);
        if m == MAX_TASKS {
            TaskSet(u64::MAX)
        } else {
            TaskSet((1u64 << m) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        TaskSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn single(u: usize) -> Self {
        TaskSet(1 << u)
    }

    pub fn contains(self, u: usize) -> bool {
        self.0 >> u & 1 == 1
    }

    pub fn with(self, u: usize) -> Self {
        TaskSet(self.0 | 1 << u)
    }

    pub fn without(self, u: usize) -> Self {
        TaskSet(self.0 & !(1 << u))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: TaskSet) -> Self {
        TaskSet(self.0 | other.0)
    }

    pub fn intersection(self, other: TaskSet) -> Self {
        TaskSet(self.0 & other.0)
    }

    pub fn difference(self, other: TaskSet) -> Self {
        TaskSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: TaskSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement relative to the first `m` subtasks.
    pub fn complement(self, m: usize) -> Self {
        TaskSet::full(m).difference(self)
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(u)
            }
        })
    }
}

impl fmt::Debug for TaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Serialized as the ascending list of member indices.
impl Serialize for TaskSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl FromIterator<usize> for TaskSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(TaskSet::EMPTY, TaskSet::with)
    }
}

/// Set of solved subtasks, closed under predecessors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KnowledgeState(TaskSet);

impl KnowledgeState {
    pub fn empty() -> Self {
        KnowledgeState(TaskSet::EMPTY)
    }

    pub fn solved(self) -> TaskSet {
        self.0
    }

    /// Open (unsolved) subtasks of a network with `m` subtasks.
    pub fn open(self, m: usize) -> TaskSet {
        self.0.complement(m)
    }
}

/// A nested pair of open sets: others know `public_open`'s complement, the
/// distinguished agent knows `agent_open`'s complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SubgamePair {
    pub public_open: TaskSet,
    pub agent_open: TaskSet,
}

impl SubgamePair {
    pub fn root(m: usize) -> Self {
        let all = TaskSet::full(m);
        SubgamePair {
            public_open: all,
            agent_open: all,
        }
    }

    /// Subtasks solved by the agent but not yet publicly shared.
    pub fn captive(self) -> TaskSet {
        self.public_open.difference(self.agent_open)
    }
}

/// Subtask definition as supplied by the caller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub id: String,
    pub from: String,
    pub to: String,
}

impl Subtask {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Subtask {
            id: id.into(),
            from: from.into(),
            to: to.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubtaskNetwork {
    nodes: Vec<String>,
    tasks: Vec<Subtask>,
    /// `preds[v]` = subtasks from which `v` is reachable.
    preds: Vec<TaskSet>,
    /// `succs[u]` = subtasks reachable from `u`.
    succs: Vec<TaskSet>,
}

impl SubtaskNetwork {
    /// Builds a network. When `nodes` is `None` the node set is inferred from
    /// the subtask endpoints.
    pub fn new(nodes: Option<Vec<String>>, mut tasks: Vec<Subtask>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        if tasks.len() > MAX_TASKS {
            return Err(Error::TooManyTasks {
                got: tasks.len(),
                max: MAX_TASKS,
            });
        }
        let mut seen = HashSet::new();
        for t in &tasks {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId(t.id.clone()));
            }
        }
        let nodes: Vec<String> = match nodes {
            Some(list) => {
                let mut set = BTreeSet::new();
                for n in &list {
                    if !set.insert(n.clone()) {
                        return Err(Error::DuplicateId(n.clone()));
                    }
                }
                for t in &tasks {
                    for end in [&t.from, &t.to] {
                        if !set.contains(end) {
                            return Err(Error::DanglingNode {
                                task: t.id.clone(),
                                node: end.clone(),
                            });
                        }
                    }
                }
                set.into_iter().collect()
            }
            None => tasks
                .iter()
                .flat_map(|t| [t.from.clone(), t.to.clone()])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        tasks.sort_by(|a, b| a.id.cmp(&b.id));

        let node_index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        // out[node] = (task index, head node) pairs
        let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
        for (k, t) in tasks.iter().enumerate() {
            out[node_index[t.from.as_str()]].push((k, node_index[t.to.as_str()]));
        }

        let order = topological_order(&out).map_err(|cycle| {
            Error::CycleDetected(cycle.into_iter().map(|i| nodes[i].clone()).collect())
        })?;

        // Subtasks reachable from each node, filled in reverse topological order.
        let mut downstream = vec![TaskSet::EMPTY; nodes.len()];
        for &node in order.iter().rev() {
            let mut acc = TaskSet::EMPTY;
            for &(k, head) in &out[node] {
                acc = acc.with(k).union(downstream[head]);
            }
            downstream[node] = acc;
        }
        let succs: Vec<TaskSet> = tasks
            .iter()
            .map(|t| downstream[node_index[t.to.as_str()]])
            .collect();
        let m = tasks.len();
        let mut preds = vec![TaskSet::EMPTY; m];
        for (u, s) in succs.iter().enumerate() {
            for v in s.iter() {
                preds[v] = preds[v].with(u);
            }
        }

        Ok(SubtaskNetwork {
            nodes,
            tasks,
            preds,
            succs,
        })
    }

    /// Convenience constructor from `(id, from, to)` triples with inferred nodes.
    pub fn from_edges(edges: &[(&str, &str, &str)]) -> Result<Self> {
        Self::new(
            None,
            edges
                .iter()
                .map(|&(id, from, to)| Subtask::new(id, from, to))
                .collect(),
        )
    }

    /// Line of subtasks `ids[0] -> ids[1] -> ...`.
    pub fn line(ids: &[&str]) -> Result<Self> {
        let tasks = ids
            .iter()
            .enumerate()
            .map(|(k, id)| Subtask::new(*id, format!("n{k}"), format!("n{}", k + 1)))
            .collect();
        Self::new(None, tasks)
    }

    /// Subtasks all running between the same two nodes.
    pub fn parallel(ids: &[&str]) -> Result<Self> {
        Self::new(
            None,
            ids.iter().map(|id| Subtask::new(*id, "s", "t")).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn tasks(&self) -> &[Subtask] {
        &self.tasks
    }

    pub fn task_id(&self, u: usize) -> &str {
        &self.tasks[u].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.tasks.binary_search_by(|t| t.id.as_str().cmp(id)).ok()
    }

    pub fn all(&self) -> TaskSet {
        TaskSet::full(self.len())
    }

    /// `L(v)`: the subtasks from which `v` is reachable.
    pub fn predecessors(&self, v: usize) -> TaskSet {
        self.preds[v]
    }

    /// Subtasks reachable from `u`.
    pub fn successors(&self, u: usize) -> TaskSet {
        self.succs[u]
    }

    /// True when `v` is reachable from `u` (and `u != v`).
    pub fn reaches(&self, u: usize, v: usize) -> bool {
        self.succs[u].contains(v)
    }

    /// Ordered pairs `(u, v)` with `v` reachable from `u`, ascending by `(u, v)`.
    pub fn reachable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |u| self.succs[u].iter().map(move |v| (u, v)))
    }

    pub fn is_closed(&self, solved: TaskSet) -> bool {
        solved.iter().all(|u| self.preds[u].is_subset(solved))
    }

    pub fn knowledge_state(&self, solved: TaskSet) -> Result<KnowledgeState> {
        if !solved.is_subset(self.all()) {
            return Err(Error::InvalidPair(format!(
                "solved set {solved:?} has indices outside the network"
            )));
        }
        for u in solved.iter() {
            if let Some(missing) = self.preds[u].difference(solved).iter().next() {
                return Err(Error::InvalidKnowledgeState {
                    task: self.task_id(u).to_string(),
                    missing: self.task_id(missing).to_string(),
                });
            }
        }
        Ok(KnowledgeState(solved))
    }

    /// Knowledge state from subtask identifiers.
    pub fn knowledge_state_of(&self, ids: &[&str]) -> Result<KnowledgeState> {
        let mut set = TaskSet::EMPTY;
        for id in ids {
            let u = self
                .index_of(id)
                .ok_or_else(|| Error::UnknownTask(id.to_string()))?;
            set = set.with(u);
        }
        self.knowledge_state(set)
    }

    /// Available subtasks `{u ∉ solved : L(u) ⊆ solved}`.
    pub fn available_tasks(&self, solved: TaskSet) -> Result<TaskSet> {
        self.knowledge_state(solved)?;
        Ok(self.frontier(solved.complement(self.len())))
    }

    /// Available subtasks given the *open* set; assumes its complement is closed.
    pub fn frontier(&self, open: TaskSet) -> TaskSet {
        open.iter()
            .filter(|&u| self.preds[u].intersection(open).is_empty())
            .collect()
    }

    /// All predecessor-closed subsets, ordered by size then bitmask.
    pub fn enumerate_knowledge_states(&self, cap: usize) -> Result<Vec<KnowledgeState>> {
        Ok(self
            .closed_subsets_within(self.all(), cap)?
            .into_iter()
            .map(KnowledgeState)
            .collect())
    }

    /// Closed subsets of `within` (itself assumed closed).
    fn closed_subsets_within(&self, within: TaskSet, cap: usize) -> Result<Vec<TaskSet>> {
        let mut all = vec![TaskSet::EMPTY];
        let mut layer = vec![TaskSet::EMPTY];
        while !layer.is_empty() {
            let mut next = HashSet::new();
            for &s in &layer {
                let open = within.difference(s);
                for u in open.iter() {
                    if self.preds[u].is_subset(s) {
                        next.insert(s.with(u));
                    }
                }
            }
            let mut next: Vec<TaskSet> = next.into_iter().collect();
            next.sort();
            if all.len() + next.len() > cap {
                return Err(Error::StateSpaceExceeded { cap });
            }
            all.extend_from_slice(&next);
            layer = next;
        }
        Ok(all)
    }

    /// All nested pairs `(M, T)` with `T ⊆ M` and both complements closed,
    /// ordered by `|M| + |T|`, then `M`, then `T`. Every transition of the
    /// subgame dynamics moves to a strictly earlier pair.
    pub fn subgame_pairs(&self, cap: usize) -> Result<Vec<SubgamePair>> {
        let m = self.len();
        let states = self.closed_subsets_within(self.all(), cap)?;
        let mut pairs = Vec::new();
        for &agent_known in &states {
            for public_known in self.closed_subsets_within(agent_known, cap)? {
                if pairs.len() >= cap {
                    return Err(Error::StateSpaceExceeded { cap });
                }
                pairs.push(SubgamePair {
                    public_open: public_known.complement(m),
                    agent_open: agent_known.complement(m),
                });
            }
        }
        pairs.sort_by_key(|p| {
            (
                p.public_open.len() + p.agent_open.len(),
                p.public_open,
                p.agent_open,
            )
        });
        Ok(pairs)
    }

    pub fn validate_pair(&self, pair: SubgamePair) -> Result<()> {
        let m = self.len();
        let all = self.all();
        if !pair.public_open.is_subset(all) || !pair.agent_open.is_subset(all) {
            return Err(Error::InvalidPair("indices outside the network".into()));
        }
        if !pair.agent_open.is_subset(pair.public_open) {
            return Err(Error::InvalidPair(
                "agent open set must be contained in the public open set".into(),
            ));
        }
        for open in [pair.public_open, pair.agent_open] {
            if !self.is_closed(open.complement(m)) {
                return Err(Error::InvalidPair(format!(
                    "complement of {open:?} is not a valid knowledge state"
                )));
            }
        }
        Ok(())
    }

    /// True iff the subtasks form a single directed path.
    pub fn is_linear(&self) -> bool {
        (0..self.len())
            .all(|u| (u + 1..self.len()).all(|v| self.reaches(u, v) || self.reaches(v, u)))
    }

    /// Subtasks in path order, when the network is linear.
    pub fn line_order(&self) -> Option<Vec<usize>> {
        if !self.is_linear() {
            return None;
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&u| self.preds[u].len());
        Some(order)
    }

    /// Some ordering of subtasks compatible with reachability.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&u| (self.preds[u].len(), u));
        order
    }
}

/// Kahn's algorithm; on failure returns one directed cycle (closing node repeated).
fn topological_order(out: &[Vec<(usize, usize)>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = out.len();
    let mut indegree = vec![0usize; n];
    for edges in out {
        for &(_, head) in edges {
            indegree[head] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &(_, head) in &out[v] {
            indegree[head] -= 1;
            if indegree[head] == 0 {
                ready.insert(head);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every remaining node has an incoming edge from another remaining node, so
    // walking predecessors backwards must revisit a node.
    let stuck: Vec<bool> = (0..n).map(|v| indegree[v] > 0).collect();
    let mut pred = vec![usize::MAX; n];
    for (v, edges) in out.iter().enumerate() {
        if !stuck[v] {
            continue;
        }
        for &(_, head) in edges {
            if stuck[head] && pred[head] == usize::MAX {
                pred[head] = v;
            }
        }
    }
    let start = (0..n).find(|&v| stuck[v]).expect("a stuck node exists");
    let mut pos = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut v = start;
    while pos[v] == usize::MAX {
        pos[v] = walk.len();
        walk.push(v);
        v = pred[v];
    }
    let mut cycle: Vec<usize> = walk[pos[v]..].to_vec();
    cycle.reverse();
    cycle.push(cycle[0]);
    Err(cycle)
}
