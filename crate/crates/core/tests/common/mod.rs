#![allow(dead_code)]

pub mod oracle;

use pps_core::model::{AptitudeMatrix, Aptitudes, GameSpec, SaProfile};
use pps_core::network::{Subtask, SubtaskNetwork};
use pps_core::sim::Stream;

/// Deterministic instance generator.
pub struct Gen(Stream);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(Stream::new(seed, 0x1457))
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.0.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }
}

/// Random DAG with `m` subtasks: nodes are numbered and every edge points from
/// a lower to a higher node, so parallel edges and disconnected parts occur.
pub fn random_dag(gen: &mut Gen, m: usize) -> SubtaskNetwork {
    let nodes = gen.int(2, m + 1);
    let tasks = (0..m)
        .map(|k| {
            let a = gen.int(0, nodes - 2);
            let b = gen.int(a + 1, nodes - 1);
            Subtask::new(format!("e{k:02}"), format!("n{a}"), format!("n{b}"))
        })
        .collect();
    SubtaskNetwork::new(None, tasks).expect("forward edges are acyclic")
}

pub fn random_sa_game(seed: u64, m: usize, n: usize, lo: f64, hi: f64) -> GameSpec {
    let mut gen = Gen::new(seed);
    let net = random_dag(&mut gen, m);
    let abilities = (0..n).map(|_| gen.real(lo, hi)).collect();
    let simplicities = (0..m).map(|_| gen.real(lo, hi)).collect();
    let rewards = (0..m).map(|_| gen.real(0.1, 3.0)).collect();
    GameSpec::with_numbered_agents(
        net,
        Aptitudes::Separable(SaProfile::new(abilities, simplicities).unwrap()),
        rewards,
    )
    .unwrap()
}

pub fn random_general_game(seed: u64, m: usize, n: usize) -> GameSpec {
    let mut gen = Gen::new(seed);
    let net = random_dag(&mut gen, m);
    let rates = (0..n)
        .map(|_| (0..m).map(|_| gen.real(0.2, 3.0)).collect())
        .collect();
    let rewards = (0..m).map(|_| gen.real(0.1, 3.0)).collect();
    GameSpec::with_numbered_agents(
        net,
        Aptitudes::General(AptitudeMatrix::new(rates).unwrap()),
        rewards,
    )
    .unwrap()
}

/// SA game whose products `R_u s_u` are distinct and strictly decrease along
/// a linear extension, hence along every path.
pub fn strict_sa_game(seed: u64, m: usize, n: usize) -> GameSpec {
    let base = random_sa_game(seed, m, n, 0.5, 2.0);
    let mut gen = Gen::new(seed ^ 0xdead_beef);
    let order = base.network().linear_extension();
    let mut product = gen.real(2.0, 4.0);
    let s = base.sa().unwrap().simplicities().to_vec();
    let mut rewards = vec![0.0; m];
    for &u in &order {
        rewards[u] = product / s[u];
        product *= gen.real(0.3, 0.9);
    }
    base.with_rewards(pps_core::RewardVector::new(rewards).unwrap())
        .unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
