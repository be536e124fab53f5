//! Brute-force reference solver and seeded instance generator.
//!
//! [`solve_bruteforce`] shares no selection or ordering code with
//! [`crate::solver`]: it materializes every candidate, filters with its own
//! budget check and sorts the whole list with its own comparator.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::reward::{FactorSet, Objective, RewardModel, RewardValue};
use crate::solver::{Goal, GoalSet, Query, SolveError};
use crate::star_graph::{GraphError, Leaf, NodeId, StarGraph};

/// Objective name used by generated instances.
pub const OBJECTIVE: &str = "reward";
/// Factor token of the second generated channel.
pub const FACTOR: &str = "factor";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid instance parameters: {0}")]
    InvalidParams(String),
}

/// Enumerate, filter, fully sort and truncate.
pub fn solve_bruteforce(
    graph: &StarGraph,
    model: &RewardModel,
    query: &Query,
) -> Result<GoalSet, SolveError> {
    if let Some(only) = query.whitelist() {
        for id in only {
            if !graph.leaves().iter().any(|leaf| &leaf.id == id) {
                return Err(GraphError::UnknownNode(id.clone()).into());
            }
        }
    }
    let mut all = Vec::new();
    for leaf in graph.leaves() {
        if let Some(only) = query.whitelist() {
            if !only.contains(&leaf.id) {
                continue;
            }
        }
        let reward = model.evaluate(&leaf.id, query.objective(), query.factors())?;
        all.push(Goal {
            node: leaf.id.clone(),
            cost: leaf.cost,
            reward,
        });
    }
    let cap = query.budget() + query.delta();
    all.retain(|g| g.cost <= cap);
    all.sort_by(|a, b| {
        let by_reward = b
            .reward
            .get()
            .partial_cmp(&a.reward.get())
            .unwrap_or(Ordering::Equal);
        let by_cost = a.cost.partial_cmp(&b.cost).unwrap_or(Ordering::Equal);
        by_reward.then(by_cost).then_with(|| a.node.cmp(&b.node))
    });
    all.truncate(query.k());
    Ok(GoalSet { goals: all })
}

/// Knobs for [`random_instance`]. The seed fully determines the output.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub n: usize,
    pub cost_min: f64,
    pub cost_max: f64,
    pub reward_min: f64,
    pub reward_max: f64,
    pub seed: u64,
    /// Fraction of nodes whose reward is copied from an earlier node.
    pub tie_probability: f64,
}

impl InstanceParams {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            cost_min: 0.0,
            cost_max: 500.0,
            reward_min: 0.0,
            reward_max: 100.0,
            seed,
            tie_probability: 0.2,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        let bad = |msg: String| Err(OracleError::InvalidParams(msg));
        if !(self.cost_min.is_finite() && self.cost_max.is_finite()) || self.cost_min < 0.0 {
            return bad(format!(
                "cost range [{}, {}] must be finite and nonnegative",
                self.cost_min, self.cost_max
            ));
        }
        if self.cost_min > self.cost_max {
            return bad(format!(
                "cost_min {} exceeds cost_max {}",
                self.cost_min, self.cost_max
            ));
        }
        if !(self.reward_min.is_finite() && self.reward_max.is_finite()) || self.reward_min < 0.0 {
            return bad(format!(
                "reward range [{}, {}] must be finite and nonnegative",
                self.reward_min, self.reward_max
            ));
        }
        if self.reward_min > self.reward_max {
            return bad(format!(
                "reward_min {} exceeds reward_max {}",
                self.reward_min, self.reward_max
            ));
        }
        if !(0.0..=1.0).contains(&self.tie_probability) {
            return bad(format!(
                "tie_probability {} outside [0, 1]",
                self.tie_probability
            ));
        }
        Ok(())
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Generate a valid star graph with `n` leaves and two channels,
/// `reward` and `reward+factor`.
///
/// Leaf ids are distinct tokens of mixed width, mostly numeric, some with a
/// letter prefix. Costs are rounded to
/// centimeters so equal costs occur. Each reward is copied from an earlier
/// node with probability `tie_probability`, and is 0 or ∞ with probability
/// `1/n` each; for `n ≥ 10` at least one 0 and one ∞ are present per channel.
/// A few nodes are left out of the factor channel, which makes them score 0
/// there.
pub fn random_instance(params: &InstanceParams) -> Result<(StarGraph, RewardModel), OracleError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;

    let mut ids: Vec<u64> = Vec::with_capacity(n);
    let mut used = BTreeSet::new();
    let id_space = (n as u64).saturating_mul(10).max(10);
    while ids.len() < n {
        let id = rng.random_range(0..id_space);
        if used.insert(id) {
            ids.push(id);
        }
    }

    let leaves: Vec<Leaf> = ids
        .iter()
        .map(|id| Leaf {
            id: if rng.random_bool(0.25) {
                NodeId::new(format!("b{id}"))
            } else {
                NodeId::new(id.to_string())
            },
            cost: round2(rng.random_range(params.cost_min..=params.cost_max))
                .clamp(params.cost_min, params.cost_max),
            location: None,
            name: None,
        })
        .collect();

    let objective = Objective::new(OBJECTIVE).expect("constant token");
    let base = FactorSet::empty();
    let factored = FactorSet::new([FACTOR]).expect("constant token");
    let mut model = RewardModel::new();
    if n > 0 {
        for factors in [&base, &factored] {
            let rewards = draw_rewards(&mut rng, params);
            let sparse = !factors.is_empty();
            let mut entries = Vec::with_capacity(n);
            for (leaf, reward) in leaves.iter().zip(rewards) {
                if sparse && rng.random_bool(0.05) {
                    continue;
                }
                entries.push((leaf.id.clone(), reward));
            }
            model.extend_channel(&objective, factors, entries);
        }
    }

    let graph = StarGraph::new("start", leaves).expect("generated graph is a valid star");
    Ok((graph, model))
}

fn draw_rewards(rng: &mut ChaCha8Rng, params: &InstanceParams) -> Vec<RewardValue> {
    let n = params.n;
    let special = 1.0 / n.max(1) as f64;
    let mut out: Vec<RewardValue> = Vec::with_capacity(n);
    for i in 0..n {
        let value = if rng.random_bool(special) {
            RewardValue::ZERO
        } else if rng.random_bool(special) {
            RewardValue::INFINITY
        } else if i > 0 && rng.random_bool(params.tie_probability) {
            out[rng.random_range(0..i)]
        } else {
            let x = rng.random_range(params.reward_min..=params.reward_max);
            RewardValue::new(x).expect("drawn from a nonnegative range")
        };
        out.push(value);
    }
    if n >= 10 {
        let mut slots: Vec<usize> = (0..n).collect();
        slots.shuffle(rng);
        if !out.contains(&RewardValue::ZERO) {
            out[slots[0]] = RewardValue::ZERO;
        }
        if !out.contains(&RewardValue::INFINITY) {
            let slot = slots
                .iter()
                .copied()
                .find(|&s| out[s] != RewardValue::ZERO)
                .unwrap_or(slots[1]);
            out[slot] = RewardValue::INFINITY;
        }
    }
    out
}
