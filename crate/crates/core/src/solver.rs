//! Non-randomized anytime selection of the k best goals on a star graph.
//!
//! Every leaf whose edge cost fits the soft budget `B + δ` is pushed onto a
//! binary heap keyed by `-reward`; popping the heap yields goals best-first,
//! and a caller may stop after any number of pops. The hard-budget problem is
//! the `δ = 0` case.
//!
//! Equal rewards are ordered by lower cost, then by node id, so the pop order
//! is total and repeatable.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reward::{FactorSet, Objective, RewardError, RewardModel, RewardValue};
use crate::star_graph::{GraphError, NodeId, StarGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("budget must be a finite nonnegative number, got {0}")]
    InvalidBudget(f64),
    #[error("slack must be nonnegative, got {0}")]
    InvalidDelta(f64),
    #[error("limit must be nonnegative, got {0}")]
    InvalidLimit(f64),
    #[error("budget plus slack ({budget} + {delta}) exceeds the limit {limit}")]
    LimitExceeded { budget: f64, delta: f64, limit: f64 },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

/// A validated request: budget `B`, slack `δ`, limit `L`, goal count `k`,
/// the reward channel to rank by and an optional candidate whitelist.
///
/// Construction enforces `B + δ ≤ L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    budget: f64,
    delta: f64,
    limit: f64,
    k: usize,
    objective: Objective,
    factors: FactorSet,
    whitelist: Option<BTreeSet<NodeId>>,
}

impl Query {
    /// Hard-budget query with `k = 3`, `δ = 0`, `L = ∞`.
    pub fn builder(budget: f64, objective: Objective) -> QueryBuilder {
        QueryBuilder {
            budget,
            delta: 0.0,
            limit: f64::INFINITY,
            k: 3,
            objective,
            factors: FactorSet::empty(),
            whitelist: None,
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn factors(&self) -> &FactorSet {
        &self.factors
    }

    pub fn whitelist(&self) -> Option<&BTreeSet<NodeId>> {
        self.whitelist.as_ref()
    }

    /// Largest admissible path cost, `B + δ`.
    pub fn max_cost(&self) -> f64 {
        self.budget + self.delta
    }

    /// Same query with a different goal count.
    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct QueryBuilder {
    budget: f64,
    delta: f64,
    limit: f64,
    k: usize,
    objective: Objective,
    factors: FactorSet,
    whitelist: Option<BTreeSet<NodeId>>,
}

impl QueryBuilder {
    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn limit(mut self, limit: f64) -> Self {
        self.limit = limit;
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn factors(mut self, factors: FactorSet) -> Self {
        self.factors = factors;
        self
    }

    pub fn whitelist<I: IntoIterator<Item = NodeId>>(mut self, ids: I) -> Self {
        self.whitelist = Some(ids.into_iter().collect());
        self
    }

    pub fn build(self) -> Result<Query, QueryError> {
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(QueryError::InvalidBudget(self.budget));
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(QueryError::InvalidDelta(self.delta));
        }
        if self.limit.is_nan() || self.limit < 0.0 {
            return Err(QueryError::InvalidLimit(self.limit));
        }
        if self.budget + self.delta > self.limit {
            return Err(QueryError::LimitExceeded {
                budget: self.budget,
                delta: self.delta,
                limit: self.limit,
            });
        }
        Ok(Query {
            budget: self.budget,
            delta: self.delta,
            limit: self.limit,
            k: self.k,
            objective: self.objective,
            factors: self.factors,
            whitelist: self.whitelist,
        })
    }
}

/// Whether a path of this cost satisfies the soft constraint `cost ≤ B + δ`.
pub fn feasible(cost: f64, query: &Query) -> bool {
    cost <= query.max_cost()
}

/// One heap entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub node: NodeId,
    pub cost: f64,
    pub reward: RewardValue,
    /// `-reward`; infinite rewards map to `-∞` and pop first.
    pub priority: f64,
}

impl Candidate {
    pub fn new(node: NodeId, cost: f64, reward: RewardValue) -> Self {
        Self {
            node,
            cost,
            reward,
            priority: -reward.get(),
        }
    }

    fn into_goal(self) -> Goal {
        Goal {
            node: self.node,
            cost: self.cost,
            reward: self.reward,
        }
    }
}

impl Eq for Candidate {}

// Ascending order = pop order: priority, then cost, then node id.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| self.cost.total_cmp(&other.cost))
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub node: NodeId,
    pub cost: f64,
    pub reward: RewardValue,
}

/// Goals in pop order: rewards non-increasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalSet {
    pub goals: Vec<Goal>,
}

impl GoalSet {
    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Goal> {
        self.goals.iter()
    }

    pub fn node_ids(&self) -> Vec<&str> {
        self.goals.iter().map(|g| g.node.as_str()).collect()
    }
}

impl FromIterator<Goal> for GoalSet {
    fn from_iter<I: IntoIterator<Item = Goal>>(iter: I) -> Self {
        Self {
            goals: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a GoalSet {
    type Item = &'a Goal;
    type IntoIter = std::slice::Iter<'a, Goal>;

    fn into_iter(self) -> Self::IntoIter {
        self.goals.iter()
    }
}

/// Loaded priority queue. Popping is the anytime interface: each pop returns
/// the best goal not yet emitted.
#[derive(Debug, Clone)]
pub struct QueueState {
    heap: BinaryHeap<Reverse<Candidate>>,
    emitted: usize,
    peak: usize,
}

impl QueueState {
    fn with_capacity(capacity: usize) -> Self {
        Self {
            heap: BinaryHeap::with_capacity(capacity),
            emitted: 0,
            peak: 0,
        }
    }

    fn insert(&mut self, candidate: Candidate) {
        self.heap.push(Reverse(candidate));
        self.peak = self.peak.max(self.heap.len());
    }

    /// Remove and return the best remaining goal.
    pub fn pop_next(&mut self) -> Option<Goal> {
        let Reverse(best) = self.heap.pop()?;
        self.emitted += 1;
        Some(best.into_goal())
    }

    /// The next goal `pop_next` would return.
    pub fn peek(&self) -> Option<&Candidate> {
        self.heap.peek().map(|Reverse(c)| c)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Most entries held at once.
    pub fn peak_occupancy(&self) -> usize {
        self.peak
    }
}

impl Iterator for QueueState {
    type Item = Goal;

    fn next(&mut self) -> Option<Goal> {
        self.pop_next()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.heap.len(), Some(self.heap.len()))
    }
}

/// Push every feasible candidate with priority `-reward`.
///
/// A graph without leaves yields an empty queue for any objective.
pub fn build_queue(
    graph: &StarGraph,
    model: &RewardModel,
    query: &Query,
) -> Result<QueueState, SolveError> {
    let whitelisted = match query.whitelist() {
        Some(_) => Some(graph.candidates(query.whitelist())?),
        None => None,
    };
    if graph.is_empty() {
        return Ok(QueueState::with_capacity(0));
    }
    let channel = model.select(query.objective(), query.factors())?;
    let mut queue = QueueState::with_capacity(whitelisted.as_ref().map_or(graph.len(), Vec::len));
    let mut push = |node: &NodeId, cost: f64| {
        if feasible(cost, query) {
            queue.insert(Candidate::new(node.clone(), cost, channel.reward(node)));
        }
    };
    match whitelisted {
        None => {
            for leaf in graph.leaves() {
                push(&leaf.id, leaf.cost);
            }
        }
        Some(nodes) => {
            for node in &nodes {
                push(node, graph.cost(node)?);
            }
        }
    }
    Ok(queue)
}

/// The `min(k, feasible)` best goals.
pub fn solve(graph: &StarGraph, model: &RewardModel, query: &Query) -> Result<GoalSet, SolveError> {
    let queue = build_queue(graph, model, query)?;
    Ok(queue.take(query.k()).collect())
}
