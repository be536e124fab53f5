//! Scaling and occupancy measurements for the solver.
//!
//! Timings are reduced to `time / (n · log₂ n)` per size; if that ratio grows
//! by more than [`GROWTH_FACTOR`] across the sizes with `n ≥ 10⁴`, the run is
//! flagged as super-linearithmic.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{self, InstanceParams, OracleError};
use crate::reward::{Objective, RewardModel};
use crate::solver::{self, Query, SolveError};
use crate::star_graph::StarGraph;

pub const GROWTH_FACTOR: f64 = 3.0;
/// Smallest size that takes part in the growth check.
pub const GROWTH_MIN_N: usize = 10_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Instance(#[from] OracleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub k: usize,
    /// Median wall time of one solve, seconds.
    pub median_secs: f64,
    pub peak_candidates: usize,
    /// `median_secs / (n · max(log₂ n, 1))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub seed: u64,
    pub repetitions: usize,
    /// Sorted by `n`.
    pub rows: Vec<ScalingRow>,
    /// Largest over smallest ratio among rows with `n ≥ 10⁴`, if there are two.
    pub growth: Option<f64>,
    pub super_linearithmic: bool,
}

impl ScalingReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10}  {:>5}  {:>14}  {:>10}  {:>14}",
            "n", "k", "median (ms)", "peak", "t/(n log2 n)"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:>10}  {:>5}  {:>14.3}  {:>10}  {:>14.3e}",
                row.n,
                row.k,
                row.median_secs * 1e3,
                row.peak_candidates,
                row.ratio
            )?;
        }
        match self.growth {
            Some(g) => write!(
                f,
                "ratio growth over n >= {GROWTH_MIN_N}: {g:.2}x ({})",
                if self.super_linearithmic {
                    "SUPER-LINEARITHMIC"
                } else {
                    "ok"
                }
            ),
            None => write!(f, "ratio growth: not enough sizes >= {GROWTH_MIN_N}"),
        }
    }
}

/// Query that admits every leaf of a generated instance.
fn all_feasible(k: usize, budget: f64) -> Query {
    Query::builder(
        budget,
        Objective::new(oracle::OBJECTIVE).expect("constant token"),
    )
    .k(k)
    .build()
    .expect("finite nonnegative budget")
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    }
}

/// Time `solve` on one generated instance per size with every leaf feasible.
pub fn scaling_run(
    sizes: &[usize],
    k: usize,
    seed: u64,
    repetitions: usize,
) -> Result<ScalingReport, BenchError> {
    if sizes.is_empty() {
        return Err(BenchError::InvalidParams("no sizes given".into()));
    }
    if repetitions == 0 {
        return Err(BenchError::InvalidParams(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();

    let mut rows = Vec::with_capacity(sizes.len());
    for n in sizes {
        let params = InstanceParams::new(n, seed);
        let (graph, model) = oracle::random_instance(&params)?;
        let query = all_feasible(k, params.cost_max);
        let mut samples = Vec::with_capacity(repetitions);
        let mut peak = 0;
        for _ in 0..repetitions {
            let started = Instant::now();
            let queue = solver::build_queue(&graph, &model, &query)?;
            peak = peak.max(queue.peak_occupancy());
            let goals: Vec<_> = queue.take(k).collect();
            samples.push(started.elapsed());
            std::hint::black_box(goals);
        }
        let median_secs = median(samples).as_secs_f64();
        let scale = n as f64 * (n as f64).log2().max(1.0);
        rows.push(ScalingRow {
            n,
            k,
            median_secs,
            peak_candidates: peak,
            ratio: median_secs / scale,
        });
    }

    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.n >= GROWTH_MIN_N)
        .map(|r| r.ratio)
        .collect();
    let growth = if ratios.len() >= 2 {
        let max = ratios.iter().copied().fold(f64::MIN, f64::max);
        let min = ratios.iter().copied().fold(f64::MAX, f64::min);
        Some(if min > 0.0 { max / min } else { f64::INFINITY })
    } else {
        None
    };
    Ok(ScalingReport {
        seed,
        repetitions,
        rows,
        growth,
        super_linearithmic: growth.is_some_and(|g| g > GROWTH_FACTOR),
    })
}

/// Most candidates held by the queue while solving `query`.
pub fn peak_occupancy(
    graph: &StarGraph,
    model: &RewardModel,
    query: &Query,
) -> Result<usize, SolveError> {
    let mut queue = solver::build_queue(graph, model, query)?;
    for _ in 0..query.k() {
        if queue.pop_next().is_none() {
            break;
        }
    }
    Ok(queue.peak_occupancy())
}

/// Peak queue occupancy on a generated instance of size `n` with every leaf
/// feasible.
pub fn memory_probe(n: usize, seed: u64) -> Result<usize, BenchError> {
    let params = InstanceParams::new(n, seed);
    let (graph, model) = oracle::random_instance(&params)?;
    Ok(peak_occupancy(
        &graph,
        &model,
        &all_feasible(n, params.cost_max),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_run() {
        let report = scaling_run(&[1], 0, 3, 1).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].median_secs < 0.1);
        assert_eq!(report.growth, None);
        assert!(!report.super_linearithmic);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(
            scaling_run(&[10], 1, 0, 0),
            Err(BenchError::InvalidParams(_))
        ));
        assert!(matches!(
            scaling_run(&[], 1, 0, 1),
            Err(BenchError::InvalidParams(_))
        ));
    }

    #[test]
    fn rows_sorted_by_n() {
        let report = scaling_run(&[300, 10, 100], 2, 1, 1).unwrap();
        let ns: Vec<_> = report.rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![10, 100, 300]);
        assert!(report.rows.iter().all(|r| r.median_secs >= 0.0));
        let text = report.to_string();
        assert!(text.contains("median"));
        let back: ScalingReport = serde_json::from_str(&report.to_json_pretty()).unwrap();
        assert_eq!(back.rows.len(), 3);
    }

    #[test]
    fn occupancy() {
        assert_eq!(memory_probe(0, 1).unwrap(), 0);
        assert_eq!(memory_probe(1000, 1).unwrap(), 1000);

        let (graph, model) = oracle::random_instance(&InstanceParams {
            cost_min: 10.0,
            ..InstanceParams::new(1000, 1)
        })
        .unwrap();
        let q = all_feasible(1000, 5.0);
        assert_eq!(peak_occupancy(&graph, &model, &q).unwrap(), 0);
    }

    #[test]
    fn median_of_even_count() {
        let ms = Duration::from_millis;
        assert_eq!(
            median(vec![ms(4), ms(1), ms(3), ms(2)]),
            Duration::from_micros(2500)
        );
    }
}
