//! Top-k goal selection on star graphs under hard and soft travel budgets.
//!
//! A start node is connected by one weighted edge to each of `n` leaves. Given
//! a travel budget `B`, an optional slack `δ` and a reward channel, the
//! [`solver`] returns the `k` highest-reward leaves reachable within `B + δ`,
//! best first, through a binary-heap priority queue that can be popped
//! incrementally.
//!
//! ```
//! use star_orienteer::{solver, Dataset, Objective, Query};
//!
//! let data = Dataset::from_reader(star_orienteer::PARKVILLE_JSON.as_bytes()).unwrap();
//! let query = Query::builder(200.0, Objective::new("meeting_room").unwrap())
//!     .delta(50.0)
//!     .build()
//!     .unwrap();
//! let goals = solver::solve(&data.graph, &data.rewards, &query).unwrap();
//! assert_eq!(goals.node_ids(), ["102", "260", "204"]);
//! ```

use std::io::Read;
use std::path::Path;

use thiserror::Error;

pub mod bench;
pub mod cli;
pub mod oracle;
pub mod reward;
pub mod solver;
pub mod star_graph;

pub use reward::{channel_key, FactorSet, Objective, RewardModel, RewardValue};
pub use solver::{Goal, GoalSet, Query};
pub use star_graph::{NodeId, StarGraph};

use reward::RewardError;
use star_graph::{GraphDocument, GraphError};

/// Bundled Parkville campus dataset: start building 220 and six leaves.
pub const PARKVILLE_JSON: &str = include_str!("../data/parkville.json");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

/// A star graph together with the reward channels declared in the same file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: StarGraph,
    pub rewards: RewardModel,
    /// Unknown keys that were skipped while loading.
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn from_document(doc: &GraphDocument) -> Result<Self, DatasetError> {
        Ok(Self {
            graph: StarGraph::from_document(doc)?,
            rewards: RewardModel::from_document(doc)?,
            warnings: doc.warnings(),
        })
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DatasetError> {
        Self::from_document(&GraphDocument::from_reader(reader)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::from_document(&GraphDocument::from_path(path)?)
    }

    /// File form of graph and rewards; inverse of [`Dataset::from_document`].
    pub fn to_document(&self) -> GraphDocument {
        let mut doc = self.graph.to_document();
        for key in self.rewards.channel_keys() {
            let entries = self.rewards.channel(key).unwrap_or_default();
            for node in &mut doc.nodes {
                if let Some(value) = entries.get(&NodeId::new(node.id.as_str())) {
                    node.rewards.insert(key.to_owned(), value.to_json());
                }
            }
        }
        doc
    }
}
