//! Star graph data model, file ingestion and structural validation.
//!
//! A star graph has one start node with a single directed edge to every
//! leaf, and nothing else. Each leaf carries the cost (meters) of that edge.
//! Only `(start, leaf)` edges are stored, so in/out-degree constraints hold by
//! construction; what remains to check is id uniqueness, the absence of a
//! self-edge and the cost domain.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Opaque node label such as `"220"` or `"Old Arts"`.
///
/// Ordering is numeric-aware: purely numeric tokens sort before all others
/// and compare by value (`"99" < "104"`), everything else compares as text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric_digits(&self) -> Option<&str> {
        if !self.0.is_empty() && self.0.bytes().all(|b| b.is_ascii_digit()) {
            let trimmed = self.0.trim_start_matches('0');
            Some(if trimmed.is_empty() { "0" } else { trimmed })
        } else {
            None
        }
    }
}

impl Ord for NodeId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric_digits(), other.numeric_digits()) {
            (Some(a), Some(b)) => a
                .len()
                .cmp(&b.len())
                .then_with(|| a.cmp(b))
                // "007" vs "7": equal value, fall back to the raw token
                .then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for NodeId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// Latitude/longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub id: NodeId,
    /// Edge cost from the start node, meters.
    pub cost: f64,
    pub location: Option<GeoPoint>,
    pub name: Option<String>,
}

/// A single structural problem found in a graph document.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingStart,
    EmptyId { index: usize },
    DuplicateId(NodeId),
    SelfEdge(NodeId),
    NegativeCost { node: NodeId, cost: f64 },
    NonFiniteCost { node: NodeId },
    InvalidCoordinate { node: NodeId, field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingStart => write!(f, "missing start: document has no start node"),
            Violation::EmptyId { index } => write!(f, "empty id: node #{index} has an empty id"),
            Violation::DuplicateId(id) => {
                write!(f, "duplicate id: node {id} is listed more than once")
            }
            Violation::SelfEdge(id) => {
                write!(f, "self-edge: start node {id} is also listed as a leaf")
            }
            Violation::NegativeCost { node, cost } => {
                write!(f, "negative cost: node {node} has cost {cost}")
            }
            Violation::NonFiniteCost { node } => {
                write!(
                    f,
                    "non-finite cost: node {node} has an infinite or NaN cost"
                )
            }
            Violation::InvalidCoordinate { node, field } => {
                write!(
                    f,
                    "invalid coordinate: node {node} has an out-of-range {field}"
                )
            }
        }
    }
}

/// Result of [`validate_star`]; empty means the document describes a valid star.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed graph document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("graph is not a valid star: {0}")]
    Invalid(ValidationReport),
    #[error("unknown node: {0}")]
    UnknownNode(NodeId),
}

/// One leaf entry as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Channel key to reward (`number` or `"inf"`); interpreted by the reward module.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rewards: BTreeMap<String, Value>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, Value>,
}

/// The JSON graph file, parsed but not yet validated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_name: Option<String>,
    #[serde(default)]
    pub nodes: Vec<NodeRecord>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, Value>,
}

impl GraphDocument {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, GraphError> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph document is always serializable")
    }

    /// Human-readable notes about keys that were present but ignored.
    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .unknown
            .keys()
            .map(|k| format!("ignoring unknown top-level key {k:?}"))
            .collect();
        for node in &self.nodes {
            for k in node.unknown.keys() {
                out.push(format!("ignoring unknown key {k:?} on node {}", node.id));
            }
        }
        out
    }
}

/// Check a graph document against the star-graph invariants.
pub fn validate_star(doc: &GraphDocument) -> ValidationReport {
    let mut violations = Vec::new();
    let start = doc.start.as_deref().filter(|s| !s.is_empty());
    if start.is_none() {
        violations.push(Violation::MissingStart);
    }
    let mut seen = BTreeSet::new();
    let mut reported_dup = BTreeSet::new();
    for (index, node) in doc.nodes.iter().enumerate() {
        if node.id.is_empty() {
            violations.push(Violation::EmptyId { index });
            continue;
        }
        let id = NodeId::new(node.id.as_str());
        if Some(node.id.as_str()) == start {
            violations.push(Violation::SelfEdge(id.clone()));
        }
        if !seen.insert(node.id.as_str()) && reported_dup.insert(node.id.as_str()) {
            violations.push(Violation::DuplicateId(id.clone()));
        }
        if node.cost.is_nan() || node.cost.is_infinite() {
            violations.push(Violation::NonFiniteCost { node: id.clone() });
        } else if node.cost < 0.0 {
            violations.push(Violation::NegativeCost {
                node: id.clone(),
                cost: node.cost,
            });
        }
        check_coordinates(&id, node.lat, node.lon, &mut violations);
    }
    if let Some(start) = start {
        check_coordinates(
            &NodeId::new(start),
            doc.start_lat,
            doc.start_lon,
            &mut violations,
        );
    }
    ValidationReport { violations }
}

fn check_coordinates(id: &NodeId, lat: Option<f64>, lon: Option<f64>, out: &mut Vec<Violation>) {
    if let Some(lat) = lat {
        if !(-90.0..=90.0).contains(&lat) {
            out.push(Violation::InvalidCoordinate {
                node: id.clone(),
                field: "lat",
            });
        }
    }
    if let Some(lon) = lon {
        if !(-180.0..=180.0).contains(&lon) {
            out.push(Violation::InvalidCoordinate {
                node: id.clone(),
                field: "lon",
            });
        }
    }
    if lat.is_some() != lon.is_some() {
        let field = if lat.is_none() { "lat" } else { "lon" };
        out.push(Violation::InvalidCoordinate {
            node: id.clone(),
            field,
        });
    }
}

/// Validated star graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGraph {
    start: NodeId,
    start_location: Option<GeoPoint>,
    start_name: Option<String>,
    /// Sorted by id.
    leaves: Vec<Leaf>,
    index: HashMap<NodeId, usize>,
}

impl StarGraph {
    /// Build a graph from a start id and leaf list, rejecting anything that is
    /// not a star.
    pub fn new(start: impl Into<NodeId>, leaves: Vec<Leaf>) -> Result<Self, GraphError> {
        let start = start.into();
        let doc = GraphDocument {
            start: Some(start.as_str().to_owned()),
            nodes: leaves
                .into_iter()
                .map(|l| NodeRecord {
                    id: l.id.0,
                    cost: l.cost,
                    lat: l.location.map(|p| p.lat),
                    lon: l.location.map(|p| p.lon),
                    name: l.name,
                    rewards: BTreeMap::new(),
                    unknown: BTreeMap::new(),
                })
                .collect(),
            ..GraphDocument::default()
        };
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self, GraphError> {
        let report = validate_star(doc);
        if !report.is_valid() {
            return Err(GraphError::Invalid(report));
        }
        let start = NodeId::new(doc.start.clone().unwrap_or_default());
        let mut leaves: Vec<Leaf> = doc
            .nodes
            .iter()
            .map(|n| Leaf {
                id: NodeId::new(n.id.as_str()),
                cost: n.cost,
                location: n.lat.zip(n.lon).map(|(lat, lon)| GeoPoint { lat, lon }),
                name: n.name.clone(),
            })
            .collect();
        leaves.sort_by(|a, b| a.id.cmp(&b.id));
        let index = leaves
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.clone(), i))
            .collect();
        Ok(Self {
            start,
            start_location: doc
                .start_lat
                .zip(doc.start_lon)
                .map(|(lat, lon)| GeoPoint { lat, lon }),
            start_name: doc.start_name.clone(),
            leaves,
            index,
        })
    }

    pub fn start(&self) -> &NodeId {
        &self.start
    }

    pub fn start_location(&self) -> Option<GeoPoint> {
        self.start_location
    }

    pub fn start_name(&self) -> Option<&str> {
        self.start_name.as_deref()
    }

    /// Leaves in ascending id order.
    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    /// Number of leaves, `n`. Also the number of edges and the start's out-degree.
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn leaf(&self, node: &NodeId) -> Option<&Leaf> {
        self.index.get(node).map(|&i| &self.leaves[i])
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.index.contains_key(node)
    }

    /// Edge cost from the start to `node`.
    pub fn cost(&self, node: &NodeId) -> Result<f64, GraphError> {
        self.leaf(node)
            .map(|l| l.cost)
            .ok_or_else(|| GraphError::UnknownNode(node.clone()))
    }

    /// Nodes that may be visited: every leaf, or the given whitelist, in
    /// ascending id order. The start node is never a candidate.
    pub fn candidates(
        &self,
        whitelist: Option<&BTreeSet<NodeId>>,
    ) -> Result<Vec<NodeId>, GraphError> {
        match whitelist {
            None => Ok(self.leaves.iter().map(|l| l.id.clone()).collect()),
            Some(ids) => {
                if let Some(unknown) = ids.iter().find(|id| !self.contains(id)) {
                    return Err(GraphError::UnknownNode(unknown.clone()));
                }
                // BTreeSet iteration already follows NodeId ordering.
                Ok(ids.iter().cloned().collect())
            }
        }
    }

    /// Serializable form of the topology. Reward blocks are left empty.
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            start: Some(self.start.0.clone()),
            start_lat: self.start_location.map(|p| p.lat),
            start_lon: self.start_location.map(|p| p.lon),
            start_name: self.start_name.clone(),
            nodes: self
                .leaves
                .iter()
                .map(|l| NodeRecord {
                    id: l.id.0.clone(),
                    cost: l.cost,
                    lat: l.location.map(|p| p.lat),
                    lon: l.location.map(|p| p.lon),
                    name: l.name.clone(),
                    rewards: BTreeMap::new(),
                    unknown: BTreeMap::new(),
                })
                .collect(),
            unknown: BTreeMap::new(),
        }
    }
}

/// Read and validate a star graph from any byte stream.
pub fn load_graph<R: Read>(source: R) -> Result<StarGraph, GraphError> {
    StarGraph::from_document(&GraphDocument::from_reader(source)?)
}

pub fn load_graph_path(path: impl AsRef<Path>) -> Result<StarGraph, GraphError> {
    StarGraph::from_document(&GraphDocument::from_path(path)?)
}
