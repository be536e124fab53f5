//! Channelized reward model.
//!
//! Rewards are declared per node and per channel in the dataset rather than
//! computed. A channel is one `(objective, factor set)` pair, addressed by
//! [`channel_key`]: `"meeting_room"`, `"meeting_room+covid"`, ...

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::star_graph::{GraphDocument, NodeId};

/// Nonnegative reward, possibly infinite. Never NaN, so it is totally ordered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardValue(f64);

impl RewardValue {
    pub const ZERO: RewardValue = RewardValue(0.0);
    pub const INFINITY: RewardValue = RewardValue(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self, RewardError> {
        if value.is_nan() {
            Err(RewardError::InvalidValue("NaN".into()))
        } else if value < 0.0 {
            Err(RewardError::InvalidValue(format!("{value} is negative")))
        } else {
            // normalizes -0.0
            Ok(Self(value + 0.0))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Parse a dataset value: a JSON number or the string `"inf"`.
    pub fn from_json(value: &Value) -> Result<Self, RewardError> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| RewardError::InvalidValue(format!("{n} is not representable")))
                .and_then(Self::new),
            Value::String(s) if s.eq_ignore_ascii_case("inf") => Ok(Self::INFINITY),
            other => Err(RewardError::InvalidValue(format!(
                "expected a number or \"inf\", found {other}"
            ))),
        }
    }

    pub fn to_json(self) -> Value {
        if self.is_infinite() {
            Value::String("inf".into())
        } else {
            Value::from(self.0)
        }
    }
}

impl Eq for RewardValue {}

impl Ord for RewardValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for RewardValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RewardValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else if let Some(p) = f.precision() {
            write!(f, "{:.*}", p, self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for RewardValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for RewardValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        Self::from_json(&v).map_err(de::Error::custom)
    }
}

fn check_token(kind: &'static str, token: &str) -> Result<(), RewardError> {
    if token.is_empty() || token.contains('+') || token.chars().any(char::is_whitespace) {
        Err(RewardError::InvalidToken {
            kind,
            token: token.to_owned(),
        })
    } else {
        Ok(())
    }
}

/// What a reward is sought for, e.g. `meeting_room` or `toilet`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Objective(String);

impl Objective {
    pub fn new(name: impl Into<String>) -> Result<Self, RewardError> {
        let name = name.into();
        check_token("objective", &name)?;
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Objective {
    type Error = RewardError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<Objective> for String {
    fn from(o: Objective) -> Self {
        o.0
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Set of factor tokens adjusting the reward, e.g. `{covid}`. Tokens are
/// lowercased and kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FactorSet(BTreeSet<String>);

impl FactorSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I, S>(factors: I) -> Result<Self, RewardError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for f in factors {
            let token = f.as_ref().to_lowercase();
            check_token("factor", &token)?;
            set.insert(token);
        }
        Ok(Self(set))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl TryFrom<Vec<String>> for FactorSet {
    type Error = RewardError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<FactorSet> for Vec<String> {
    fn from(f: FactorSet) -> Self {
        f.0.into_iter().collect()
    }
}

/// Key of the `(objective, factors)` channel: the objective name followed by
/// each factor in ascending order, joined by `+`.
pub fn channel_key(objective: &Objective, factors: &FactorSet) -> String {
    let mut key = objective.0.clone();
    for f in factors.iter() {
        key.push('+');
        key.push_str(f);
    }
    key
}

/// Split a channel key into its objective and factors. Accepts factors in any
/// order and case; [`channel_key`] of the result is the canonical key.
pub fn parse_channel_key(key: &str) -> Result<(Objective, FactorSet), RewardError> {
    let mut parts = key.split('+');
    let objective = Objective::new(parts.next().unwrap_or_default())?;
    let factors: Vec<&str> = parts.collect();
    let set = FactorSet::new(&factors)?;
    if set.0.len() != factors.len() {
        return Err(RewardError::InvalidToken {
            kind: "channel",
            token: key.to_owned(),
        });
    }
    Ok((objective, set))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewardError {
    #[error("invalid reward value: {0}")]
    InvalidValue(String),
    #[error("invalid {kind} token {token:?}")]
    InvalidToken { kind: &'static str, token: String },
    #[error("node {node}, channel {channel}: {source}")]
    InvalidEntry {
        node: String,
        channel: String,
        #[source]
        source: Box<RewardError>,
    },
    #[error("channel {0:?} is declared twice under different spellings")]
    DuplicateChannel(String),
    #[error("unknown objective {0:?}")]
    UnknownObjective(String),
    #[error("objective {objective:?} has no channel {channel:?}")]
    UnknownChannel { objective: String, channel: String },
}

/// `R(node, objective, factors)` backed by declared channel tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardModel {
    channels: BTreeMap<String, HashMap<NodeId, RewardValue>>,
    objectives: BTreeSet<Objective>,
    factors: BTreeSet<String>,
}

impl RewardModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a channel with no entries yet. Returns its canonical key.
    pub fn declare_channel(&mut self, objective: &Objective, factors: &FactorSet) -> String {
        let key = channel_key(objective, factors);
        self.objectives.insert(objective.clone());
        self.factors.extend(factors.iter().map(str::to_owned));
        self.channels.entry(key.clone()).or_default();
        key
    }

    pub fn insert(
        &mut self,
        node: impl Into<NodeId>,
        objective: &Objective,
        factors: &FactorSet,
        value: RewardValue,
    ) {
        let key = self.declare_channel(objective, factors);
        self.channels
            .get_mut(&key)
            .expect("channel declared above")
            .insert(node.into(), value);
    }

    /// Add many entries to one channel at once.
    pub fn extend_channel<I>(&mut self, objective: &Objective, factors: &FactorSet, entries: I)
    where
        I: IntoIterator<Item = (NodeId, RewardValue)>,
    {
        let key = self.declare_channel(objective, factors);
        self.channels
            .get_mut(&key)
            .expect("channel declared above")
            .extend(entries);
    }

    /// Collect every node's `rewards` block from a graph document.
    pub fn from_document(doc: &GraphDocument) -> Result<Self, RewardError> {
        let mut model = Self::new();
        // canonical key -> spelling first seen, to catch "a+x+y" next to "a+y+x"
        let mut spellings: BTreeMap<String, String> = BTreeMap::new();
        for node in &doc.nodes {
            for (raw_key, raw_value) in &node.rewards {
                let wrap = |e: RewardError| RewardError::InvalidEntry {
                    node: node.id.clone(),
                    channel: raw_key.clone(),
                    source: Box::new(e),
                };
                let (objective, factors) = parse_channel_key(raw_key).map_err(wrap)?;
                let value = RewardValue::from_json(raw_value).map_err(wrap)?;
                let key = channel_key(&objective, &factors);
                let first = spellings
                    .entry(key.clone())
                    .or_insert_with(|| raw_key.clone());
                if first != raw_key {
                    return Err(RewardError::DuplicateChannel(key));
                }
                model.insert(node.id.as_str(), &objective, &factors, value);
            }
        }
        Ok(model)
    }

    pub fn objectives(&self) -> &BTreeSet<Objective> {
        &self.objectives
    }

    pub fn factors(&self) -> &BTreeSet<String> {
        &self.factors
    }

    pub fn channel_keys(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(String::as_str)
    }

    /// Reward values for one channel, sorted by node id.
    pub fn channel(&self, key: &str) -> Option<BTreeMap<&NodeId, RewardValue>> {
        self.channels
            .get(key)
            .map(|entries| entries.iter().map(|(k, v)| (k, *v)).collect())
    }

    /// Resolve the `(objective, factors)` channel once, for repeated lookups.
    pub fn select(
        &self,
        objective: &Objective,
        factors: &FactorSet,
    ) -> Result<ChannelView<'_>, RewardError> {
        if !self.objectives.contains(objective) {
            return Err(RewardError::UnknownObjective(objective.0.clone()));
        }
        let key = channel_key(objective, factors);
        match self.channels.get(&key) {
            Some(entries) => Ok(ChannelView { entries }),
            None => Err(RewardError::UnknownChannel {
                objective: objective.0.clone(),
                channel: key,
            }),
        }
    }

    /// Reward of `node` for this objective and factor set. A node absent from
    /// an existing channel scores zero.
    pub fn evaluate(
        &self,
        node: &NodeId,
        objective: &Objective,
        factors: &FactorSet,
    ) -> Result<RewardValue, RewardError> {
        Ok(self.select(objective, factors)?.reward(node))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChannelView<'a> {
    entries: &'a HashMap<NodeId, RewardValue>,
}

impl ChannelView<'_> {
    pub fn reward(&self, node: &NodeId) -> RewardValue {
        self.entries.get(node).copied().unwrap_or(RewardValue::ZERO)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(s: &str) -> Objective {
        Objective::new(s).unwrap()
    }

    fn factors(xs: &[&str]) -> FactorSet {
        FactorSet::new(xs).unwrap()
    }

    fn parkville() -> RewardModel {
        let doc: GraphDocument =
            serde_json::from_str(include_str!("../data/parkville.json")).unwrap();
        RewardModel::from_document(&doc).unwrap()
    }

    #[test]
    fn channel_keys() {
        assert_eq!(
            channel_key(&obj("meeting_room"), &factors(&[])),
            "meeting_room"
        );
        assert_eq!(
            channel_key(&obj("meeting_room"), &factors(&["covid"])),
            "meeting_room+covid"
        );
        assert_eq!(
            channel_key(&obj("toilet"), &factors(&["weekend", "covid"])),
            "toilet+covid+weekend"
        );
        assert_eq!(
            channel_key(&obj("toilet"), &factors(&["COVID"])),
            "toilet+covid"
        );
    }

    #[test]
    fn parse_key_roundtrip() {
        let (o, f) = parse_channel_key("toilet+weekend+covid").unwrap();
        assert_eq!(channel_key(&o, &f), "toilet+covid+weekend");
        assert!(parse_channel_key("toilet+covid+covid").is_err());
        assert!(parse_channel_key("+covid").is_err());
        assert!(parse_channel_key("toilet+").is_err());
    }

    #[test]
    fn evaluates_fixture() {
        let m = parkville();
        let room = obj("meeting_room");
        assert_eq!(
            m.evaluate(&"260".into(), &room, &factors(&[]))
                .unwrap()
                .get(),
            0.0020
        );
        assert_eq!(
            m.evaluate(&"110".into(), &room, &factors(&["covid"]))
                .unwrap()
                .get(),
            126.0
        );
        assert_eq!(
            m.evaluate(&"110".into(), &room, &factors(&[]))
                .unwrap()
                .get(),
            0.0
        );
    }

    #[test]
    fn evaluate_errors() {
        let m = parkville();
        assert_eq!(
            m.evaluate(&"260".into(), &obj("toilet"), &factors(&[])),
            Err(RewardError::UnknownObjective("toilet".into()))
        );
        assert!(matches!(
            m.evaluate(&"260".into(), &obj("meeting_room"), &factors(&["weekend"])),
            Err(RewardError::UnknownChannel { channel, .. }) if channel == "meeting_room+weekend"
        ));
    }

    #[test]
    fn missing_node_in_channel_is_zero() {
        let mut m = RewardModel::new();
        m.insert(
            "1",
            &obj("toilet"),
            &factors(&[]),
            RewardValue::new(2.0).unwrap(),
        );
        assert_eq!(
            m.evaluate(&"2".into(), &obj("toilet"), &factors(&[]))
                .unwrap(),
            RewardValue::ZERO
        );
    }

    #[test]
    fn value_domain() {
        assert!(RewardValue::new(-1.0).is_err());
        assert!(RewardValue::new(f64::NAN).is_err());
        assert!(RewardValue::new(f64::INFINITY).unwrap().is_infinite());
        assert_eq!(
            RewardValue::from_json(&Value::from("inf")).unwrap(),
            RewardValue::INFINITY
        );
        assert!(RewardValue::from_json(&Value::from("lots")).is_err());
        assert_eq!(RewardValue::INFINITY.to_json(), Value::from("inf"));
        assert!(RewardValue::new(0.0).unwrap() < RewardValue::INFINITY);
        assert_eq!(RewardValue::new(-0.0).unwrap(), RewardValue::ZERO);
    }

    #[test]
    fn bad_entries_name_node_and_channel() {
        let doc: GraphDocument = serde_json::from_str(
            r#"{"start": "s", "nodes": [{"id": "7", "cost": 1, "rewards": {"toilet": -3}}]}"#,
        )
        .unwrap();
        let err = RewardModel::from_document(&doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("node 7") && msg.contains("toilet"), "{msg}");
    }

    #[test]
    fn conflicting_spellings_rejected() {
        let doc: GraphDocument = serde_json::from_str(
            r#"{"start": "s", "nodes": [
                {"id": "1", "cost": 1, "rewards": {"t+a+b": 1}},
                {"id": "2", "cost": 1, "rewards": {"t+b+a": 1}}]}"#,
        )
        .unwrap();
        assert_eq!(
            RewardModel::from_document(&doc),
            Err(RewardError::DuplicateChannel("t+a+b".into()))
        );
    }
}
