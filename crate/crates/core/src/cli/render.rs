//! Text renderings of a goal set: table, JSON, GeoJSON and DOT.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::reward::{channel_key, RewardValue};
use crate::solver::{Goal, GoalSet, Query};
use crate::star_graph::{GeoPoint, NodeId, StarGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Geojson,
    Dot,
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("geojson output needs coordinates, but node {0} has none")]
    MissingCoordinates(NodeId),
    #[error("malformed result document: {0}")]
    Parse(String),
}

pub fn render(
    goals: &GoalSet,
    format: OutputFormat,
    graph: &StarGraph,
    query: &Query,
) -> Result<String, RenderError> {
    match format {
        OutputFormat::Table => Ok(table(goals, query)),
        OutputFormat::Json => Ok(json(goals, graph, query)),
        OutputFormat::Geojson => geojson(goals, graph),
        OutputFormat::Dot => Ok(dot(goals, graph)),
    }
}

/// Reward as printed: four decimals on the unfactored channel, shortest
/// representation otherwise.
fn reward_text(reward: RewardValue, query: &Query) -> String {
    if query.factors().is_empty() {
        format!("{reward:.4}")
    } else {
        reward.to_string()
    }
}

fn table(goals: &GoalSet, query: &Query) -> String {
    let rows: Vec<[String; 3]> = goals
        .iter()
        .enumerate()
        .map(|(i, g)| {
            [
                format!("v_g{} = {}", i + 1, g.node),
                format!("{:.2}", g.cost),
                reward_text(g.reward, query),
            ]
        })
        .collect();
    let reward_header = format!("R({})", channel_key(query.objective(), query.factors()));
    let header = ["Goals".to_owned(), "Cost".to_owned(), reward_header];
    let widths: Vec<usize> = (0..3)
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    let line = |out: &mut String, cells: &[String; 3]| {
        let _ = writeln!(
            out,
            "{:<w0$}  {:>w1$}  {:>w2$}",
            cells[0],
            cells[1],
            cells[2],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        );
    };
    line(&mut out, &header);
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 4));
    for r in &rows {
        line(&mut out, r);
    }
    out
}

fn meters(x: f64) -> Value {
    if x.is_infinite() {
        Value::from("inf")
    } else {
        Value::from(x)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RankedGoal {
    rank: usize,
    node: NodeId,
    cost: f64,
    reward: RewardValue,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonReport {
    query: Value,
    goals: Vec<RankedGoal>,
}

fn json(goals: &GoalSet, graph: &StarGraph, query: &Query) -> String {
    let report = JsonReport {
        query: json!({
            "start": graph.start(),
            "budget": meters(query.budget()),
            "delta": meters(query.delta()),
            "limit": meters(query.limit()),
            "k": query.k(),
            "objective": query.objective(),
            "factors": query.factors(),
            "only": query.whitelist(),
        }),
        goals: goals
            .iter()
            .enumerate()
            .map(|(i, g)| RankedGoal {
                rank: i + 1,
                node: g.node.clone(),
                cost: g.cost,
                reward: g.reward,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report is always serializable");
    s.push('\n');
    s
}

/// Read the goals back out of [`OutputFormat::Json`] output.
pub fn parse_json_goals(text: &str) -> Result<GoalSet, RenderError> {
    let report: JsonReport =
        serde_json::from_str(text).map_err(|e| RenderError::Parse(e.to_string()))?;
    Ok(report
        .goals
        .into_iter()
        .map(|g| Goal {
            node: g.node,
            cost: g.cost,
            reward: g.reward,
        })
        .collect())
}

fn lon_lat(p: GeoPoint) -> Value {
    json!([p.lon, p.lat])
}

fn geojson(goals: &GoalSet, graph: &StarGraph) -> Result<String, RenderError> {
    let start = graph
        .start_location()
        .ok_or_else(|| RenderError::MissingCoordinates(graph.start().clone()))?;
    let mut features = vec![json!({
        "type": "Feature",
        "geometry": { "type": "Point", "coordinates": lon_lat(start) },
        "properties": { "role": "start", "id": graph.start(), "name": graph.start_name() },
    })];
    for (i, goal) in goals.iter().enumerate() {
        let leaf = graph.leaf(&goal.node);
        let at = leaf
            .and_then(|l| l.location)
            .ok_or_else(|| RenderError::MissingCoordinates(goal.node.clone()))?;
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": lon_lat(at) },
            "properties": {
                "role": "goal",
                "id": goal.node,
                "name": leaf.and_then(|l| l.name.as_deref()),
                "rank": i + 1,
                "cost": goal.cost,
                "reward": goal.reward,
            },
        }));
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": [lon_lat(start), lon_lat(at)] },
            "properties": { "role": "edge", "from": graph.start(), "to": goal.node, "rank": i + 1, "cost": goal.cost },
        }));
    }
    let doc = json!({ "type": "FeatureCollection", "features": features });
    let mut s = serde_json::to_string_pretty(&doc).expect("geojson is always serializable");
    s.push('\n');
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

fn dot(goals: &GoalSet, graph: &StarGraph) -> String {
    let mut out = String::from("digraph star {\n  rankdir=LR;\n");
    let start = escape(graph.start().as_str());
    let _ = writeln!(
        out,
        "  \"{start}\" [shape=doublecircle, label=\"{start}\\nstart\"];"
    );
    for leaf in graph.leaves() {
        let id = quoted(leaf.id.as_str());
        match goals.iter().position(|g| g.node == leaf.id) {
            Some(i) => {
                let _ = writeln!(
                    out,
                    "  {id} [label=\"{}\\n#{}\", style=filled, fillcolor=gold, penwidth=2];",
                    escape(leaf.id.as_str()),
                    i + 1
                );
            }
            None => {
                let _ = writeln!(out, "  {id};");
            }
        }
    }
    for leaf in graph.leaves() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quoted(graph.start().as_str()),
            quoted(leaf.id.as_str()),
            quoted(&format!("{:.2}", leaf.cost))
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward::{FactorSet, Objective};
    use crate::solver::solve;
    use crate::Dataset;

    fn parkville() -> Dataset {
        Dataset::from_reader(crate::PARKVILLE_JSON.as_bytes()).unwrap()
    }

    fn query(delta: f64, covid: bool) -> Query {
        let f = if covid {
            FactorSet::new(["covid"]).unwrap()
        } else {
            FactorSet::empty()
        };
        Query::builder(200.0, Objective::new("meeting_room").unwrap())
            .delta(delta)
            .factors(f)
            .build()
            .unwrap()
    }

    #[test]
    fn table_layout() {
        let d = parkville();
        let q = query(0.0, false);
        let goals = solve(&d.graph, &d.rewards, &q).unwrap();
        let text = render(&goals, OutputFormat::Table, &d.graph, &q).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("Goals"));
        assert!(
            lines[2].starts_with("v_g1 = 260")
                && lines[2].contains("77.69")
                && lines[2].ends_with("0.0020")
        );
        assert!(lines[3].contains("70.25") && lines[3].ends_with("0.0014"));
        assert!(lines[4].contains("70.64") && lines[4].ends_with("0.0007"));
    }

    #[test]
    fn factored_rewards_print_as_stored() {
        let d = parkville();
        let q = query(0.0, true);
        let goals = solve(&d.graph, &d.rewards, &q).unwrap();
        let text = render(&goals, OutputFormat::Table, &d.graph, &q).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with(" 126"));
    }

    #[test]
    fn empty_json_echoes_query() {
        let d = parkville();
        let q = query(0.0, false);
        let text = render(&GoalSet::default(), OutputFormat::Json, &d.graph, &q).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["goals"], json!([]));
        assert_eq!(v["query"]["budget"], json!(200.0));
        assert_eq!(v["query"]["limit"], json!("inf"));
        assert_eq!(v["query"]["objective"], json!("meeting_room"));
        assert!(parse_json_goals(&text).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let d = parkville();
        let q = query(50.0, true);
        let goals = solve(&d.graph, &d.rewards, &q).unwrap();
        let text = render(&goals, OutputFormat::Json, &d.graph, &q).unwrap();
        assert_eq!(parse_json_goals(&text).unwrap(), goals);
    }

    #[test]
    fn dot_marks_ranks() {
        let d = parkville();
        let q = query(50.0, true);
        let goals = solve(&d.graph, &d.rewards, &q).unwrap();
        let text = render(&goals, OutputFormat::Dot, &d.graph, &q).unwrap();
        assert_eq!(text.matches(" -> ").count(), 6);
        assert!(text.contains(r#""110" [label="110\n#1""#));
        assert!(text.contains(r#""102" [label="102\n#2""#));
        assert!(text.contains(r#""105" [label="105\n#3""#));
        assert!(text.contains(r#""260";"#));
    }

    #[test]
    fn geojson_needs_coordinates() {
        let d = parkville();
        let q = query(0.0, false);
        let goals = solve(&d.graph, &d.rewards, &q).unwrap();
        assert_eq!(
            render(&goals, OutputFormat::Geojson, &d.graph, &q),
            Err(RenderError::MissingCoordinates("220".into()))
        );
    }

    #[test]
    fn geojson_feature_collection() {
        let d = Dataset::from_reader(
            r#"{"start": "s", "start_lat": -37.8, "start_lon": 144.96, "nodes": [
                {"id": "a", "cost": 10, "lat": -37.801, "lon": 144.961, "rewards": {"t": 2}},
                {"id": "b", "cost": 20, "lat": -37.802, "lon": 144.962, "rewards": {"t": 1}}]}"#
                .as_bytes(),
        )
        .unwrap();
        let q = Query::builder(50.0, Objective::new("t").unwrap())
            .build()
            .unwrap();
        let goals = solve(&d.graph, &d.rewards, &q).unwrap();
        let text = render(&goals, OutputFormat::Geojson, &d.graph, &q).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["type"], "FeatureCollection");
        let features = v["features"].as_array().unwrap();
        assert_eq!(features.len(), 5);
        assert_eq!(
            features[0]["geometry"]["coordinates"],
            json!([144.96, -37.8])
        );
        assert_eq!(features[1]["properties"]["rank"], 1);
        assert_eq!(features[1]["properties"]["id"], "a");
        assert_eq!(features[2]["geometry"]["type"], "LineString");
    }

    #[test]
    fn dot_escapes_ids() {
        let d = Dataset::from_reader(
            r#"{"start": "Old \"Arts\"", "nodes": [{"id": "x", "cost": 1}]}"#.as_bytes(),
        )
        .unwrap();
        let q = Query::builder(5.0, Objective::new("t").unwrap())
            .build()
            .unwrap();
        let text = render(&GoalSet::default(), OutputFormat::Dot, &d.graph, &q).unwrap();
        assert!(text.contains(r#""Old \"Arts\"" -> "x""#));
    }
}
