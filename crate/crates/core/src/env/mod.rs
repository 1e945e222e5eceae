//! Obstacle map, visibility, and the discrete motion graph robots move on.

mod access;
mod graph;
mod map;

pub use access::AccessPointLayout;
pub use graph::{build_graph, ComponentSummary, ControlGraph, NodeId, UNREACHABLE};
pub use map::{EnvironmentMap, Point, MAP_SCHEMA};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("map parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("free space is disconnected into {} components: {}", components.len(), fmt_components(components))]
    Disconnected { components: Vec<ComponentSummary> },
    #[error("no path from node {from} to node {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0}")]
    Io(String),
}

fn fmt_components(components: &[ComponentSummary]) -> String {
    components.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
