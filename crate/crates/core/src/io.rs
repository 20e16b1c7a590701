//! Graph JSON interchange format.
//!
//! ```json
//! {"lambda": 0.2, "r_tr": 0.3, "nodes": [[0.1, 0.2], ...], "edges": [[0, 1], {"ends": [1, 2], "tag": "joined"}]}
//! ```
//!
//! Edges are stored explicitly so adapted graphs survive a round trip
//! unchanged. A plain `[i, j]` pair is a UDG edge; edges added by an
//! adaptation carry their provenance as an object with a `tag` field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{EdgeTag, GeometricGraph, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeEntry {
    Plain([usize; 2]),
    Tagged { ends: [usize; 2], tag: EdgeTag },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub lambda: f64,
    pub r_tr: f64,
    pub nodes: Vec<[f64; 2]>,
    pub edges: Vec<EdgeEntry>,
}

impl From<&GeometricGraph> for GraphDocument {
    fn from(g: &GeometricGraph) -> Self {
        GraphDocument {
            lambda: g.lambda(),
            r_tr: g.r_tr(),
            nodes: g.positions().iter().map(|p| [p.x, p.y]).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| match e.tag {
                    EdgeTag::Udg => EdgeEntry::Plain([e.u.0, e.v.0]),
                    tag => EdgeEntry::Tagged { ends: [e.u.0, e.v.0], tag },
                })
                .collect(),
        }
    }
}

impl GraphDocument {
    pub fn into_graph(self) -> Result<GeometricGraph> {
        let positions = self.nodes.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let edges = self.edges.into_iter().map(|e| match e {
            EdgeEntry::Plain([a, b]) => (a, b, EdgeTag::Udg),
            EdgeEntry::Tagged { ends: [a, b], tag } => (a, b, tag),
        });
        GeometricGraph::from_parts(positions, edges, self.r_tr, self.lambda)
    }
}

pub fn graph_to_json(g: &GeometricGraph) -> String {
    serde_json::to_string(&GraphDocument::from(g)).expect("graph documents always serialise")
}

pub fn graph_from_json(text: &str) -> Result<GeometricGraph> {
    let doc: GraphDocument = serde_json::from_str(text)?;
    doc.into_graph()
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GeometricGraph> {
    graph_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_graph(path: impl AsRef<Path>, g: &GeometricGraph) -> Result<()> {
    let mut text = graph_to_json(g);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
