//! Serializable graph export, consumed by the CLI's `--dump-graph` flag and
//! by tests that compare graphs against enumeration oracles.

use mpds_core::MpdsSystem;
use serde::{Deserialize, Serialize};

use crate::ConfigGraph;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeDump {
    pub id: u32,
    pub state: String,
    /// Top-first symbol spellings, bottom omitted.
    pub stacks: Vec<Vec<String>>,
    pub contexts: u32,
    pub frontier: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeDump {
    pub src: u32,
    #[serde(rename = "transition-index")]
    pub transition_index: u32,
    pub dst: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphDump {
    pub nodes: Vec<NodeDump>,
    pub edges: Vec<EdgeDump>,
    pub capped: bool,
}

pub fn dump(g: &ConfigGraph, sys: &MpdsSystem) -> GraphDump {
    let nodes = (0..g.node_count() as u32)
        .map(|id| {
            let config = g.materialize(id, sys);
            NodeDump {
                id,
                state: sys.state_name(config.state).to_owned(),
                stacks: config
                    .stacks
                    .iter()
                    .map(|w| w.prefix_top_first().map(|s| s.spelling()).collect())
                    .collect(),
                contexts: g.node_contexts(id),
                frontier: g.is_frontier(id),
            }
        })
        .collect();
    let mut edges = Vec::with_capacity(g.edge_count());
    for src in 0..g.node_count() as u32 {
        for (tidx, dst) in g.successors(src) {
            edges.push(EdgeDump { src, transition_index: tidx, dst });
        }
    }
    GraphDump { nodes, edges, capped: g.capped() }
}
