//! Graph-file exports for time dependency trees.

use std::fmt::Write as _;

use serde::Serialize;

use super::tdt::TimeDependencyTree;

#[derive(Debug, Serialize)]
pub struct GraphFile {
    pub span: SpanOut,
    pub nodes: Vec<NodeOut>,
    pub dep_edges: Vec<DepEdgeOut>,
    pub chain_edges: Vec<ChainEdgeOut>,
}

#[derive(Debug, Serialize)]
pub struct SpanOut {
    pub start: String,
    pub end: String,
}

#[derive(Debug, Serialize)]
pub struct NodeOut {
    pub ga: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_tag: Option<String>,
    pub version: String,
    pub release_date: String,
}

#[derive(Debug, Serialize)]
pub struct DepEdgeOut {
    pub from: usize,
    pub to: usize,
    pub columns: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct ChainEdgeOut {
    pub from: usize,
    pub to: usize,
}

/// Serializable graph form with nodes sorted by coordinate, so identical
/// trees always export identical bytes.
pub fn to_graph_file(tdt: &TimeDependencyTree) -> GraphFile {
    let mut order: Vec<usize> = (0..tdt.nodes().len()).collect();
    order.sort_by(|&a, &b| {
        let na = tdt.node(a);
        let nb = tdt.node(b);
        (&na.id, &na.version).cmp(&(&nb.id, &nb.version))
    });
    let mut rank = vec![0usize; order.len()];
    for (new_i, &old_i) in order.iter().enumerate() {
        rank[old_i] = new_i;
    }

    let nodes = order
        .iter()
        .map(|&i| {
            let n = tdt.node(i);
            NodeOut {
                ga: n.id.ga(),
                chain_tag: n.id.chain_tag.clone(),
                version: n.version.raw().to_string(),
                release_date: n.release_date.to_string(),
            }
        })
        .collect();

    let mut dep_edges: Vec<DepEdgeOut> = tdt
        .dep_edges()
        .map(|(f, t, cols)| DepEdgeOut {
            from: rank[f],
            to: rank[t],
            columns: cols.iter().copied().collect(),
        })
        .collect();
    dep_edges.sort_by_key(|e| (e.from, e.to));

    let mut chain_edges: Vec<ChainEdgeOut> = tdt
        .chain_edges()
        .map(|(f, t)| ChainEdgeOut {
            from: rank[f],
            to: rank[t],
        })
        .collect();
    chain_edges.sort_by_key(|e| (e.from, e.to));

    let (start, end) = tdt.span();
    GraphFile {
        span: SpanOut {
            start: start.to_string(),
            end: end.to_string(),
        },
        nodes,
        dep_edges,
        chain_edges,
    }
}

pub fn to_graph_json(tdt: &TimeDependencyTree) -> String {
    let mut s = serde_json::to_string_pretty(&to_graph_file(tdt)).expect("graph serializes");
    s.push('\n');
    s
}

/// DOT rendering: dependency edges solid, chain edges dashed.
pub fn to_dot(tdt: &TimeDependencyTree) -> String {
    let g = to_graph_file(tdt);
    let label = |n: &NodeOut| match &n.chain_tag {
        Some(tag) => format!("{}#{}:{}", n.ga, tag, n.version),
        None => format!("{}:{}", n.ga, n.version),
    };
    let mut out = String::from("digraph tdt {\n  rankdir=TB;\n  node [shape=box];\n");
    for n in &g.nodes {
        let _ = writeln!(out, "  \"{}\";", label(n));
    }
    for e in &g.dep_edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\";",
            label(&g.nodes[e.from]),
            label(&g.nodes[e.to])
        );
    }
    for e in &g.chain_edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [style=dashed];",
            label(&g.nodes[e.from]),
            label(&g.nodes[e.to])
        );
    }
    out.push_str("}\n");
    out
}
