//! Dependency snapshots: one resolved dependency graph at a point in time.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::error::ModelError;
use super::ids::{LibraryId, LibraryInstance};
use super::version::Version;

pub type NodeKey = (LibraryId, Version);

/// A connected, single-rooted, acyclic dependency graph whose nodes are
/// library instances and whose edges point to direct dependencies.
///
/// Node 0 is always the root; remaining nodes are stored in breadth-first
/// order from the root, which callers rely on for deterministic traversal.
#[derive(Debug, Clone)]
pub struct DependencySnapshot {
    nodes: Vec<LibraryInstance>,
    deps: Vec<Vec<usize>>,
    observed_at: Option<NaiveDate>,
}

impl DependencySnapshot {
    /// Validates and builds a snapshot from a root and directed edges
    /// (dependent, dependency). Duplicate mentions of one (id, version)
    /// merge into a single node; differing release dates are rejected.
    pub fn new(
        root: LibraryInstance,
        edges: impl IntoIterator<Item = (LibraryInstance, LibraryInstance)>,
        observed_at: Option<NaiveDate>,
    ) -> Result<Self, ModelError> {
        let mut index: BTreeMap<NodeKey, usize> = BTreeMap::new();
        let mut nodes: Vec<LibraryInstance> = Vec::new();
        let intern = |inst: LibraryInstance,
                          nodes: &mut Vec<LibraryInstance>,
                          index: &mut BTreeMap<NodeKey, usize>|
         -> Result<usize, ModelError> {
            let key = (inst.id.clone(), inst.version.clone());
            if let Some(&i) = index.get(&key) {
                if nodes[i].release_date != inst.release_date {
                    return Err(ModelError::ConflictingMetadata {
                        gav: inst.gav(),
                        first: nodes[i].release_date,
                        second: inst.release_date,
                    });
                }
                return Ok(i);
            }
            let i = nodes.len();
            index.insert(key, i);
            nodes.push(inst);
            Ok(i)
        };

        let root_idx = intern(root, &mut nodes, &mut index)?;
        debug_assert_eq!(root_idx, 0);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
        for (from, to) in edges {
            let f = intern(from, &mut nodes, &mut index)?;
            let t = intern(to, &mut nodes, &mut index)?;
            adj.resize(nodes.len(), Vec::new());
            if t == 0 {
                return Err(ModelError::RootIsDependency { gav: nodes[0].gav() });
            }
            if !adj[f].contains(&t) {
                adj[f].push(t);
            }
        }
        adj.resize(nodes.len(), Vec::new());

        // cycle + connectivity check in one DFS from the root
        let mut color = vec![0u8; nodes.len()]; // 0 unvisited, 1 on stack, 2 done
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        color[0] = 1;
        while let Some(&mut (n, ref mut ei)) = stack.last_mut() {
            if *ei < adj[n].len() {
                let next = adj[n][*ei];
                *ei += 1;
                match color[next] {
                    0 => {
                        color[next] = 1;
                        stack.push((next, 0));
                    }
                    1 => {
                        return Err(ModelError::CycleDetected { gav: nodes[next].gav() });
                    }
                    _ => {}
                }
            } else {
                color[n] = 2;
                stack.pop();
            }
        }
        if let Some(i) = color.iter().position(|&c| c == 0) {
            return Err(ModelError::Disconnected { gav: nodes[i].gav() });
        }

        // normalize to BFS order from the root
        let mut order = Vec::with_capacity(nodes.len());
        let mut seen = vec![false; nodes.len()];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for &d in &adj[n] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        let mut rank = vec![0usize; nodes.len()];
        for (new_i, &old_i) in order.iter().enumerate() {
            rank[old_i] = new_i;
        }
        let mut new_nodes = vec![nodes[0].clone(); nodes.len()];
        let mut new_deps = vec![Vec::new(); nodes.len()];
        for &old_i in &order {
            new_nodes[rank[old_i]] = nodes[old_i].clone();
            new_deps[rank[old_i]] = adj[old_i].iter().map(|&d| rank[d]).collect();
        }

        Ok(DependencySnapshot {
            nodes: new_nodes,
            deps: new_deps,
            observed_at,
        })
    }

    /// A snapshot with a bare root and no dependencies.
    pub fn single(root: LibraryInstance, observed_at: Option<NaiveDate>) -> Self {
        DependencySnapshot {
            nodes: vec![root],
            deps: vec![Vec::new()],
            observed_at,
        }
    }

    pub fn root(&self) -> &LibraryInstance {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[LibraryInstance] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn observed_at(&self) -> Option<NaiveDate> {
        self.observed_at
    }

    pub fn direct_deps(&self, node: usize) -> &[usize] {
        &self.deps[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.deps[node].is_empty()
    }

    pub fn node_index(&self, id: &LibraryId, version: &Version) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| &n.id == id && &n.version == version)
    }

    /// All (dependent, dependency) pairs.
    pub fn edges(&self) -> impl Iterator<Item = (&LibraryInstance, &LibraryInstance)> {
        self.deps.iter().enumerate().flat_map(move |(f, ds)| {
            ds.iter().map(move |&t| (&self.nodes[f], &self.nodes[t]))
        })
    }

    fn node_set(&self) -> BTreeMap<NodeKey, NaiveDate> {
        self.nodes
            .iter()
            .map(|n| ((n.id.clone(), n.version.clone()), n.release_date))
            .collect()
    }

    fn edge_set(&self) -> std::collections::BTreeSet<(NodeKey, NodeKey)> {
        self.edges()
            .map(|(f, t)| {
                (
                    (f.id.clone(), f.version.clone()),
                    (t.id.clone(), t.version.clone()),
                )
            })
            .collect()
    }

    /// Node-for-node, edge-for-edge equality, ignoring the observation date.
    pub fn same_structure(&self, other: &DependencySnapshot) -> bool {
        self.nodes[0].key() == other.nodes[0].key()
            && self.node_set() == other.node_set()
            && self.edge_set() == other.edge_set()
    }
}

impl PartialEq for DependencySnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.observed_at == other.observed_at && self.same_structure(other)
    }
}

impl Eq for DependencySnapshot {}
