//! Time dependency trees: a minimal DAG uniting a family of dependency
//! snapshots over a time span, indexable by time and sliceable by library.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use chrono::NaiveDate;

use super::chain::{build_cchains, CChain};
use super::dmatrix::{contract_row, DCell, DMatrix};
use super::error::ModelError;
use super::ids::{LibraryId, LibraryInstance};
use super::snapshot::DependencySnapshot;
use super::version::Version;

/// The union of a root library's dependency snapshots over time.
///
/// Nodes are unique library instances. Dependency edges carry the set of
/// root-version columns in which they hold; chain edges link consecutive
/// members of each contracted d-matrix row.
#[derive(Debug, Clone)]
pub struct TimeDependencyTree {
    span: (NaiveDate, NaiveDate),
    nodes: Vec<LibraryInstance>,
    dep_edges: BTreeMap<(usize, usize), BTreeSet<usize>>,
    chain_edges: BTreeSet<(usize, usize)>,
    root_chain: CChain,
    column_roots: Vec<usize>,
}

impl TimeDependencyTree {
    pub fn span(&self) -> (NaiveDate, NaiveDate) {
        self.span
    }

    pub fn nodes(&self) -> &[LibraryInstance] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &LibraryInstance {
        &self.nodes[i]
    }

    /// Number of root-version columns.
    pub fn column_count(&self) -> usize {
        self.column_roots.len()
    }

    pub fn root_chain(&self) -> &CChain {
        &self.root_chain
    }

    /// Dependency edges as (from, to, columns).
    pub fn dep_edges(&self) -> impl Iterator<Item = (usize, usize, &BTreeSet<usize>)> {
        self.dep_edges.iter().map(|(&(f, t), cols)| (f, t, cols))
    }

    /// Chain edges as (predecessor, successor).
    pub fn chain_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.chain_edges.iter().copied()
    }

    pub fn node_index(&self, id: &LibraryId, version: &Version) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| &n.id == id && &n.version == version)
    }

    /// Adjacency restricted to one column, ordered by node index.
    fn column_adjacency(&self, col: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (&(f, t), cols) in &self.dep_edges {
            if cols.contains(&col) {
                adj[f].push(t);
            }
        }
        adj
    }

    /// The column whose root was current at time `t`.
    fn column_at(&self, t: NaiveDate) -> Result<usize, ModelError> {
        let (start, end) = self.span;
        if t < start || t > end {
            return Err(ModelError::OutOfSpan { t, start, end });
        }
        let roots = self.root_chain.instances();
        let mut col = 0;
        for (j, r) in roots.iter().enumerate() {
            if r.release_date <= t {
                col = j;
            }
        }
        Ok(col)
    }

    /// Reconstructs the dependency snapshot current at time `t`.
    ///
    /// The root version with the latest release not after `t` is selected;
    /// the span's closed right endpoint maps to the last snapshot.
    pub fn time_index(&self, t: NaiveDate) -> Result<DependencySnapshot, ModelError> {
        let col = self.column_at(t)?;
        Ok(self.snapshot_of_column(col, Some(t)))
    }

    fn snapshot_of_column(&self, col: usize, observed_at: Option<NaiveDate>) -> DependencySnapshot {
        let adj = self.column_adjacency(col);
        let root = self.column_roots[col];
        let mut edges = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(n) = queue.pop_front() {
            for &d in &adj[n] {
                edges.push((self.nodes[n].clone(), self.nodes[d].clone()));
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        DependencySnapshot::new(self.nodes[root].clone(), edges, observed_at)
            .expect("column subgraph of a valid tree is a valid snapshot")
    }

    /// Restricts the tree to one library, producing its d-matrix.
    ///
    /// Rows are parallel occurrence positions; identity across columns is
    /// assigned by matching the occurrence's parent library path, falling
    /// back to version proximity when paths do not line up.
    pub fn library_slice(&self, lib: &LibraryId) -> Result<DMatrix, ModelError> {
        if !self.nodes.iter().any(|n| &n.id == lib) {
            return Err(ModelError::NotADependency {
                library: lib.to_string(),
            });
        }

        let m = self.column_count();
        let version_rank = self.version_ranks(lib);

        struct Row {
            cells: Vec<DCell>,
            last_path: Vec<LibraryId>,
            last_rank: usize,
        }
        let mut rows: Vec<Row> = Vec::new();

        for col in 0..m {
            let occurrences = self.occurrences_in_column(lib, col);
            let mut taken = vec![false; occurrences.len()];
            let mut assigned: Vec<Option<usize>> = vec![None; rows.len()];

            // first pass: parent-path continuity
            for (ri, row) in rows.iter().enumerate() {
                if let Some(oi) = occurrences
                    .iter()
                    .enumerate()
                    .position(|(oi, occ)| !taken[oi] && occ.path == row.last_path)
                {
                    taken[oi] = true;
                    assigned[ri] = Some(oi);
                }
            }
            // second pass: version proximity for still-open rows
            for (ri, row) in rows.iter().enumerate() {
                if assigned[ri].is_some() {
                    continue;
                }
                let best = occurrences
                    .iter()
                    .enumerate()
                    .filter(|(oi, _)| !taken[*oi])
                    .min_by_key(|(_, occ)| {
                        let r = version_rank[&occ.instance.version];
                        (r.abs_diff(row.last_rank), r)
                    })
                    .map(|(oi, _)| oi);
                if let Some(oi) = best {
                    taken[oi] = true;
                    assigned[ri] = Some(oi);
                }
            }
            for (ri, slot) in assigned.iter().enumerate() {
                match slot {
                    Some(oi) => {
                        let occ = &occurrences[*oi];
                        rows[ri].cells.push(DCell::Present(occ.instance.clone()));
                        rows[ri].last_path = occ.path.clone();
                        rows[ri].last_rank = version_rank[&occ.instance.version];
                    }
                    None => rows[ri].cells.push(DCell::Absent),
                }
            }
            // leftover occurrences open new rows, padded on the left
            for (oi, occ) in occurrences.iter().enumerate() {
                if taken[oi] {
                    continue;
                }
                let mut cells = vec![DCell::Absent; col];
                cells.push(DCell::Present(occ.instance.clone()));
                rows.push(Row {
                    cells,
                    last_path: occ.path.clone(),
                    last_rank: version_rank[&occ.instance.version],
                });
            }
        }

        let columns = self
            .root_chain
            .instances()
            .iter()
            .map(|r| r.release_date)
            .collect();
        Ok(DMatrix::new(
            lib.clone(),
            columns,
            rows.into_iter().map(|r| r.cells).collect(),
        ))
    }

    /// Global order of the distinct versions of `lib` in this tree.
    fn version_ranks(&self, lib: &LibraryId) -> BTreeMap<Version, usize> {
        let mut versions: Vec<&Version> = self
            .nodes
            .iter()
            .filter(|n| &n.id == lib)
            .map(|n| &n.version)
            .collect();
        versions.sort();
        versions.dedup();
        versions
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect()
    }

    /// Instances of `lib` in a column, each with its shortest parent
    /// library path, ordered shortest-path-first then by discovery.
    fn occurrences_in_column(&self, lib: &LibraryId, col: usize) -> Vec<Occurrence> {
        let adj = self.column_adjacency(col);
        let root = self.column_roots[col];
        let mut parent: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut depth: Vec<usize> = vec![usize::MAX; self.nodes.len()];
        let mut order: Vec<usize> = Vec::new();
        let mut queue = VecDeque::from([root]);
        depth[root] = 0;
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for &d in &adj[n] {
                if depth[d] == usize::MAX {
                    depth[d] = depth[n] + 1;
                    parent[d] = Some(n);
                    queue.push_back(d);
                }
            }
        }
        order
            .iter()
            .filter(|&&n| &self.nodes[n].id == lib)
            .map(|&n| {
                let mut path = Vec::new();
                let mut cur = parent[n];
                while let Some(p) = cur {
                    path.push(self.nodes[p].id.clone());
                    cur = parent[p];
                }
                path.reverse();
                Occurrence {
                    instance: self.nodes[n].clone(),
                    path,
                }
            })
            .collect()
    }

    /// Distinct library ids occurring anywhere in the tree.
    pub fn libraries(&self) -> Vec<LibraryId> {
        let mut ids: Vec<LibraryId> = self.nodes.iter().map(|n| n.id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

struct Occurrence {
    instance: LibraryInstance,
    path: Vec<LibraryId>,
}

/// Unites an ordered family of snapshots of one root library into a
/// time dependency tree.
pub fn build_tdt(snapshots: &[DependencySnapshot]) -> Result<TimeDependencyTree, ModelError> {
    if snapshots.is_empty() {
        return Err(ModelError::EmptyFamily);
    }
    let root_id = &snapshots[0].root().id;
    for s in snapshots.iter().skip(1) {
        if &s.root().id != root_id {
            return Err(ModelError::MixedRoots {
                expected: root_id.to_string(),
                found: s.root().id.to_string(),
            });
        }
    }
    for w in snapshots.windows(2) {
        if w[0].root().release_date >= w[1].root().release_date {
            return Err(ModelError::UnorderedSnapshots {
                prev: w[0].root().gav(),
                prev_date: w[0].root().release_date,
                next: w[1].root().gav(),
                next_date: w[1].root().release_date,
            });
        }
    }

    let mut nodes: Vec<LibraryInstance> = Vec::new();
    let mut index: BTreeMap<(LibraryId, Version), usize> = BTreeMap::new();
    let intern = |inst: &LibraryInstance,
                      nodes: &mut Vec<LibraryInstance>,
                      index: &mut BTreeMap<(LibraryId, Version), usize>|
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
        nodes.push(inst.clone());
        Ok(i)
    };

    let mut dep_edges: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut column_roots = Vec::with_capacity(snapshots.len());
    for (col, snap) in snapshots.iter().enumerate() {
        // snapshot nodes are BFS-ordered, keeping interning deterministic
        for n in snap.nodes() {
            intern(n, &mut nodes, &mut index)?;
        }
        column_roots.push(index[&(snap.root().id.clone(), snap.root().version.clone())]);
        for (f, t) in snap.edges() {
            let fi = index[&(f.id.clone(), f.version.clone())];
            let ti = index[&(t.id.clone(), t.version.clone())];
            dep_edges.entry((fi, ti)).or_default().insert(col);
        }
    }

    let root_chain = build_cchains(snapshots.iter().map(|s| s.root().clone()))?
        .pop()
        .expect("at least one snapshot root");
    let span = (
        snapshots[0].root().release_date,
        snapshots[snapshots.len() - 1].root().release_date,
    );

    let mut tdt = TimeDependencyTree {
        span,
        nodes,
        dep_edges,
        chain_edges: BTreeSet::new(),
        root_chain,
        column_roots,
    };

    // chain edges: successors within each contracted d-matrix row
    let mut chain_edges = BTreeSet::new();
    for lib in tdt.libraries() {
        let matrix = tdt.library_slice(&lib)?;
        for row in 0..matrix.row_count() {
            let chain = contract_row(lib.clone(), &matrix.rows()[row])?;
            for (a, b) in chain.successor_pairs() {
                let ai = tdt.node_index(&a.id, &a.version).expect("chain node interned");
                let bi = tdt.node_index(&b.id, &b.version).expect("chain node interned");
                chain_edges.insert((ai, bi));
            }
        }
    }
    tdt.chain_edges = chain_edges;
    Ok(tdt)
}
