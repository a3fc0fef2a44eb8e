//! Ecosystem-level analytics over time dependency trees: pervasive
//! dependencies, single points of failure via reverse reachability, and
//! chain health against a vulnerability feed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::evidence::find_evidence;
use crate::ingest::VulnerabilityRecord;
use crate::model::{CChain, LibraryInstance, TimeDependencyTree};

/// An instance reaching many root versions through reverse dependency
/// edges.
#[derive(Debug, Clone, Serialize)]
pub struct SpofReport {
    pub instance: LibraryInstance,
    /// Root versions whose snapshot contains the instance.
    pub compromised_root_versions: Vec<String>,
    pub coverage_fraction: f64,
}

/// Health of one chain: how much of it is touched by disclosed
/// vulnerabilities.
#[derive(Debug, Clone, Serialize)]
pub struct ChainHealth {
    pub chain: String,
    pub instances_total: usize,
    pub instances_affected: usize,
    pub fraction_affected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HealthReport {
    pub chains: Vec<ChainHealth>,
    /// Affected over total instances, across all chains.
    pub aggregate_fraction: f64,
}

/// Ranks instances by the number of distinct instances that depend on
/// them directly, in any column. Entries below `min_dependents` drop out.
pub fn pervasive_dependencies(
    tdt: &TimeDependencyTree,
    min_dependents: usize,
) -> Vec<(LibraryInstance, usize)> {
    let mut dependents: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (f, t, _cols) in tdt.dep_edges() {
        dependents.entry(t).or_default().insert(f);
    }
    rank_by_count(tdt, dependents, min_dependents)
}

/// Optional transitive variant: counts distinct instances that reach the
/// dependency through any column's dependency paths.
pub fn pervasive_dependencies_transitive(
    tdt: &TimeDependencyTree,
    min_dependents: usize,
) -> Vec<(LibraryInstance, usize)> {
    let n = tdt.nodes().len();
    // reverse adjacency ignoring columns: a transitive dependent in any
    // column is a dependent
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (f, t, _cols) in tdt.dep_edges() {
        radj[t].push(f);
    }
    let mut dependents: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for start in 0..n {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(x) = queue.pop_front() {
            for &f in &radj[x] {
                if !seen[f] {
                    seen[f] = true;
                    dependents.entry(start).or_default().insert(f);
                    queue.push_back(f);
                }
            }
        }
    }
    rank_by_count(tdt, dependents, min_dependents)
}

fn rank_by_count(
    tdt: &TimeDependencyTree,
    dependents: BTreeMap<usize, BTreeSet<usize>>,
    min_dependents: usize,
) -> Vec<(LibraryInstance, usize)> {
    let mut ranked: Vec<(LibraryInstance, usize)> = dependents
        .into_iter()
        .map(|(i, ds)| (tdt.node(i).clone(), ds.len()))
        .filter(|(_, count)| *count >= min_dependents.max(1))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| (&a.0.id, &a.0.version).cmp(&(&b.0.id, &b.0.version)))
    });
    ranked
}

/// Root-version columns that can be compromised through `node`, by
/// reverse reachability over column-tagged dependency edges.
fn compromised_columns(tdt: &TimeDependencyTree, node: usize) -> BTreeSet<usize> {
    let n = tdt.nodes().len();
    let m = tdt.column_count();
    let all: BTreeSet<usize> = (0..m).collect();

    // reverse edges with their column tags
    let mut redges: Vec<Vec<(usize, BTreeSet<usize>)>> = vec![Vec::new(); n];
    for (f, t, cols) in tdt.dep_edges() {
        redges[t].push((f, cols.clone()));
    }

    let mut acc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    acc[node] = all;
    let mut queue = VecDeque::from([node]);
    while let Some(x) = queue.pop_front() {
        let carried = acc[x].clone();
        for (f, cols) in &redges[x] {
            let passed: BTreeSet<usize> = carried.intersection(cols).copied().collect();
            if !passed.is_subset(&acc[*f]) {
                acc[*f].extend(passed);
                queue.push_back(*f);
            }
        }
    }

    let roots = tdt.root_chain().instances();
    (0..m)
        .filter(|&j| {
            let root_idx = tdt
                .node_index(&roots[j].id, &roots[j].version)
                .expect("root interned");
            acc[root_idx].contains(&j)
        })
        .collect()
}

/// Finds dependency instances whose compromise reaches at least
/// `min_coverage` of the root versions.
pub fn spof(tdt: &TimeDependencyTree, min_coverage: f64) -> Vec<SpofReport> {
    let m = tdt.column_count();
    let root_lib = tdt.root_chain().id().clone();
    let roots = tdt.root_chain().instances();
    let mut reports = Vec::new();
    for (i, inst) in tdt.nodes().iter().enumerate() {
        if inst.id == root_lib {
            continue;
        }
        let columns = compromised_columns(tdt, i);
        if columns.is_empty() {
            continue;
        }
        let coverage = columns.len() as f64 / m as f64;
        if coverage >= min_coverage {
            reports.push(SpofReport {
                instance: inst.clone(),
                compromised_root_versions: columns
                    .iter()
                    .map(|&j| roots[j].version.raw().to_string())
                    .collect(),
                coverage_fraction: coverage,
            });
        }
    }
    reports.sort_by(|a, b| {
        b.coverage_fraction
            .partial_cmp(&a.coverage_fraction)
            .expect("fractions are finite")
            .then_with(|| {
                (&a.instance.id, &a.instance.version).cmp(&(&b.instance.id, &b.instance.version))
            })
    });
    reports
}

/// Fraction of each chain affected by the feed, under the conservative
/// rule that every version up to a vulnerability's evidence instance is
/// vulnerable too.
pub fn chain_health(chains: &[CChain], vulns: &[VulnerabilityRecord]) -> HealthReport {
    let mut out = Vec::with_capacity(chains.len());
    let mut total = 0usize;
    let mut affected_total = 0usize;
    for chain in chains {
        let mut affected = vec![false; chain.len()];
        for vuln in vulns {
            if let Some(evidence) = find_evidence(vuln, chain) {
                let idx = chain
                    .position(&evidence.version)
                    .expect("evidence comes from this chain");
                for flag in affected.iter_mut().take(idx + 1) {
                    *flag = true;
                }
            }
        }
        let count = affected.iter().filter(|&&a| a).count();
        total += chain.len();
        affected_total += count;
        out.push(ChainHealth {
            chain: chain.id().to_string(),
            instances_total: chain.len(),
            instances_affected: count,
            fraction_affected: if chain.is_empty() {
                0.0
            } else {
                count as f64 / chain.len() as f64
            },
        });
    }
    out.sort_by(|a, b| a.chain.cmp(&b.chain));
    HealthReport {
        chains: out,
        aggregate_fraction: if total == 0 {
            0.0
        } else {
            affected_total as f64 / total as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AffectedLibrary, VersionRange};
    use crate::model::{build_cchains, build_tdt, DependencySnapshot, LibraryId};
    use chrono::NaiveDate;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn inst(a: &str, v: &str, rel: NaiveDate) -> LibraryInstance {
        LibraryInstance::new(LibraryId::new("t", a), v, rel)
    }

    /// Four root versions, each reaching z:2.1 through its own middle
    /// layer; z is the single point of failure.
    fn spof_family() -> Vec<DependencySnapshot> {
        let z = inst("z", "2.1", d(2020, 1, 1));
        let mut snaps = Vec::new();
        for (i, (rv, yv)) in [("0.9", "1"), ("1.0", "1"), ("1.1", "2"), ("1.2", "2")]
            .iter()
            .enumerate()
        {
            let root = inst("l", rv, d(2021, 1, 1 + i as u32));
            let y = inst("y", yv, d(2020, 6, 1));
            snaps.push(
                DependencySnapshot::new(
                    root.clone(),
                    vec![(root.clone(), y.clone()), (y.clone(), z.clone())],
                    None,
                )
                .unwrap(),
            );
        }
        snaps
    }

    #[test]
    fn spof_covers_all_roots() {
        let tdt = build_tdt(&spof_family()).unwrap();
        let reports = spof(&tdt, 0.9);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].instance.gav(), "t:z:2.1");
        assert_eq!(reports[0].coverage_fraction, 1.0);
        assert_eq!(
            reports[0].compromised_root_versions,
            vec!["0.9", "1.0", "1.1", "1.2"]
        );
    }

    #[test]
    fn direct_dependency_of_one_root_covers_one_of_m() {
        let a1 = inst("a", "1", d(2021, 1, 1));
        let a2 = inst("a", "2", d(2021, 2, 1));
        let b = inst("b", "1", d(2020, 1, 1));
        let s1 =
            DependencySnapshot::new(a1.clone(), vec![(a1.clone(), b.clone())], None).unwrap();
        let s2 = DependencySnapshot::single(a2, None);
        let tdt = build_tdt(&[s1, s2]).unwrap();
        let reports = spof(&tdt, 0.0);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].coverage_fraction, 0.5);
        assert_eq!(reports[0].compromised_root_versions, vec!["1"]);
    }

    #[test]
    fn spof_matches_per_snapshot_membership() {
        let snaps = spof_family();
        let tdt = build_tdt(&snaps).unwrap();
        // oracle: forward DFS membership per snapshot
        for report in spof(&tdt, 0.0) {
            let mut expected = Vec::new();
            for s in &snaps {
                if s.nodes().iter().any(|n| n == &report.instance) {
                    expected.push(s.root().version.raw().to_string());
                }
            }
            assert_eq!(report.compromised_root_versions, expected);
        }
    }

    #[test]
    fn pervasive_counts_distinct_dependents() {
        let tdt = build_tdt(&spof_family()).unwrap();
        let ranked = pervasive_dependencies(&tdt, 1);
        // z:2.1 has dependents y:1 and y:2
        let z = ranked.iter().find(|(i, _)| i.gav() == "t:z:2.1").unwrap();
        assert_eq!(z.1, 2);
        // each y has two root dependents
        let y1 = ranked.iter().find(|(i, _)| i.gav() == "t:y:1").unwrap();
        assert_eq!(y1.1, 2);
    }

    #[test]
    fn pervasive_transitive_counts_reachers() {
        let tdt = build_tdt(&spof_family()).unwrap();
        let ranked = pervasive_dependencies_transitive(&tdt, 1);
        let z = ranked.iter().find(|(i, _)| i.gav() == "t:z:2.1").unwrap();
        // four roots + two middle-layer instances
        assert_eq!(z.1, 6);
    }

    #[test]
    fn root_only_tree_has_no_pervasive_entries() {
        let a1 = inst("a", "1", d(2021, 1, 1));
        let a2 = inst("a", "2", d(2021, 2, 1));
        let tdt = build_tdt(&[
            DependencySnapshot::single(a1, None),
            DependencySnapshot::single(a2, None),
        ])
        .unwrap();
        assert!(pervasive_dependencies(&tdt, 1).is_empty());
        assert!(spof(&tdt, 0.1).is_empty());
    }

    #[test]
    fn health_counts_versions_up_to_evidence() {
        let lib = LibraryId::new("t", "x");
        let chains = build_cchains(vec![
            LibraryInstance::new(lib.clone(), "1", d(2020, 1, 1)),
            LibraryInstance::new(lib.clone(), "2", d(2020, 2, 1)),
            LibraryInstance::new(lib.clone(), "3", d(2020, 3, 1)),
        ])
        .unwrap();
        let vuln = VulnerabilityRecord {
            id: "V-1".into(),
            published: d(2020, 6, 1),
            severity_score: 9.0,
            affected: vec![AffectedLibrary {
                library: lib,
                ranges: vec![VersionRange::up_to("2", true)],
            }],
        };
        let report = chain_health(&chains, &[vuln]);
        assert_eq!(report.chains[0].instances_affected, 2);
        assert!((report.chains[0].fraction_affected - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_feed_gives_zero_health() {
        let lib = LibraryId::new("t", "x");
        let chains =
            build_cchains(vec![LibraryInstance::new(lib, "1", d(2020, 1, 1))]).unwrap();
        let report = chain_health(&chains, &[]);
        assert_eq!(report.aggregate_fraction, 0.0);
        assert_eq!(report.chains[0].instances_affected, 0);
    }

    #[test]
    fn multi_chain_vuln_affects_each_chain_independently() {
        let c85 = LibraryId::with_tag("t", "x", "8.5");
        let c90 = LibraryId::with_tag("t", "x", "9.0");
        let chains = build_cchains(vec![
            LibraryInstance::new(c85.clone(), "8.5.1", d(2020, 1, 1)),
            LibraryInstance::new(c85.clone(), "8.5.2", d(2020, 2, 1)),
            LibraryInstance::new(c90.clone(), "9.0.1", d(2020, 1, 15)),
        ])
        .unwrap();
        let vuln = VulnerabilityRecord {
            id: "V-1".into(),
            published: d(2020, 6, 1),
            severity_score: 9.0,
            affected: vec![AffectedLibrary {
                library: LibraryId::new("t", "x"),
                ranges: vec![VersionRange::up_to("8.5.1", true)],
            }],
        };
        let report = chain_health(&chains, &[vuln]);
        let h85 = report.chains.iter().find(|c| c.chain == "t:x#8.5").unwrap();
        let h90 = report.chains.iter().find(|c| c.chain == "t:x#9.0").unwrap();
        assert_eq!(h85.instances_affected, 1);
        assert_eq!(h90.instances_affected, 0);
    }
}
