//! Evidence mapping and grace-period pools.
//!
//! For each (vulnerability, chain) pair the evidence instance is the
//! highest-ordered chain member still matching the affected ranges; its
//! grace period (days from release to disclosure) lands in the pool of the
//! cluster the instance belongs to.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    version_in_any_range, InstanceMetadata, MetadataIndex, Orientation, VulnerabilityRecord,
};
use crate::model::{CChain, LibraryInstance};

#[derive(Debug, Error)]
pub enum EvidenceError {
    #[error("grace period would be negative: {vuln} published {published} before release {released} of {gav}")]
    NegativeGrace {
        vuln: String,
        gav: String,
        published: chrono::NaiveDate,
        released: chrono::NaiveDate,
    },

    #[error("missing metadata for evidence instances: {}", offenders.join(", "))]
    MissingMetadata { offenders: Vec<String> },
}

/// One axis of a cluster scheme, partitioning metadata into labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Axis {
    /// Own code size split at a LoC threshold; the threshold itself is
    /// inclusive on the lower side.
    OwnSize {
        threshold: u64,
        below_label: String,
        above_label: String,
    },
    /// Web-orientation of the library.
    Orientation {
        local_label: String,
        remote_label: String,
    },
}

impl Axis {
    fn label_for(&self, meta: &InstanceMetadata) -> &str {
        match self {
            Axis::OwnSize {
                threshold,
                below_label,
                above_label,
            } => {
                if meta.own_loc <= *threshold {
                    below_label
                } else {
                    above_label
                }
            }
            Axis::Orientation {
                local_label,
                remote_label,
            } => match meta.orientation {
                Orientation::Local => local_label,
                Orientation::RemoteNetwork => remote_label,
            },
        }
    }

    /// Every label this axis can produce.
    pub fn labels(&self) -> [&str; 2] {
        match self {
            Axis::OwnSize {
                below_label,
                above_label,
                ..
            } => [below_label, above_label],
            Axis::Orientation {
                local_label,
                remote_label,
            } => [local_label, remote_label],
        }
    }
}

/// A partition of metadata space into clusters, one per combination of
/// axis values. Schemes are data: thresholds and labels are inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterScheme {
    pub axes: Vec<Axis>,
}

impl Default for ClusterScheme {
    fn default() -> Self {
        ClusterScheme {
            axes: vec![
                Axis::OwnSize {
                    threshold: 100_000,
                    below_label: "SmallMedium".into(),
                    above_label: "Large".into(),
                },
                Axis::Orientation {
                    local_label: "Local".into(),
                    remote_label: "RemoteNetwork".into(),
                },
            ],
        }
    }
}

impl ClusterScheme {
    /// All cluster ids this scheme can produce, in deterministic order.
    pub fn all_clusters(&self) -> Vec<ClusterId> {
        let mut labels: Vec<String> = vec![String::new()];
        for axis in &self.axes {
            let mut next = Vec::new();
            for prefix in &labels {
                for l in axis.labels() {
                    let mut s = prefix.clone();
                    if !s.is_empty() {
                        s.push('×');
                    }
                    s.push_str(l);
                    next.push(s);
                }
            }
            labels = next;
        }
        labels.into_iter().map(ClusterId).collect()
    }
}

/// Stable label of one cluster, derived from the axis values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub String);

impl ClusterId {
    pub fn label(&self) -> &str {
        &self.0
    }

    /// Filesystem-safe form of the label.
    pub fn file_stem(&self) -> String {
        self.0.replace('×', "_")
    }
}

impl std::fmt::Display for ClusterId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Deterministic cluster assignment; axis labels joined in scheme order.
pub fn assign_cluster(meta: &InstanceMetadata, scheme: &ClusterScheme) -> ClusterId {
    let mut label = String::new();
    for axis in &scheme.axes {
        if !label.is_empty() {
            label.push('×');
        }
        label.push_str(axis.label_for(meta));
    }
    ClusterId(label)
}

/// One grace-period data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraceSample {
    pub days: u32,
    pub vuln_id: String,
    pub instance: LibraryInstance,
}

/// The data-fitting pool of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GracePool {
    pub cluster: ClusterId,
    pub samples: Vec<GraceSample>,
}

impl GracePool {
    pub fn days(&self) -> Vec<f64> {
        self.samples.iter().map(|s| f64::from(s.days)).collect()
    }
}

/// The highest-ordered instance in `chain` whose version matches any
/// affected range of `vuln` for the chain's library.
pub fn find_evidence<'c>(
    vuln: &VulnerabilityRecord,
    chain: &'c CChain,
) -> Option<&'c LibraryInstance> {
    let entries: Vec<_> = vuln
        .affected
        .iter()
        .filter(|a| a.applies_to(chain.id()))
        .collect();
    if entries.is_empty() {
        return None;
    }
    chain.instances().iter().rev().find(|inst| {
        entries
            .iter()
            .any(|a| version_in_any_range(&inst.version, &a.ranges))
    })
}

/// Days between an evidence instance's release and the disclosure.
pub fn grace_period(
    evidence: &LibraryInstance,
    vuln: &VulnerabilityRecord,
) -> Result<u32, EvidenceError> {
    let days = (vuln.published - evidence.release_date).num_days();
    if days < 0 {
        return Err(EvidenceError::NegativeGrace {
            vuln: vuln.id.clone(),
            gav: evidence.gav(),
            published: vuln.published,
            released: evidence.release_date,
        });
    }
    Ok(days as u32)
}

/// Options for pool collection.
#[derive(Debug, Clone)]
pub struct PoolOptions {
    /// Keep only vulnerabilities at or above this severity; `None` disables
    /// the filter.
    pub min_severity: Option<f64>,
}

impl Default for PoolOptions {
    fn default() -> Self {
        PoolOptions {
            min_severity: Some(7.0),
        }
    }
}

/// Builds per-cluster grace pools from a vulnerability feed and the
/// chains of the corpus.
///
/// Each (vulnerability, chain) pair with evidence contributes exactly one
/// sample to the evidence instance's cluster; a vulnerability spanning k
/// chains contributes k samples. Samples with negative grace are dropped
/// and logged, signalling inconsistent feed data.
pub fn collect_grace_pools(
    vulns: &[VulnerabilityRecord],
    chains: &[CChain],
    metadata: &MetadataIndex,
    scheme: &ClusterScheme,
    options: &PoolOptions,
) -> Result<BTreeMap<ClusterId, GracePool>, EvidenceError> {
    let mut pools: BTreeMap<ClusterId, GracePool> = BTreeMap::new();
    let mut missing: Vec<String> = Vec::new();

    for vuln in vulns {
        if let Some(min) = options.min_severity {
            if vuln.severity_score < min {
                continue;
            }
        }
        for chain in chains {
            let Some(evidence) = find_evidence(vuln, chain) else {
                continue;
            };
            let days = match grace_period(evidence, vuln) {
                Ok(d) => d,
                Err(e) => {
                    log::warn!("dropping inconsistent sample: {e}");
                    continue;
                }
            };
            let Some(meta) = metadata.get(&evidence.id, &evidence.version) else {
                missing.push(evidence.gav());
                continue;
            };
            let cluster = assign_cluster(meta, scheme);
            pools
                .entry(cluster.clone())
                .or_insert_with(|| GracePool {
                    cluster,
                    samples: Vec::new(),
                })
                .samples
                .push(GraceSample {
                    days,
                    vuln_id: vuln.id.clone(),
                    instance: evidence.clone(),
                });
        }
    }

    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(EvidenceError::MissingMetadata { offenders: missing });
    }
    Ok(pools)
}

/// Audit export: `cluster,vuln_id,group,artifact,version,grace_days`.
pub fn pools_to_csv(pools: &BTreeMap<ClusterId, GracePool>) -> String {
    let mut rows: Vec<(String, &GraceSample)> = Vec::new();
    for (cluster, pool) in pools {
        for s in &pool.samples {
            rows.push((cluster.label().to_string(), s));
        }
    }
    rows.sort_by(|a, b| {
        (&a.0, &a.1.vuln_id, a.1.instance.gav()).cmp(&(&b.0, &b.1.vuln_id, b.1.instance.gav()))
    });
    let mut out = String::from("cluster,vuln_id,group,artifact,version,grace_days\n");
    for (cluster, s) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            cluster,
            s.vuln_id,
            s.instance.id.group,
            s.instance.id.artifact,
            s.instance.version,
            s.days
        );
    }
    out
}
