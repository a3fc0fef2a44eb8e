//! Attack-tree view of dependency snapshots and windowed disclosure
//! forecasts.
//!
//! Every snapshot node can be exploited through its own code, so a leaf
//! maps to a basic attack step and a non-leaf to an OR gate fed by its own
//! attack step plus one child per direct dependency. With OR gates only and
//! independent leaves, the root probability is exact as one minus the
//! product of survival over the unique instances, so shared subtrees are
//! counted once and no binary-decision-diagram machinery is needed.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::evidence::{assign_cluster, ClusterId, ClusterScheme};
use crate::ingest::MetadataIndex;
use crate::kde::{KdeError, KdeModel};
use crate::model::{DependencySnapshot, LibraryInstance, ModelError, TimeDependencyTree};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("{gav} is not yet released at {t} (release {released})")]
    NotYetReleased {
        gav: String,
        t: NaiveDate,
        released: NaiveDate,
    },

    #[error("no fitted model for cluster {cluster} (needed by {gav})")]
    MissingModel { cluster: ClusterId, gav: String },

    #[error("missing metadata for {gav}")]
    MissingMetadata { gav: String },

    #[error("no estimate decorated for {gav}")]
    MissingEstimate { gav: String },

    #[error("estimate for {gav} outside [0, 1]: {value}")]
    InvalidEstimate { gav: String, value: f64 },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Kde(#[from] KdeError),
}

/// One node of an attack tree.
#[derive(Debug, Clone, PartialEq)]
pub enum AtNode {
    /// Exploitation of one instance's own code.
    Bas { instance: LibraryInstance },
    /// Any input compromises the instance.
    OrGate {
        instance: LibraryInstance,
        children: Vec<usize>,
    },
}

/// OR-gate/BAS tree mirroring one dependency snapshot.
#[derive(Debug, Clone)]
pub struct AttackTree {
    nodes: Vec<AtNode>,
    root: usize,
}

impl AttackTree {
    pub fn nodes(&self) -> &[AtNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn gate_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, AtNode::OrGate { .. }))
            .count()
    }

    pub fn bas_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, AtNode::Bas { .. }))
            .count()
    }

    /// The unique instances whose basic attack steps feed this tree,
    /// in deterministic coordinate order.
    pub fn bas_instances(&self) -> Vec<&LibraryInstance> {
        let mut out: Vec<&LibraryInstance> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                AtNode::Bas { instance } => Some(instance),
                AtNode::OrGate { .. } => None,
            })
            .collect();
        out.sort_by(|a, b| (&a.id, &a.version).cmp(&(&b.id, &b.version)));
        out
    }
}

/// Structural bijection from a dependency snapshot to its attack tree:
/// leaves map to a single attack step, non-leaves to an OR gate plus an
/// own-code attack step wired into it.
pub fn to_attack_tree(snapshot: &DependencySnapshot) -> AttackTree {
    let mut nodes: Vec<AtNode> = Vec::new();
    // top node per snapshot index: the gate for non-leaves, the BAS for leaves
    let mut top: Vec<Option<usize>> = vec![None; snapshot.len()];

    // dependencies before dependents so gate inputs already exist
    let mut stack: Vec<(usize, bool)> = vec![(0, false)];
    while let Some((s, expanded)) = stack.pop() {
        if top[s].is_some() {
            continue;
        }
        if !expanded {
            stack.push((s, true));
            for &d in snapshot.direct_deps(s) {
                if top[d].is_none() {
                    stack.push((d, false));
                }
            }
            continue;
        }
        let instance = snapshot.nodes()[s].clone();
        if snapshot.is_leaf(s) {
            nodes.push(AtNode::Bas { instance });
            top[s] = Some(nodes.len() - 1);
        } else {
            nodes.push(AtNode::Bas {
                instance: instance.clone(),
            });
            let own_bas = nodes.len() - 1;
            let mut children = vec![own_bas];
            for &d in snapshot.direct_deps(s) {
                children.push(top[d].expect("dependencies built first"));
            }
            nodes.push(AtNode::OrGate { instance, children });
            top[s] = Some(nodes.len() - 1);
        }
    }
    AttackTree {
        root: top[0].expect("root always built"),
        nodes,
    }
}

/// A windowed disclosure probability for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct LeafEstimate {
    pub instance: LibraryInstance,
    pub cluster: ClusterId,
    pub delta_days: i64,
    pub window_days: u32,
    pub probability: f64,
}

/// Forecast evaluation policy.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForecastOptions {
    /// Evaluate the closed-form CDF past the model grid instead of
    /// clamping to 1.
    pub allow_extrapolation: bool,
}

/// Probability that a disclosure lands on `instance` within `window_days`
/// after `t`: the cluster CDF mass on (Δ, Δ+n], with Δ days since release.
///
/// Δ = 0 (forecasting at the release instant) is accepted and evaluates to
/// F(n) − F(0) = F(n).
pub fn leaf_probability(
    instance: &LibraryInstance,
    metadata: &MetadataIndex,
    scheme: &ClusterScheme,
    models: &BTreeMap<ClusterId, KdeModel>,
    t: NaiveDate,
    window_days: u32,
    options: &ForecastOptions,
) -> Result<LeafEstimate, ForecastError> {
    let delta_days = (t - instance.release_date).num_days();
    if delta_days < 0 {
        return Err(ForecastError::NotYetReleased {
            gav: instance.gav(),
            t,
            released: instance.release_date,
        });
    }
    let meta = metadata
        .get(&instance.id, &instance.version)
        .ok_or_else(|| ForecastError::MissingMetadata {
            gav: instance.gav(),
        })?;
    let cluster = assign_cluster(meta, scheme);
    let model = models.get(&cluster).ok_or_else(|| ForecastError::MissingModel {
        cluster: cluster.clone(),
        gav: instance.gav(),
    })?;
    let delta = delta_days as f64;
    let lo = model.cdf_with(delta, options.allow_extrapolation)?;
    let hi = model.cdf_with(delta + f64::from(window_days), options.allow_extrapolation)?;
    let probability = (hi - lo).clamp(0.0, 1.0);
    Ok(LeafEstimate {
        instance: instance.clone(),
        cluster,
        delta_days,
        window_days,
        probability,
    })
}

/// Propagates decorated leaf probabilities to the root.
///
/// Exact under leaf independence with OR-only gates: instances reachable
/// through several paths count once in the complement product.
pub fn propagate(
    tree: &AttackTree,
    estimates: &BTreeMap<(String, String), f64>,
) -> Result<f64, ForecastError> {
    let mut survival = 1.0f64;
    for instance in tree.bas_instances() {
        let key = (instance.id.to_string(), instance.version.raw().to_string());
        let p = estimates
            .get(&key)
            .copied()
            .ok_or_else(|| ForecastError::MissingEstimate {
                gav: instance.gav(),
            })?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ForecastError::InvalidEstimate {
                gav: instance.gav(),
                value: p,
            });
        }
        survival *= 1.0 - p;
    }
    Ok(1.0 - survival)
}

/// Per-instance line of a forecast report.
#[derive(Debug, Clone, Serialize)]
pub struct LeafReport {
    pub ga: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_tag: Option<String>,
    pub version: String,
    pub cluster: String,
    pub delta_days: i64,
    pub p_hat: f64,
    /// How much the root estimate would drop if this instance's own-code
    /// probability were zero; the update-priority signal.
    pub marginal_drop_if_zeroed: f64,
}

/// Forecast for one time point.
#[derive(Debug, Clone, Serialize)]
pub struct ForecastReport {
    pub time_point: NaiveDate,
    pub horizon_days: u32,
    pub root_probability: f64,
    pub leaves: Vec<LeafReport>,
    pub models_used: Vec<String>,
}

/// Runs the full per-time-point pipeline over a time dependency tree:
/// time-index, convert to an attack tree, estimate every unique instance,
/// propagate, and rank contributors by their marginal effect on the root.
pub fn forecast(
    tdt: &TimeDependencyTree,
    time_points: &[NaiveDate],
    horizon_days: u32,
    models: &BTreeMap<ClusterId, KdeModel>,
    metadata: &MetadataIndex,
    scheme: &ClusterScheme,
    options: &ForecastOptions,
) -> Result<Vec<ForecastReport>, ForecastError> {
    let mut reports = Vec::with_capacity(time_points.len());
    for &t in time_points {
        let snapshot = tdt.time_index(t)?;
        let tree = to_attack_tree(&snapshot);

        let mut estimates: BTreeMap<(String, String), f64> = BTreeMap::new();
        let mut leaf_estimates: Vec<LeafEstimate> = Vec::new();
        for instance in tree.bas_instances() {
            let est = leaf_probability(
                instance, metadata, scheme, models, t, horizon_days, options,
            )?;
            estimates.insert(
                (instance.id.to_string(), instance.version.raw().to_string()),
                est.probability,
            );
            leaf_estimates.push(est);
        }
        let root_probability = propagate(&tree, &estimates)?;

        let mut leaves: Vec<LeafReport> = leaf_estimates
            .iter()
            .map(|est| {
                let mut zeroed = estimates.clone();
                zeroed.insert(
                    (
                        est.instance.id.to_string(),
                        est.instance.version.raw().to_string(),
                    ),
                    0.0,
                );
                let without = propagate(&tree, &zeroed).expect("estimates stay valid");
                LeafReport {
                    ga: est.instance.id.ga(),
                    chain_tag: est.instance.id.chain_tag.clone(),
                    version: est.instance.version.raw().to_string(),
                    cluster: est.cluster.label().to_string(),
                    delta_days: est.delta_days,
                    p_hat: est.probability,
                    marginal_drop_if_zeroed: root_probability - without,
                }
            })
            .collect();
        leaves.sort_by(|a, b| {
            b.marginal_drop_if_zeroed
                .partial_cmp(&a.marginal_drop_if_zeroed)
                .expect("finite probabilities")
                .then_with(|| (&a.ga, &a.version).cmp(&(&b.ga, &b.version)))
        });

        let mut models_used: Vec<String> = leaf_estimates
            .iter()
            .map(|e| e.cluster.label().to_string())
            .collect();
        models_used.sort();
        models_used.dedup();

        reports.push(ForecastReport {
            time_point: t,
            horizon_days,
            root_probability,
            leaves,
            models_used,
        });
    }
    Ok(reports)
}

/// Deterministic JSON for a list of reports.
pub fn reports_to_json(reports: &[ForecastReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LibraryId, LibraryInstance};

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn inst(a: &str, v: &str, rel: NaiveDate) -> LibraryInstance {
        LibraryInstance::new(LibraryId::new("t", a), v, rel)
    }

    fn est(tree: &AttackTree, ps: &[(&LibraryInstance, f64)]) -> BTreeMap<(String, String), f64> {
        let _ = tree;
        ps.iter()
            .map(|(i, p)| ((i.id.to_string(), i.version.raw().to_string()), *p))
            .collect()
    }

    #[test]
    fn bijection_counts_leaves_and_gates() {
        let a = inst("a", "1", d(2021, 1, 1));
        let b = inst("b", "1", d(2020, 1, 1));
        let x = inst("x", "7", d(2019, 1, 1));
        let c = inst("c", "5", d(2019, 6, 1));
        let snap = DependencySnapshot::new(
            a.clone(),
            vec![
                (a.clone(), b.clone()),
                (a.clone(), x.clone()),
                (b.clone(), c.clone()),
            ],
            None,
        )
        .unwrap();
        let tree = to_attack_tree(&snap);
        // leaves x, c map to one BAS each; non-leaves a, b to gate + BAS
        assert_eq!(tree.bas_count(), 4);
        assert_eq!(tree.gate_count(), 2);
        assert_eq!(tree.nodes().len(), 2 + 2 * 2);
        match &tree.nodes()[tree.root()] {
            AtNode::OrGate { instance, children } => {
                assert_eq!(instance, &a);
                assert_eq!(children.len(), 3); // own BAS + two dependencies
            }
            other => panic!("root should be a gate, got {other:?}"),
        }
    }

    #[test]
    fn single_node_snapshot_is_bare_bas() {
        let a = inst("a", "1", d(2021, 1, 1));
        let snap = DependencySnapshot::single(a.clone(), None);
        let tree = to_attack_tree(&snap);
        assert_eq!(tree.bas_count(), 1);
        assert_eq!(tree.gate_count(), 0);
        assert_eq!(tree.nodes().len(), 1);
    }

    #[test]
    fn propagation_complements_survival_product() {
        let a = inst("a", "1", d(2021, 1, 1));
        let b = inst("b", "1", d(2020, 1, 1));
        let c = inst("c", "1", d(2020, 1, 1));
        let snap = DependencySnapshot::new(
            a.clone(),
            vec![(a.clone(), b.clone()), (a.clone(), c.clone())],
            None,
        )
        .unwrap();
        let tree = to_attack_tree(&snap);
        let p = propagate(&tree, &est(&tree, &[(&a, 0.1), (&b, 0.2), (&c, 0.3)])).unwrap();
        assert!((p - 0.496).abs() < 1e-12);

        let zero = propagate(&tree, &est(&tree, &[(&a, 0.0), (&b, 0.0), (&c, 0.0)])).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn single_leaf_propagates_identity() {
        let a = inst("a", "1", d(2021, 1, 1));
        let snap = DependencySnapshot::single(a.clone(), None);
        let tree = to_attack_tree(&snap);
        let p = propagate(&tree, &est(&tree, &[(&a, 0.37)])).unwrap();
        assert!((p - 0.37).abs() < 1e-15);
    }

    #[test]
    fn shared_subtrees_count_once() {
        let a = inst("a", "1", d(2021, 1, 1));
        let b = inst("b", "1", d(2020, 1, 1));
        let c = inst("c", "1", d(2020, 1, 1));
        let x = inst("x", "1", d(2019, 1, 1));
        // x reachable via b and via c
        let diamond = DependencySnapshot::new(
            a.clone(),
            vec![
                (a.clone(), b.clone()),
                (a.clone(), c.clone()),
                (b.clone(), x.clone()),
                (c.clone(), x.clone()),
            ],
            None,
        )
        .unwrap();
        // same instances, single path to x
        let line = DependencySnapshot::new(
            a.clone(),
            vec![
                (a.clone(), b.clone()),
                (a.clone(), c.clone()),
                (b.clone(), x.clone()),
            ],
            None,
        )
        .unwrap();
        let ps = [(&a, 0.05), (&b, 0.1), (&c, 0.15), (&x, 0.2)];
        let p1 = propagate(&to_attack_tree(&diamond), &est(&to_attack_tree(&diamond), &ps)).unwrap();
        let p2 = propagate(&to_attack_tree(&line), &est(&to_attack_tree(&line), &ps)).unwrap();
        assert!((p1 - p2).abs() < 1e-15);
    }

    #[test]
    fn undecorated_bas_is_an_error() {
        let a = inst("a", "1", d(2021, 1, 1));
        let b = inst("b", "1", d(2020, 1, 1));
        let snap =
            DependencySnapshot::new(a.clone(), vec![(a.clone(), b.clone())], None).unwrap();
        let tree = to_attack_tree(&snap);
        let err = propagate(&tree, &est(&tree, &[(&a, 0.1)])).unwrap_err();
        assert!(matches!(err, ForecastError::MissingEstimate { .. }));
    }
}
