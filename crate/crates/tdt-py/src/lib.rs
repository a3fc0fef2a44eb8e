//! Python bindings: version ordering, grace-period models, joint
//! probability algebra, tree-dump conversion and the file-based forecast
//! pipeline.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tdt_core::evidence::{collect_grace_pools, ClusterId, ClusterScheme, PoolOptions};
use tdt_core::forecast::{forecast, reports_to_json, ForecastOptions};
use tdt_core::ingest::{
    self, parse_metadata, parse_snapshot_json, parse_vulnerabilities, snapshot_doc_to_json,
    MetadataIndex, TreeParseOptions, VersionRange,
};
use tdt_core::joint::joint_cdf_values;
use tdt_core::kde::{FitOptions, KdeModel};
use tdt_core::model::{build_cchains, build_tdt, Version};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A fitted grace-period density, evaluable as pdf/cdf/sf.
#[pyclass(name = "GraceModel")]
struct GraceModel {
    inner: KdeModel,
}

#[pymethods]
impl GraceModel {
    /// Fit a model from day samples (Gaussian kernel, reflected at zero,
    /// Silverman bandwidth unless overridden).
    #[staticmethod]
    #[pyo3(signature = (samples, cluster="adhoc", bandwidth=None, min_samples=None))]
    fn fit(
        samples: Vec<f64>,
        cluster: &str,
        bandwidth: Option<f64>,
        min_samples: Option<usize>,
    ) -> PyResult<Self> {
        let options = FitOptions {
            bandwidth_override: bandwidth,
            min_samples,
        };
        let inner = KdeModel::fit_from_samples(ClusterId(cluster.to_string()), samples, &options)
            .map_err(value_err)?;
        Ok(GraceModel { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(GraceModel {
            inner: KdeModel::from_json(text.as_bytes()).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn cdf(&self, t: f64) -> PyResult<f64> {
        self.inner.cdf(t).map_err(value_err)
    }

    fn pdf(&self, t: f64) -> PyResult<f64> {
        self.inner.pdf(t).map_err(value_err)
    }

    fn sf(&self, t: f64) -> PyResult<f64> {
        self.inner.sf(t).map_err(value_err)
    }

    /// Probability of a disclosure in the window (delta, delta+horizon].
    fn window_probability(&self, delta: f64, horizon: f64) -> PyResult<f64> {
        let lo = self.inner.cdf(delta).map_err(value_err)?;
        let hi = self.inner.cdf(delta + horizon).map_err(value_err)?;
        Ok((hi - lo).clamp(0.0, 1.0))
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.inner.bandwidth()
    }

    #[getter]
    fn sample_count(&self) -> usize {
        self.inner.sample_count()
    }

    #[getter]
    fn cluster(&self) -> String {
        self.inner.cluster().label().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "GraceModel(cluster='{}', samples={}, bandwidth={:.3})",
            self.inner.cluster(),
            self.inner.sample_count(),
            self.inner.bandwidth()
        )
    }
}

/// Total-order version comparison: -1, 0 or 1.
#[pyfunction]
fn compare_versions(a: &str, b: &str) -> i32 {
    match ingest::compare_versions(&Version::parse(a), &Version::parse(b)) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

/// Interval membership with optional, inclusivity-flagged endpoints.
#[pyfunction]
#[pyo3(signature = (version, lo=None, lo_inclusive=true, hi=None, hi_inclusive=false))]
fn version_in_range(
    version: &str,
    lo: Option<&str>,
    lo_inclusive: bool,
    hi: Option<&str>,
    hi_inclusive: bool,
) -> bool {
    let range = VersionRange {
        lo: lo.map(Version::parse),
        lo_inclusive,
        hi: hi.map(Version::parse),
        hi_inclusive,
    };
    ingest::version_in_range(&Version::parse(version), &range)
}

/// Convert a `dependency:tree` dump into canonical snapshot JSON.
#[pyfunction]
#[pyo3(signature = (text, omit_scopes=vec![]))]
fn maven_tree_to_snapshot_json(text: &str, omit_scopes: Vec<String>) -> PyResult<String> {
    let doc = ingest::parse_maven_tree(text, &TreeParseOptions { omit_scopes })
        .map_err(value_err)?;
    Ok(snapshot_doc_to_json(&doc))
}

/// 1 - prod(1 - F_i) with the inclusion-exclusion cross-check.
#[pyfunction]
fn joint_cdf(values: Vec<f64>) -> PyResult<f64> {
    joint_cdf_values(&values).map_err(value_err)
}

/// Fit per-cluster models from a vulnerability feed and metadata CSV,
/// writing one `<cluster>.kde.json` per populated cluster. Returns the
/// cluster sample counts.
#[pyfunction]
#[pyo3(signature = (vulns_path, metadata_path, out_dir, min_cvss=7.0, min_samples=5))]
fn fit_models(
    vulns_path: &str,
    metadata_path: &str,
    out_dir: &str,
    min_cvss: f64,
    min_samples: usize,
) -> PyResult<BTreeMap<String, usize>> {
    let metadata = MetadataIndex::new(
        parse_metadata(&std::fs::read(metadata_path).map_err(value_err)?).map_err(value_err)?,
    )
    .map_err(value_err)?;
    let vulns =
        parse_vulnerabilities(&std::fs::read(vulns_path).map_err(value_err)?).map_err(value_err)?;
    let chains = build_cchains(metadata.instances()).map_err(value_err)?;
    let scheme = ClusterScheme::default();
    let pools = collect_grace_pools(
        &vulns,
        &chains,
        &metadata,
        &scheme,
        &PoolOptions {
            min_severity: Some(min_cvss),
        },
    )
    .map_err(value_err)?;

    std::fs::create_dir_all(out_dir).map_err(value_err)?;
    let mut counts = BTreeMap::new();
    for (cluster, pool) in &pools {
        counts.insert(cluster.label().to_string(), pool.samples.len());
        if pool.samples.len() < min_samples {
            continue;
        }
        let model = KdeModel::fit(
            pool,
            &FitOptions {
                bandwidth_override: None,
                min_samples: Some(min_samples),
            },
        )
        .map_err(value_err)?;
        let path = Path::new(out_dir).join(format!("{}.kde.json", cluster.file_stem()));
        std::fs::write(path, model.to_json()).map_err(value_err)?;
    }
    Ok(counts)
}

/// Run the forecast pipeline over snapshot JSON files and fitted models;
/// returns the report list as JSON.
#[pyfunction]
#[pyo3(signature = (snapshot_paths, metadata_path, models_dir, at, horizon))]
fn forecast_files(
    snapshot_paths: Vec<String>,
    metadata_path: &str,
    models_dir: &str,
    at: Vec<String>,
    horizon: u32,
) -> PyResult<String> {
    let metadata = MetadataIndex::new(
        parse_metadata(&std::fs::read(metadata_path).map_err(value_err)?).map_err(value_err)?,
    )
    .map_err(value_err)?;

    let mut snapshots = Vec::new();
    for path in &snapshot_paths {
        let doc = parse_snapshot_json(&std::fs::read(path).map_err(value_err)?)
            .map_err(value_err)?;
        snapshots.push(doc.resolve(&metadata).map_err(value_err)?);
    }
    snapshots.sort_by_key(|s| s.root().release_date);
    let tdt = build_tdt(&snapshots).map_err(value_err)?;

    let mut models = BTreeMap::new();
    let mut entries: Vec<_> = std::fs::read_dir(models_dir)
        .map_err(value_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".kde.json"))
        })
        .collect();
    entries.sort();
    for path in entries {
        let model =
            KdeModel::from_json(&std::fs::read(&path).map_err(value_err)?).map_err(value_err)?;
        models.insert(model.cluster().clone(), model);
    }

    let mut dates = Vec::new();
    for s in &at {
        dates.push(
            chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map_err(|e| value_err(format!("invalid date {s}: {e}")))?,
        );
    }
    dates.sort();

    let reports = forecast(
        &tdt,
        &dates,
        horizon,
        &models,
        &metadata,
        &ClusterScheme::default(),
        &ForecastOptions::default(),
    )
    .map_err(value_err)?;
    Ok(reports_to_json(&reports))
}

#[pymodule]
fn tdt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GraceModel>()?;
    m.add_function(wrap_pyfunction!(compare_versions, m)?)?;
    m.add_function(wrap_pyfunction!(version_in_range, m)?)?;
    m.add_function(wrap_pyfunction!(maven_tree_to_snapshot_json, m)?)?;
    m.add_function(wrap_pyfunction!(joint_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(fit_models, m)?)?;
    m.add_function(wrap_pyfunction!(forecast_files, m)?)?;
    Ok(())
}
