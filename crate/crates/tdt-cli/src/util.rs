//! Shared loading and error-reporting helpers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;

use tdt_core::evidence::{ClusterId, ClusterScheme};
use tdt_core::ingest::{
    parse_maven_tree, parse_metadata, parse_snapshot_json, parse_vulnerabilities, MetadataIndex,
    SnapshotDoc, TreeParseOptions, VulnerabilityRecord,
};
use tdt_core::kde::KdeModel;
use tdt_core::model::{build_tdt, DependencySnapshot, TimeDependencyTree};

pub fn load_metadata(path: &Path) -> Result<MetadataIndex> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let records = parse_metadata(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(MetadataIndex::new(records)?)
}

pub fn load_vulns(path: &Path) -> Result<Vec<VulnerabilityRecord>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_vulnerabilities(&bytes).with_context(|| format!("parsing {}", path.display()))?)
}

/// Loads one snapshot document from canonical JSON or, for any other
/// extension, from a build-tool tree dump.
pub fn load_snapshot_doc(path: &Path, omit_scopes: &[String]) -> Result<SnapshotDoc> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    if is_json {
        Ok(parse_snapshot_json(&bytes).with_context(|| format!("parsing {}", path.display()))?)
    } else {
        let text = String::from_utf8(bytes)
            .with_context(|| format!("{} is not valid UTF-8", path.display()))?;
        let opts = TreeParseOptions {
            omit_scopes: omit_scopes.to_vec(),
        };
        Ok(parse_maven_tree(&text, &opts)
            .with_context(|| format!("parsing {}", path.display()))?)
    }
}

/// Loads snapshots, resolves release dates against the metadata, and
/// orders them by root release.
pub fn load_snapshots(
    paths: &[PathBuf],
    metadata: &MetadataIndex,
    omit_scopes: &[String],
) -> Result<Vec<DependencySnapshot>> {
    let mut snapshots = Vec::with_capacity(paths.len());
    for path in paths {
        let doc = load_snapshot_doc(path, omit_scopes)?;
        let snap = doc
            .resolve(metadata)
            .with_context(|| format!("resolving {}", path.display()))?;
        snapshots.push(snap);
    }
    snapshots.sort_by_key(|s| s.root().release_date);
    Ok(snapshots)
}

pub fn build_tree(
    paths: &[PathBuf],
    metadata: &MetadataIndex,
    omit_scopes: &[String],
) -> Result<TimeDependencyTree> {
    let snapshots = load_snapshots(paths, metadata, omit_scopes)?;
    Ok(build_tdt(&snapshots)?)
}

pub fn load_scheme(path: Option<&Path>) -> Result<ClusterScheme> {
    match path {
        None => Ok(ClusterScheme::default()),
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            let scheme: ClusterScheme = serde_json::from_slice(&bytes)
                .with_context(|| format!("parsing scheme {}", p.display()))?;
            if scheme.axes.is_empty() {
                bail!("scheme {} has no axes", p.display());
            }
            Ok(scheme)
        }
    }
}

/// Loads every `*.kde.json` in a directory, keyed by the cluster recorded
/// inside each file.
pub fn load_models(dir: &Path) -> Result<BTreeMap<ClusterId, KdeModel>> {
    let mut models = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading model directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".kde.json")))
        .collect();
    entries.sort();
    for path in entries {
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let model = KdeModel::from_json(&bytes)
            .with_context(|| format!("loading model {}", path.display()))?;
        models.insert(model.cluster().clone(), model);
    }
    if models.is_empty() {
        bail!("no *.kde.json model files found in {}", dir.display());
    }
    Ok(models)
}

pub fn parse_dates(s: &str) -> Result<Vec<NaiveDate>> {
    s.split(',')
        .map(|p| {
            NaiveDate::parse_from_str(p.trim(), "%Y-%m-%d")
                .with_context(|| format!("invalid date \"{p}\" (expected YYYY-MM-DD)"))
        })
        .collect()
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Best-effort machine-readable kind for an error chain.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    use tdt_core::evidence::EvidenceError;
    use tdt_core::forecast::ForecastError;
    use tdt_core::ingest::IngestError;
    use tdt_core::joint::JointError;
    use tdt_core::kde::KdeError;
    use tdt_core::model::ModelError;

    fn model_kind(e: &ModelError) -> &'static str {
        match e {
            ModelError::ConflictingMetadata { .. } => "ConflictingMetadata",
            ModelError::MixedRoots { .. } => "MixedRoots",
            ModelError::CycleDetected { .. } => "CycleDetected",
            ModelError::Disconnected { .. } => "Disconnected",
            ModelError::RootIsDependency { .. } => "RootIsDependency",
            ModelError::EmptyFamily => "EmptyFamily",
            ModelError::UnorderedSnapshots { .. } => "UnorderedSnapshots",
            ModelError::OutOfSpan { .. } => "OutOfSpan",
            ModelError::NotADependency { .. } => "NotADependency",
        }
    }
    fn kde_kind(e: &KdeError) -> &'static str {
        match e {
            KdeError::InsufficientData { .. } => "InsufficientData",
            KdeError::NegativeSample { .. } => "NegativeSample",
            KdeError::InvalidBandwidth { .. } => "InvalidBandwidth",
            KdeError::DomainError { .. } => "DomainError",
            KdeError::UnsupportedModelVersion { .. } => "UnsupportedModelVersion",
            KdeError::Parse(_) => "ParseError",
        }
    }

    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            return model_kind(e);
        }
        if let Some(e) = cause.downcast_ref::<IngestError>() {
            return match e {
                IngestError::Parse { .. } => "ParseError",
                IngestError::Indentation { .. } => "ParseError",
                IngestError::Json { .. } => "ParseError",
                IngestError::Csv { .. } => "ParseError",
                IngestError::Header { .. } => "ParseError",
                IngestError::DuplicateRecord { .. } => "DuplicateRecord",
                IngestError::InvalidValue { .. } => "InvalidValue",
                IngestError::MissingReleaseDates { .. } => "MissingReleaseDates",
                IngestError::Model(inner) => model_kind(inner),
            };
        }
        if let Some(e) = cause.downcast_ref::<EvidenceError>() {
            return match e {
                EvidenceError::NegativeGrace { .. } => "NegativeGrace",
                EvidenceError::MissingMetadata { .. } => "MissingMetadata",
            };
        }
        if let Some(e) = cause.downcast_ref::<KdeError>() {
            return kde_kind(e);
        }
        if let Some(e) = cause.downcast_ref::<ForecastError>() {
            return match e {
                ForecastError::NotYetReleased { .. } => "NotYetReleased",
                ForecastError::MissingModel { .. } => "MissingModel",
                ForecastError::MissingMetadata { .. } => "MissingMetadata",
                ForecastError::MissingEstimate { .. } => "MissingEstimate",
                ForecastError::InvalidEstimate { .. } => "InvalidEstimate",
                ForecastError::Model(inner) => model_kind(inner),
                ForecastError::Kde(inner) => kde_kind(inner),
            };
        }
        if let Some(e) = cause.downcast_ref::<JointError>() {
            return match e {
                JointError::DomainError { .. } => "DomainError",
                JointError::LengthMismatch { .. } => "LengthMismatch",
                JointError::Empty => "Empty",
                JointError::InternalInconsistency { .. } => "InternalInconsistency",
            };
        }
    }
    "Error"
}
