//! Parsers for dependency-tree dumps, snapshot documents, vulnerability
//! feeds and instance metadata, plus version comparison and range matching.

mod error;
mod maven;
mod metadata;
mod range;
mod snapshot_doc;
mod vulns;

use std::cmp::Ordering;

pub use error::IngestError;
pub use maven::{parse_maven_tree, TreeParseOptions};
pub use metadata::{parse_metadata, InstanceMetadata, MetadataIndex, Orientation};
pub use range::{version_in_any_range, version_in_range, VersionRange};
pub use snapshot_doc::{
    parse_snapshot_json, snapshot_doc_to_json, snapshot_to_doc, NodeDoc, SnapshotDoc,
};
pub use vulns::{parse_vulnerabilities, AffectedLibrary, VulnerabilityRecord};

use crate::model::{QualifierRule, Version};

/// Total-order comparison of two version strings under the default
/// pre-release qualifier rule.
pub fn compare_versions(a: &Version, b: &Version) -> Ordering {
    a.compare_with(b, QualifierRule::PreRelease)
}

/// Comparison under an explicit qualifier rule, for ecosystems where
/// qualified versions follow the bare release.
pub fn compare_versions_with(a: &Version, b: &Version, rule: QualifierRule) -> Ordering {
    a.compare_with(b, rule)
}
