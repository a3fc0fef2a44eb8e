//! Library identities and versioned instances.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::version::Version;

/// Identifies one line of development of a library.
///
/// `chain_tag` separates parallel release lines of the same group:artifact
/// (e.g. "8.5" vs "9.0") into distinct, mutually incomparable chains.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LibraryId {
    pub group: String,
    pub artifact: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_tag: Option<String>,
}

impl LibraryId {
    pub fn new(group: impl Into<String>, artifact: impl Into<String>) -> Self {
        LibraryId {
            group: group.into(),
            artifact: artifact.into(),
            chain_tag: None,
        }
    }

    pub fn with_tag(
        group: impl Into<String>,
        artifact: impl Into<String>,
        tag: impl Into<String>,
    ) -> Self {
        LibraryId {
            group: group.into(),
            artifact: artifact.into(),
            chain_tag: Some(tag.into()),
        }
    }

    /// "group:artifact" coordinate, without the chain tag.
    pub fn ga(&self) -> String {
        format!("{}:{}", self.group, self.artifact)
    }

    /// Same group:artifact, ignoring chain tags.
    pub fn same_library(&self, other: &LibraryId) -> bool {
        self.group == other.group && self.artifact == other.artifact
    }
}

impl fmt::Display for LibraryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.chain_tag {
            Some(tag) => write!(f, "{}:{}#{}", self.group, self.artifact, tag),
            None => write!(f, "{}:{}", self.group, self.artifact),
        }
    }
}

/// One released version of a library: the node type of every graph here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LibraryInstance {
    pub id: LibraryId,
    pub version: Version,
    pub release_date: NaiveDate,
}

impl LibraryInstance {
    pub fn new(id: LibraryId, version: impl Into<Version>, release_date: NaiveDate) -> Self {
        LibraryInstance {
            id,
            version: version.into(),
            release_date,
        }
    }

    /// Identity key within a dataset: (id, version).
    pub fn key(&self) -> (&LibraryId, &Version) {
        (&self.id, &self.version)
    }

    /// "group:artifact:version" coordinate.
    pub fn gav(&self) -> String {
        format!("{}:{}", self.id, self.version)
    }
}

impl fmt::Display for LibraryInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.id, self.version)
    }
}
