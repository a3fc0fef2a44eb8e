//! Vulnerability record ingestion.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::LibraryId;

use super::error::IngestError;
use super::range::VersionRange;

/// A disclosed vulnerability with its per-library affected version ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityRecord {
    pub id: String,
    pub published: NaiveDate,
    #[serde(rename = "severity")]
    pub severity_score: f64,
    #[serde(default)]
    pub affected: Vec<AffectedLibrary>,
}

/// One library touched by a vulnerability. Without a chain tag the entry
/// applies to every chain of the group:artifact; with one it pins a single
/// release line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectedLibrary {
    #[serde(flatten)]
    pub library: LibraryId,
    #[serde(default)]
    pub ranges: Vec<VersionRange>,
}

impl AffectedLibrary {
    /// Whether this entry applies to a chain with the given id.
    pub fn applies_to(&self, chain_id: &LibraryId) -> bool {
        self.library.same_library(chain_id)
            && match &self.library.chain_tag {
                Some(tag) => chain_id.chain_tag.as_deref() == Some(tag),
                None => true,
            }
    }
}

/// Parses a vulnerability feed, rejecting duplicate ids, severities
/// outside [0, 10] and inverted ranges.
pub fn parse_vulnerabilities(bytes: &[u8]) -> Result<Vec<VulnerabilityRecord>, IngestError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let records: Vec<VulnerabilityRecord> =
        serde_path_to_error::deserialize(de).map_err(|e| IngestError::Json {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for rec in &records {
        if rec.id.is_empty() {
            return Err(IngestError::InvalidValue {
                at: "id".into(),
                message: "empty vulnerability id".into(),
            });
        }
        if !seen.insert(&rec.id) {
            return Err(IngestError::DuplicateRecord { id: rec.id.clone() });
        }
        if !(0.0..=10.0).contains(&rec.severity_score) {
            return Err(IngestError::InvalidValue {
                at: format!("{}.severity", rec.id),
                message: format!("severity {} outside [0, 10]", rec.severity_score),
            });
        }
        for aff in &rec.affected {
            for r in &aff.ranges {
                if r.is_inverted() {
                    return Err(IngestError::InvalidValue {
                        at: format!("{}.affected[{}]", rec.id, aff.library),
                        message: "range lower bound above upper bound".into(),
                    });
                }
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_feed_with_ranges() {
        let json = br#"[
            {"id": "CVE-2021-39139", "published": "2021-08-23", "severity": 8.8,
             "affected": [{"group": "com.thoughtworks.xstream", "artifact": "xstream",
                           "ranges": [{"hi": "1.4.18", "hi_inclusive": false}]}]}
        ]"#;
        let recs = parse_vulnerabilities(json).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].affected[0].ranges.len(), 1);
        assert!(recs[0].affected[0].ranges[0].lo.is_none());
    }

    #[test]
    fn empty_affected_is_retained() {
        let json = br#"[{"id": "X-1", "published": "2020-01-01", "severity": 7.0}]"#;
        let recs = parse_vulnerabilities(json).unwrap();
        assert!(recs[0].affected.is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let json = br#"[
            {"id": "X-1", "published": "2020-01-01", "severity": 7.0},
            {"id": "X-1", "published": "2020-02-01", "severity": 7.5}
        ]"#;
        assert!(matches!(
            parse_vulnerabilities(json),
            Err(IngestError::DuplicateRecord { .. })
        ));
    }

    #[test]
    fn severity_out_of_bounds_rejected() {
        let json = br#"[{"id": "X-1", "published": "2020-01-01", "severity": 11.0}]"#;
        assert!(matches!(
            parse_vulnerabilities(json),
            Err(IngestError::InvalidValue { .. })
        ));
    }

    #[test]
    fn inverted_range_rejected() {
        let json = br#"[
            {"id": "X-1", "published": "2020-01-01", "severity": 7.0,
             "affected": [{"group": "g", "artifact": "a",
                           "ranges": [{"lo": "2.0", "hi": "1.0"}]}]}
        ]"#;
        assert!(matches!(
            parse_vulnerabilities(json),
            Err(IngestError::InvalidValue { .. })
        ));
    }

    #[test]
    fn tagged_entry_pins_one_chain() {
        let entry = AffectedLibrary {
            library: LibraryId::with_tag("g", "a", "8.5"),
            ranges: vec![],
        };
        assert!(entry.applies_to(&LibraryId::with_tag("g", "a", "8.5")));
        assert!(!entry.applies_to(&LibraryId::with_tag("g", "a", "9.0")));
        let untagged = AffectedLibrary {
            library: LibraryId::new("g", "a"),
            ranges: vec![],
        };
        assert!(untagged.applies_to(&LibraryId::with_tag("g", "a", "8.5")));
        assert!(untagged.applies_to(&LibraryId::with_tag("g", "a", "9.0")));
    }
}
