//! Instance metadata: release dates, code size and web-orientation.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{LibraryId, LibraryInstance, Version};

use super::error::IngestError;

/// Whether a library's purpose is likely to expose it to the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Local,
    RemoteNetwork,
}

impl Orientation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "local" => Some(Orientation::Local),
            "remote_network" => Some(Orientation::RemoteNetwork),
            _ => None,
        }
    }
}

/// Per-instance metadata joined onto graphs and used for clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub id: LibraryId,
    pub version: Version,
    pub release_date: NaiveDate,
    pub own_loc: u64,
    pub dep_loc: Option<u64>,
    pub orientation: Orientation,
}

impl InstanceMetadata {
    pub fn instance(&self) -> LibraryInstance {
        LibraryInstance::new(self.id.clone(), self.version.clone(), self.release_date)
    }
}

const REQUIRED_COLUMNS: [&str; 7] = [
    "group",
    "artifact",
    "version",
    "release_date",
    "own_loc",
    "dep_loc",
    "orientation",
];

/// Parses the metadata CSV. The canonical header is
/// `group,artifact,version,release_date,own_loc,dep_loc,orientation`;
/// an optional `chain_tag` column disambiguates parallel release lines,
/// and other extra columns are ignored.
pub fn parse_metadata(bytes: &[u8]) -> Result<Vec<InstanceMetadata>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut cols = BTreeMap::new();
    for name in REQUIRED_COLUMNS {
        match col(name) {
            Some(i) => {
                cols.insert(name, i);
            }
            None => {
                return Err(IngestError::Header {
                    expected: REQUIRED_COLUMNS.join(","),
                    found: headers.iter().collect::<Vec<_>>().join(","),
                })
            }
        }
    }
    let chain_tag_col = col("chain_tag");

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| IngestError::Csv {
            line,
            message: e.to_string(),
        })?;
        let field = |name: &str| record.get(cols[name]).unwrap_or("");
        let release_date =
            NaiveDate::parse_from_str(field("release_date"), "%Y-%m-%d").map_err(|e| {
                IngestError::InvalidValue {
                    at: format!("line {line}, release_date"),
                    message: e.to_string(),
                }
            })?;
        let own_loc: u64 = field("own_loc")
            .parse()
            .map_err(|e| IngestError::InvalidValue {
                at: format!("line {line}, own_loc"),
                message: format!("{e}"),
            })?;
        let dep_loc = match field("dep_loc") {
            "" => None,
            s => Some(s.parse::<u64>().map_err(|e| IngestError::InvalidValue {
                at: format!("line {line}, dep_loc"),
                message: format!("{e}"),
            })?),
        };
        let orientation =
            Orientation::parse(field("orientation")).ok_or_else(|| IngestError::InvalidValue {
                at: format!("line {line}, orientation"),
                message: format!(
                    "expected \"local\" or \"remote_network\", got \"{}\"",
                    field("orientation")
                ),
            })?;
        let chain_tag = chain_tag_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .map(String::from);
        out.push(InstanceMetadata {
            id: LibraryId {
                group: field("group").to_string(),
                artifact: field("artifact").to_string(),
                chain_tag,
            },
            version: Version::parse(field("version")),
            release_date,
            own_loc,
            dep_loc,
            orientation,
        });
    }
    Ok(out)
}

/// Lookup of metadata by (library, version).
#[derive(Debug, Default)]
pub struct MetadataIndex {
    map: BTreeMap<(LibraryId, Version), InstanceMetadata>,
}

impl MetadataIndex {
    pub fn new(records: impl IntoIterator<Item = InstanceMetadata>) -> Result<Self, IngestError> {
        let mut map = BTreeMap::new();
        for rec in records {
            let key = (rec.id.clone(), rec.version.clone());
            if let Some(prev) = map.insert(key, rec.clone()) {
                if prev != rec {
                    return Err(IngestError::InvalidValue {
                        at: format!("{}:{}", rec.id, rec.version),
                        message: "conflicting duplicate metadata rows".into(),
                    });
                }
            }
        }
        Ok(MetadataIndex { map })
    }

    pub fn get(&self, id: &LibraryId, version: &Version) -> Option<&InstanceMetadata> {
        self.map.get(&(id.clone(), version.clone()))
    }

    pub fn release_date(&self, id: &LibraryId, version: &Version) -> Option<NaiveDate> {
        self.get(id, version).map(|m| m.release_date)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// All instances described by the metadata, for chain building.
    pub fn instances(&self) -> impl Iterator<Item = LibraryInstance> + '_ {
        self.map.values().map(InstanceMetadata::instance)
    }

    pub fn records(&self) -> impl Iterator<Item = &InstanceMetadata> {
        self.map.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "\
group,artifact,version,release_date,own_loc,dep_loc,orientation
com.thoughtworks.xstream,xstream,1.4.17,2021-05-14,151629,253400,remote_network
xmlpull,xmlpull,1.1.3.1,2003-06-16,1768,,remote_network
";

    #[test]
    fn parses_canonical_header() {
        let rows = parse_metadata(CSV.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].own_loc, 151629);
        assert_eq!(rows[0].dep_loc, Some(253400));
        assert_eq!(rows[1].dep_loc, None);
        assert_eq!(rows[1].orientation, Orientation::RemoteNetwork);
    }

    #[test]
    fn optional_chain_tag_column() {
        let csv = "\
group,artifact,version,release_date,own_loc,dep_loc,orientation,chain_tag
org.apache.tomcat,tomcat,8.5.75,2022-01-17,350000,,remote_network,8.5
org.apache.tomcat,tomcat,9.0.58,2022-01-15,380000,,remote_network,9.0
";
        let rows = parse_metadata(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].id.chain_tag.as_deref(), Some("8.5"));
        assert_eq!(rows[1].id.chain_tag.as_deref(), Some("9.0"));
    }

    #[test]
    fn missing_column_is_header_error() {
        let csv = "group,artifact,version\ng,a,1.0\n";
        assert!(matches!(
            parse_metadata(csv.as_bytes()),
            Err(IngestError::Header { .. })
        ));
    }

    #[test]
    fn bad_orientation_reports_line() {
        let csv = "\
group,artifact,version,release_date,own_loc,dep_loc,orientation
g,a,1.0,2020-01-01,10,,weird
";
        match parse_metadata(csv.as_bytes()) {
            Err(IngestError::InvalidValue { at, .. }) => assert!(at.contains("line 2")),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn index_serves_dates_and_instances() {
        let rows = parse_metadata(CSV.as_bytes()).unwrap();
        let index = MetadataIndex::new(rows).unwrap();
        let id = LibraryId::new("xmlpull", "xmlpull");
        let v = Version::parse("1.1.3.1");
        assert_eq!(
            index.release_date(&id, &v),
            Some(NaiveDate::from_ymd_opt(2003, 6, 16).unwrap())
        );
        assert_eq!(index.instances().count(), 2);
    }
}
