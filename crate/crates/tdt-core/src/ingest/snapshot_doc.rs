//! The canonical snapshot interchange document.
//!
//! Tree-shaped JSON with optional release dates; converting a dump from any
//! build tool into this form decouples the model from the ecosystem.
//! Resolution joins release dates from metadata and validates the graph.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{DependencySnapshot, LibraryId, LibraryInstance, Version};

use super::error::IngestError;
use super::metadata::MetadataIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_at: Option<NaiveDate>,
    pub root: NodeDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub group: String,
    pub artifact: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_tag: Option<String>,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dependencies: Vec<NodeDoc>,
}

impl NodeDoc {
    pub fn bare(group: &str, artifact: &str, version: &str) -> Self {
        NodeDoc {
            group: group.into(),
            artifact: artifact.into(),
            chain_tag: None,
            version: version.into(),
            release_date: None,
            dependencies: Vec::new(),
        }
    }

    pub fn library_id(&self) -> LibraryId {
        LibraryId {
            group: self.group.clone(),
            artifact: self.artifact.clone(),
            chain_tag: self.chain_tag.clone(),
        }
    }

    pub(crate) fn node_at_mut(&mut self, path: &[usize]) -> &mut NodeDoc {
        let mut cur = self;
        for &i in path {
            cur = &mut cur.dependencies[i];
        }
        cur
    }

    fn count(&self) -> usize {
        1 + self.dependencies.iter().map(NodeDoc::count).sum::<usize>()
    }
}

impl SnapshotDoc {
    /// Total node mentions in the document (duplicates counted).
    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    /// Resolves release dates (inline dates win, metadata fills the rest)
    /// and validates the graph. Duplicate mentions of one instance merge.
    pub fn resolve(&self, metadata: &MetadataIndex) -> Result<DependencySnapshot, IngestError> {
        let mut missing: Vec<String> = Vec::new();
        let mut edges: Vec<(LibraryInstance, LibraryInstance)> = Vec::new();

        let root = self.resolve_node(&self.root, metadata, &mut missing);
        let mut stack: Vec<(&NodeDoc, LibraryInstance)> = vec![(&self.root, root.clone())];
        while let Some((doc, inst)) = stack.pop() {
            for dep in &doc.dependencies {
                let dep_inst = self.resolve_node(dep, metadata, &mut missing);
                edges.push((inst.clone(), dep_inst.clone()));
                stack.push((dep, dep_inst));
            }
        }
        if !missing.is_empty() {
            missing.sort();
            missing.dedup();
            return Err(IngestError::MissingReleaseDates { offenders: missing });
        }
        Ok(DependencySnapshot::new(root, edges, self.observed_at)?)
    }

    fn resolve_node(
        &self,
        node: &NodeDoc,
        metadata: &MetadataIndex,
        missing: &mut Vec<String>,
    ) -> LibraryInstance {
        let id = node.library_id();
        let version = Version::parse(&node.version);
        let date = node
            .release_date
            .or_else(|| metadata.release_date(&id, &version));
        let date = match date {
            Some(d) => d,
            None => {
                missing.push(format!("{id}:{version}"));
                NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()
            }
        };
        LibraryInstance::new(id, version, date)
    }
}

/// Parses canonical snapshot JSON; schema violations name the JSON path.
pub fn parse_snapshot_json(bytes: &[u8]) -> Result<SnapshotDoc, IngestError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| IngestError::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Canonical JSON for a snapshot document (pretty, trailing newline).
pub fn snapshot_doc_to_json(doc: &SnapshotDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("snapshot doc serializes");
    s.push('\n');
    s
}

/// Converts a resolved snapshot back to document form. Each shared node's
/// dependencies are listed at its first occurrence only; children are
/// sorted by coordinate so equal snapshots serialize identically.
pub fn snapshot_to_doc(snapshot: &DependencySnapshot) -> SnapshotDoc {
    fn emit(
        snapshot: &DependencySnapshot,
        node: usize,
        expanded: &mut Vec<bool>,
    ) -> NodeDoc {
        let inst = &snapshot.nodes()[node];
        let mut doc = NodeDoc {
            group: inst.id.group.clone(),
            artifact: inst.id.artifact.clone(),
            chain_tag: inst.id.chain_tag.clone(),
            version: inst.version.raw().to_string(),
            release_date: Some(inst.release_date),
            dependencies: Vec::new(),
        };
        if !expanded[node] {
            expanded[node] = true;
            let mut children: Vec<usize> = snapshot.direct_deps(node).to_vec();
            children.sort_by(|&a, &b| {
                let na = &snapshot.nodes()[a];
                let nb = &snapshot.nodes()[b];
                (&na.id, &na.version).cmp(&(&nb.id, &nb.version))
            });
            doc.dependencies = children
                .into_iter()
                .map(|c| emit(snapshot, c, expanded))
                .collect();
        }
        doc
    }
    let mut expanded = vec![false; snapshot.len()];
    SnapshotDoc {
        observed_at: snapshot.observed_at(),
        root: emit(snapshot, 0, &mut expanded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn parse_and_resolve_inline_dates() {
        let json = br#"{
            "root": {
                "group": "g", "artifact": "a", "version": "1.0",
                "release_date": "2021-01-01",
                "dependencies": [
                    {"group": "g", "artifact": "b", "version": "2.0",
                     "release_date": "2020-06-01"}
                ]
            }
        }"#;
        let doc = parse_snapshot_json(json).unwrap();
        let snap = doc.resolve(&MetadataIndex::default()).unwrap();
        assert_eq!(snap.len(), 2);
        assert_eq!(snap.root().release_date, d(2021, 1, 1));
    }

    #[test]
    fn missing_dates_list_offenders() {
        let json = br#"{"root": {"group": "g", "artifact": "a", "version": "1.0"}}"#;
        let doc = parse_snapshot_json(json).unwrap();
        let err = doc.resolve(&MetadataIndex::default()).unwrap_err();
        match err {
            IngestError::MissingReleaseDates { offenders } => {
                assert_eq!(offenders, vec!["g:a:1.0".to_string()])
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn schema_violation_names_path() {
        let json = br#"{"root": {"group": "g", "artifact": "a", "version": 4}}"#;
        let err = parse_snapshot_json(json).unwrap_err();
        match err {
            IngestError::Json { path, .. } => assert!(path.contains("root"), "path: {path}"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_fields_ignored() {
        let json = br#"{
            "comment": "extra",
            "root": {"group": "g", "artifact": "a", "version": "1.0",
                     "release_date": "2021-01-01", "license": "x"}
        }"#;
        assert!(parse_snapshot_json(json).is_ok());
    }

    #[test]
    fn shared_node_round_trips() {
        let a = LibraryInstance::new(LibraryId::new("g", "a"), "1.0", d(2021, 1, 1));
        let b = LibraryInstance::new(LibraryId::new("g", "b"), "1.0", d(2020, 1, 1));
        let c = LibraryInstance::new(LibraryId::new("g", "c"), "1.0", d(2020, 1, 1));
        let x = LibraryInstance::new(LibraryId::new("g", "x"), "1.0", d(2019, 1, 1));
        let snap = DependencySnapshot::new(
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
        let doc = snapshot_to_doc(&snap);
        let json = snapshot_doc_to_json(&doc);
        let reparsed = parse_snapshot_json(json.as_bytes()).unwrap();
        let resolved = reparsed.resolve(&MetadataIndex::default()).unwrap();
        assert_eq!(resolved, snap);
    }
}
