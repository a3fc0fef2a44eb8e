//! Release chains: date-ordered series of versions of one library.

use std::collections::BTreeMap;

use super::error::ModelError;
use super::ids::{LibraryId, LibraryInstance};

/// A codebase chain: instances of one library ordered by release date,
/// with version order breaking date ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CChain {
    id: LibraryId,
    instances: Vec<LibraryInstance>,
}

impl CChain {
    /// Builds a chain from instances of a single library, sorting by
    /// (release_date, version) and dropping exact duplicates.
    pub fn new(
        id: LibraryId,
        mut instances: Vec<LibraryInstance>,
    ) -> Result<Self, ModelError> {
        instances.sort_by(|a, b| {
            a.release_date
                .cmp(&b.release_date)
                .then_with(|| a.version.cmp(&b.version))
        });
        instances.dedup_by(|a, b| a.version == b.version && a.release_date == b.release_date);
        for w in instances.windows(2) {
            if w[0].version == w[1].version {
                return Err(ModelError::ConflictingMetadata {
                    gav: w[0].gav(),
                    first: w[0].release_date,
                    second: w[1].release_date,
                });
            }
        }
        Ok(CChain { id, instances })
    }

    pub fn id(&self) -> &LibraryId {
        &self.id
    }

    pub fn instances(&self) -> &[LibraryInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn first(&self) -> Option<&LibraryInstance> {
        self.instances.first()
    }

    pub fn last(&self) -> Option<&LibraryInstance> {
        self.instances.last()
    }

    /// Consecutive (predecessor, successor) pairs.
    pub fn successor_pairs(&self) -> impl Iterator<Item = (&LibraryInstance, &LibraryInstance)> {
        self.instances.windows(2).map(|w| (&w[0], &w[1]))
    }

    /// Position of a version within the chain, if present.
    pub fn position(&self, version: &super::version::Version) -> Option<usize> {
        self.instances.iter().position(|i| &i.version == version)
    }
}

/// Groups instances into one chain per distinct library id (chain tags
/// included), each sorted by release date with version tie-break.
///
/// The same (id, version) occurring with two different release dates is a
/// metadata conflict and rejected.
pub fn build_cchains(
    instances: impl IntoIterator<Item = LibraryInstance>,
) -> Result<Vec<CChain>, ModelError> {
    let mut by_id: BTreeMap<LibraryId, Vec<LibraryInstance>> = BTreeMap::new();
    for inst in instances {
        by_id.entry(inst.id.clone()).or_default().push(inst);
    }
    by_id
        .into_iter()
        .map(|(id, members)| CChain::new(id, members))
        .collect()
}
