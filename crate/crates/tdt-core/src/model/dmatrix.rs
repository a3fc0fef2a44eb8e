//! Dependency matrices: all coexisting versions of one library across the
//! release history of a root, with an absent marker for adoption/dropping.

use chrono::NaiveDate;

use super::chain::CChain;
use super::error::ModelError;
use super::ids::{LibraryId, LibraryInstance};

/// One cell of a d-matrix: a library instance, or nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DCell {
    Absent,
    Present(LibraryInstance),
}

impl DCell {
    pub fn instance(&self) -> Option<&LibraryInstance> {
        match self {
            DCell::Absent => None,
            DCell::Present(i) => Some(i),
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, DCell::Absent)
    }
}

/// Matrix of instances of one library: one row per parallel occurrence
/// position, one column per root version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DMatrix {
    id: LibraryId,
    columns: Vec<NaiveDate>,
    rows: Vec<Vec<DCell>>,
}

impl DMatrix {
    pub(crate) fn new(id: LibraryId, columns: Vec<NaiveDate>, rows: Vec<Vec<DCell>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        DMatrix { id, columns, rows }
    }

    pub fn id(&self) -> &LibraryId {
        &self.id
    }

    /// Column labels: the root release date of each time step.
    pub fn columns(&self) -> &[NaiveDate] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<DCell>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &DCell {
        &self.rows[row][col]
    }

    /// Contracts one row to its chain. Valid for any matrix built from a
    /// time dependency tree, where row cells never carry conflicting dates.
    pub fn contract_row(&self, row: usize) -> CChain {
        contract_row(self.id.clone(), &self.rows[row])
            .expect("d-matrix row cells share consistent metadata")
    }

    /// All instances present anywhere in the matrix, each once.
    pub fn instances(&self) -> Vec<&LibraryInstance> {
        let mut seen = Vec::new();
        for row in &self.rows {
            for cell in row {
                if let Some(i) = cell.instance() {
                    if !seen.contains(&i) {
                        seen.push(i);
                    }
                }
            }
        }
        seen
    }
}

/// Contracts a row of cells to a chain: absent markers drop out, stutter
/// repeats collapse, and downgrades normalize to the distinct instances
/// ordered by release date.
pub fn contract_row(id: LibraryId, cells: &[DCell]) -> Result<CChain, ModelError> {
    let mut distinct: Vec<LibraryInstance> = Vec::new();
    for cell in cells {
        if let Some(inst) = cell.instance() {
            if !distinct.iter().any(|d| d.version == inst.version) {
                distinct.push(inst.clone());
            } else if let Some(prev) = distinct.iter().find(|d| d.version == inst.version) {
                if prev.release_date != inst.release_date {
                    return Err(ModelError::ConflictingMetadata {
                        gav: inst.gav(),
                        first: prev.release_date,
                        second: inst.release_date,
                    });
                }
            }
        }
    }
    CChain::new(id, distinct)
}
