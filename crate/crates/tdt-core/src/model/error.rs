//! Errors for graph construction, time-indexing and slicing.

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("conflicting metadata for {gav}: release dates {first} vs {second}")]
    ConflictingMetadata {
        gav: String,
        first: NaiveDate,
        second: NaiveDate,
    },

    #[error("snapshot roots belong to different libraries: {expected} vs {found}")]
    MixedRoots { expected: String, found: String },

    #[error("dependency cycle detected through {gav}")]
    CycleDetected { gav: String },

    #[error("snapshot is not connected: {gav} unreachable from the root")]
    Disconnected { gav: String },

    #[error("snapshot root {gav} appears as a dependency")]
    RootIsDependency { gav: String },

    #[error("no snapshots given")]
    EmptyFamily,

    #[error("snapshot roots out of order: {prev} ({prev_date}) not before {next} ({next_date})")]
    UnorderedSnapshots {
        prev: String,
        prev_date: NaiveDate,
        next: String,
        next_date: NaiveDate,
    },

    #[error("time {t} outside the span [{start}, {end}]")]
    OutOfSpan {
        t: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("{library} is not a dependency in any snapshot of this tree")]
    NotADependency { library: String },
}
