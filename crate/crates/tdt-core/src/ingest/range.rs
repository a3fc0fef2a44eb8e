//! Version intervals and range matching.

use serde::{Deserialize, Serialize};

use crate::model::Version;

/// A version interval with optional, inclusivity-flagged endpoints.
/// Missing endpoints are unbounded. Defaults mirror the common advisory
/// convention `introduced <= v < fixed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionRange {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Version>,
    #[serde(default = "default_true")]
    pub lo_inclusive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Version>,
    #[serde(default)]
    pub hi_inclusive: bool,
}

fn default_true() -> bool {
    true
}

impl VersionRange {
    pub fn unbounded() -> Self {
        VersionRange {
            lo: None,
            lo_inclusive: true,
            hi: None,
            hi_inclusive: false,
        }
    }

    pub fn up_to(hi: impl Into<Version>, inclusive: bool) -> Self {
        VersionRange {
            lo: None,
            lo_inclusive: true,
            hi: Some(hi.into()),
            hi_inclusive: inclusive,
        }
    }

    pub fn from(lo: impl Into<Version>, inclusive: bool) -> Self {
        VersionRange {
            lo: Some(lo.into()),
            lo_inclusive: inclusive,
            hi: None,
            hi_inclusive: false,
        }
    }

    pub fn between(
        lo: impl Into<Version>,
        lo_inclusive: bool,
        hi: impl Into<Version>,
        hi_inclusive: bool,
    ) -> Self {
        VersionRange {
            lo: Some(lo.into()),
            lo_inclusive,
            hi: Some(hi.into()),
            hi_inclusive,
        }
    }

    /// Both endpoints present and inverted (lo above hi).
    pub fn is_inverted(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(lo), Some(hi)) => lo > hi,
            _ => false,
        }
    }
}

/// Whether `v` lies in `r`, honoring endpoint inclusivity; open endpoints
/// are unbounded.
pub fn version_in_range(v: &Version, r: &VersionRange) -> bool {
    if let Some(lo) = &r.lo {
        let ok = if r.lo_inclusive { v >= lo } else { v > lo };
        if !ok {
            return false;
        }
    }
    if let Some(hi) = &r.hi {
        let ok = if r.hi_inclusive { v <= hi } else { v < hi };
        if !ok {
            return false;
        }
    }
    true
}

/// Whether `v` lies in any of the given ranges.
pub fn version_in_any_range(v: &Version, ranges: &[VersionRange]) -> bool {
    ranges.iter().any(|r| version_in_range(v, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Version {
        Version::parse(s)
    }

    #[test]
    fn exclusive_upper_bound() {
        let r = VersionRange::up_to("1.4.18", false);
        assert!(version_in_range(&v("1.4.17"), &r));
        assert!(!version_in_range(&v("1.4.18"), &r));
    }

    #[test]
    fn open_upper_endpoint_is_unbounded() {
        let r = VersionRange::from("1.0", true);
        assert!(version_in_range(&v("2.0"), &r));
        assert!(!version_in_range(&v("0.9"), &r));
    }

    #[test]
    fn fully_open_range_matches_everything() {
        let r = VersionRange::unbounded();
        assert!(version_in_range(&v("0.0.1"), &r));
        assert!(version_in_range(&v("99.99"), &r));
    }

    #[test]
    fn inclusive_bounds() {
        let r = VersionRange::between("1.0", true, "2.0", true);
        assert!(version_in_range(&v("1.0"), &r));
        assert!(version_in_range(&v("2.0"), &r));
        assert!(!version_in_range(&v("2.0.1"), &r));
    }
}
