//! Version strings with a total order.
//!
//! Parsing is total: any string is accepted, with non-numeric trailing
//! content falling into the qualifier. Ordering compares numeric parts
//! component-wise (missing components count as zero); a version with a
//! qualifier sorts before the bare version under the default pre-release
//! rule, and qualifiers compare lexicographically among themselves.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// How qualifiers relate to the bare version ("1.2.0-rc1" vs "1.2.0").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QualifierRule {
    /// Qualified versions precede the bare version (Maven-style pre-release).
    #[default]
    PreRelease,
    /// Qualified versions follow the bare version.
    PostRelease,
}

/// A parsed version string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Version {
    raw: String,
    numeric_parts: Vec<u64>,
    qualifier: Option<String>,
}

impl Version {
    /// Parses a version string. Never fails; unparseable content becomes
    /// the qualifier (a fully non-numeric string has no numeric parts).
    pub fn parse(raw: &str) -> Self {
        let (head, dash_qualifier) = match raw.split_once(['-', '_']) {
            Some((h, q)) => (h, Some(q)),
            None => (raw, None),
        };

        let mut numeric_parts = Vec::new();
        let mut tail_qualifier: Option<String> = None;
        let components: Vec<&str> = head.split('.').collect();
        for (i, comp) in components.iter().enumerate() {
            let digits_end = comp
                .char_indices()
                .find(|(_, c)| !c.is_ascii_digit())
                .map(|(idx, _)| idx)
                .unwrap_or(comp.len());
            if digits_end > 0 {
                if let Ok(n) = comp[..digits_end].parse::<u64>() {
                    numeric_parts.push(n);
                } else {
                    // numeric overflow: treat the whole component as qualifier
                    tail_qualifier = Some(components[i..].join("."));
                    break;
                }
            }
            if digits_end < comp.len() {
                let mut rest = comp[digits_end..].to_string();
                if i + 1 < components.len() {
                    rest.push('.');
                    rest.push_str(&components[i + 1..].join("."));
                }
                tail_qualifier = Some(rest);
                break;
            }
        }

        let qualifier = match (tail_qualifier, dash_qualifier) {
            (Some(t), Some(d)) => Some(format!("{t}-{d}")),
            (Some(t), None) => Some(t),
            (None, Some(d)) => Some(d.to_string()),
            (None, None) => None,
        };

        Version {
            raw: raw.to_string(),
            numeric_parts,
            qualifier: qualifier.filter(|q| !q.is_empty()),
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn numeric_parts(&self) -> &[u64] {
        &self.numeric_parts
    }

    pub fn qualifier(&self) -> Option<&str> {
        self.qualifier.as_deref()
    }

    /// Compares under an explicit qualifier rule.
    pub fn compare_with(&self, other: &Self, rule: QualifierRule) -> Ordering {
        let n = self.numeric_parts.len().max(other.numeric_parts.len());
        for i in 0..n {
            let a = self.numeric_parts.get(i).copied().unwrap_or(0);
            let b = other.numeric_parts.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        match (&self.qualifier, &other.qualifier) {
            (None, None) => Ordering::Equal,
            (Some(_), None) => match rule {
                QualifierRule::PreRelease => Ordering::Less,
                QualifierRule::PostRelease => Ordering::Greater,
            },
            (None, Some(_)) => match rule {
                QualifierRule::PreRelease => Ordering::Greater,
                QualifierRule::PostRelease => Ordering::Less,
            },
            (Some(a), Some(b)) => a.cmp(b),
        }
    }

    /// Numeric parts with trailing zeros dropped; the canonical key under
    /// which "1.4" and "1.4.0" coincide.
    fn trimmed_parts(&self) -> &[u64] {
        let mut end = self.numeric_parts.len();
        while end > 0 && self.numeric_parts[end - 1] == 0 {
            end -= 1;
        }
        &self.numeric_parts[..end]
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl Hash for Version {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.trimmed_parts().hash(state);
        self.qualifier.hash(state);
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare_with(other, QualifierRule::PreRelease)
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl From<String> for Version {
    fn from(s: String) -> Self {
        Version::parse(&s)
    }
}

impl From<Version> for String {
    fn from(v: Version) -> Self {
        v.raw
    }
}

impl From<&str> for Version {
    fn from(s: &str) -> Self {
        Version::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Version {
        Version::parse(s)
    }

    #[test]
    fn parses_plain_triplet() {
        let ver = v("1.4.18");
        assert_eq!(ver.numeric_parts(), &[1, 4, 18]);
        assert_eq!(ver.qualifier(), None);
    }

    #[test]
    fn parses_embedded_qualifier() {
        let ver = v("8.18.0m1");
        assert_eq!(ver.numeric_parts(), &[8, 18, 0]);
        assert_eq!(ver.qualifier(), Some("m1"));
    }

    #[test]
    fn parses_dash_qualifier() {
        let ver = v("30.1.1-jre");
        assert_eq!(ver.numeric_parts(), &[30, 1, 1]);
        assert_eq!(ver.qualifier(), Some("jre"));
    }

    #[test]
    fn pure_qualifier_has_no_numeric_parts() {
        let ver = v("beta");
        assert!(ver.numeric_parts().is_empty());
        assert_eq!(ver.qualifier(), Some("beta"));
    }

    #[test]
    fn patch_increment_orders() {
        assert_eq!(v("1.4.17").cmp(&v("1.4.18")), Ordering::Less);
    }

    #[test]
    fn missing_components_are_zero() {
        assert_eq!(v("1.4").cmp(&v("1.4.0")), Ordering::Equal);
        assert_eq!(v("1.4"), v("1.4.0"));
    }

    #[test]
    fn milestone_precedes_next_patch() {
        assert_eq!(v("8.18.0m1").cmp(&v("8.18.1")), Ordering::Less);
    }

    #[test]
    fn qualifier_precedes_bare_release() {
        assert_eq!(v("2.0-rc1").cmp(&v("2.0")), Ordering::Less);
        assert_eq!(
            v("2.0-rc1").compare_with(&v("2.0"), QualifierRule::PostRelease),
            Ordering::Greater
        );
    }

    #[test]
    fn qualifiers_compare_lexicographically() {
        assert_eq!(v("1.0-alpha").cmp(&v("1.0-beta")), Ordering::Less);
    }

    #[test]
    fn equal_versions_hash_equal() {
        use std::collections::hash_map::DefaultHasher;
        let h = |x: &Version| {
            let mut s = DefaultHasher::new();
            x.hash(&mut s);
            s.finish()
        };
        assert_eq!(h(&v("1.4")), h(&v("1.4.0")));
    }
}
