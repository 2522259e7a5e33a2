//! Policy paths: the backslash-separated chain of category names that
//! identifies one setting in the policy editor UI.
//!
//! Normalization rules, applied identically on the catalog side and the
//! extraction side so lookups meet in the middle:
//! - segments are split on `\` (or `>>` in guide prose), trimmed, and
//!   stripped of surrounding double quotes
//! - the leading segment must name a class root (`Computer Configuration`
//!   or `User Configuration`)
//! - a `Policies` segment directly after the class root is dropped; guide
//!   text and GPMC disagree on whether it is present
//! - comparison is case-insensitive, display is case-preserving

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassRoot {
    ComputerConfiguration,
    UserConfiguration,
}

impl ClassRoot {
    pub fn display(self) -> &'static str {
        match self {
            ClassRoot::ComputerConfiguration => "Computer Configuration",
            ClassRoot::UserConfiguration => "User Configuration",
        }
    }

    fn recognize(segment: &str) -> Option<Self> {
        let lower = segment.to_lowercase();
        match lower.as_str() {
            "computer configuration" => Some(ClassRoot::ComputerConfiguration),
            "user configuration" => Some(ClassRoot::UserConfiguration),
            _ => None,
        }
    }
}

impl fmt::Display for ClassRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display())
    }
}

/// A normalized policy path. `segments` excludes the class root.
#[derive(Debug, Clone)]
pub struct PolicyPath {
    /// The input text this path was parsed from, kept for diagnostics.
    pub raw: String,
    pub class_root: ClassRoot,
    pub segments: Vec<String>,
}

// `raw` is provenance, not identity: equality is the normalized form.
impl PartialEq for PolicyPath {
    fn eq(&self, other: &Self) -> bool {
        self.class_root == other.class_root && self.segments == other.segments
    }
}

impl Eq for PolicyPath {}

impl std::hash::Hash for PolicyPath {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.class_root.hash(state);
        self.segments.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("policy path is empty after trimming")]
    Empty,
    #[error("policy path `{0}` does not start with a class root")]
    NoClassRoot(String),
    #[error("policy path `{0}` has no segments after the class root")]
    NoSegments(String),
}

impl PolicyPath {
    /// Parse a path given in either backslash or `>>` separated form.
    pub fn parse(text: &str) -> Result<Self, PathError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(PathError::Empty);
        }
        let parts: Vec<String> = if trimmed.contains(">>") {
            trimmed.split(">>").map(clean_segment).collect()
        } else {
            trimmed.split('\\').map(clean_segment).collect()
        };
        let mut parts: Vec<String> = parts.into_iter().filter(|s| !s.is_empty()).collect();
        if parts.is_empty() {
            return Err(PathError::Empty);
        }
        let class_root = ClassRoot::recognize(&parts[0])
            .ok_or_else(|| PathError::NoClassRoot(text.trim().to_string()))?;
        parts.remove(0);
        if !parts.is_empty() && parts[0].eq_ignore_ascii_case("policies") {
            parts.remove(0);
        }
        if parts.is_empty() {
            return Err(PathError::NoSegments(text.trim().to_string()));
        }
        Ok(PolicyPath {
            raw: text.trim().to_string(),
            class_root,
            segments: parts,
        })
    }

    /// Build from already-normalized parts (catalog construction).
    pub fn from_parts(class_root: ClassRoot, segments: Vec<String>) -> Self {
        let raw = std::iter::once(class_root.display().to_string())
            .chain(segments.iter().cloned())
            .collect::<Vec<_>>()
            .join("\\");
        PolicyPath {
            raw,
            class_root,
            segments,
        }
    }

    /// Display form: class root plus segments, backslash separated.
    pub fn display(&self) -> String {
        std::iter::once(self.class_root.display().to_string())
            .chain(self.segments.iter().cloned())
            .collect::<Vec<_>>()
            .join("\\")
    }

    /// Lowercased display form; the comparison key used by catalogs.
    pub fn key(&self) -> String {
        self.display().to_lowercase()
    }

    /// All display segments including the class root.
    pub fn full_segments(&self) -> Vec<&str> {
        std::iter::once(self.class_root.display())
            .chain(self.segments.iter().map(|s| s.as_str()))
            .collect()
    }

    /// Final segment: the setting name itself.
    pub fn leaf(&self) -> &str {
        self.segments.last().map(|s| s.as_str()).unwrap_or_default()
    }

    pub fn matches(&self, other: &PolicyPath) -> bool {
        self.key() == other.key()
    }
}

fn clean_segment(segment: &str) -> String {
    let s = segment.trim();
    let s = s.strip_prefix('"').unwrap_or(s);
    let s = s.strip_suffix('"').unwrap_or(s);
    s.trim().to_string()
}

impl fmt::Display for PolicyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

impl Serialize for PolicyPath {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.display())
    }
}

impl<'de> Deserialize<'de> for PolicyPath {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        PolicyPath::parse(&text).map_err(serde::de::Error::custom)
    }
}
