//! Path expressions locating entity data inside a transcript.
//!
//! A path is a dot-separated list of field names. A field suffixed with `[]`
//! holds an array whose elements are each visited: `crew[].residence`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub field: String,
    pub iterate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathExpr {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("path syntax error at offset {offset}: {reason}")]
pub struct PathSyntaxError {
    pub offset: usize,
    pub reason: &'static str,
}

impl PathExpr {
    pub fn parse(text: &str) -> Result<Self, PathSyntaxError> {
        if text.is_empty() {
            return Err(PathSyntaxError { offset: 0, reason: "empty path" });
        }
        let mut segments = Vec::new();
        let mut start = 0;
        for piece in text.split('.') {
            segments.push(parse_segment(piece, start)?);
            start += piece.len() + 1;
        }
        Ok(Self { segments })
    }

    /// Single non-iterating segment, taken verbatim (no syntax applied).
    pub fn field(name: impl Into<String>) -> Self {
        Self {
            segments: vec![Segment { field: name.into(), iterate: false }],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn iterates(&self) -> bool {
        self.segments.iter().any(|s| s.iterate)
    }

    /// True when `other` starts with every segment of `self`.
    pub fn is_prefix_of(&self, other: &PathExpr) -> bool {
        other.segments.len() >= self.segments.len()
            && self.segments.iter().zip(&other.segments).all(|(a, b)| a == b)
    }

    pub fn join(&self, rest: &PathExpr) -> PathExpr {
        let mut segments = self.segments.clone();
        segments.extend(rest.segments.iter().cloned());
        PathExpr { segments }
    }
}

fn parse_segment(piece: &str, offset: usize) -> Result<Segment, PathSyntaxError> {
    let (field, iterate) = match piece.strip_suffix("[]") {
        Some(field) => (field, true),
        None => (piece, false),
    };
    if field.is_empty() {
        return Err(PathSyntaxError { offset, reason: "empty segment" });
    }
    if let Some(pos) = field.find(['[', ']']) {
        return Err(PathSyntaxError {
            offset: offset + pos,
            reason: "stray bracket",
        });
    }
    Ok(Segment { field: field.to_string(), iterate })
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&seg.field)?;
            if seg.iterate {
                f.write_str("[]")?;
            }
        }
        Ok(())
    }
}

impl FromStr for PathExpr {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for PathExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PathExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        PathExpr::parse(&text).map_err(serde::de::Error::custom)
    }
}
