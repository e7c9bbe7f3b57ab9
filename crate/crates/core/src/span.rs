use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A 1-based, inclusive region of a source file.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, line_start: u32, col_start: u32, line_end: u32, col_end: u32) -> Self {
        debug_assert!(line_start >= 1 && col_start >= 1);
        debug_assert!(line_start < line_end || (line_start == line_end && col_start <= col_end));
        SourceSpan { file, line_start, col_start, line_end, col_end }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn hull(&self, other: &SourceSpan) -> SourceSpan {
        let (line_start, col_start) = (self.line_start, self.col_start).min((other.line_start, other.col_start));
        let (line_end, col_end) = (self.line_end, self.col_end).max((other.line_end, other.col_end));
        SourceSpan { file: self.file.clone(), line_start, col_start, line_end, col_end }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        (self.line_start, self.col_start) <= (other.line_start, other.col_start)
            && (other.line_end, other.col_end) <= (self.line_end, self.col_end)
    }

    pub fn contains_line(&self, line: u32) -> bool {
        self.line_start <= line && line <= self.line_end
    }

    pub fn is_single_line(&self) -> bool {
        self.line_start == self.line_end
    }
}

impl fmt::Debug for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}-{}:{}", self.file, self.line_start, self.col_start, self.line_end, self.col_end)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single_line() {
            write!(f, "{}:{}:{}", self.file, self.line_start, self.col_start)
        } else {
            write!(f, "{}:{}-{}", self.file, self.line_start, self.line_end)
        }
    }
}

// Reports carry the program path once at top level; spans serialize coordinates only.
impl Serialize for SourceSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SourceSpan", 4)?;
        s.serialize_field("line_start", &self.line_start)?;
        s.serialize_field("col_start", &self.col_start)?;
        s.serialize_field("line_end", &self.line_end)?;
        s.serialize_field("col_end", &self.col_end)?;
        s.end()
    }
}
