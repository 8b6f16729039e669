use std::fmt;

/// Byte range into a source text, with the 1-based line and column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    pub fn new(byte_start: usize, byte_end: usize, line: u32, column: u32) -> Self {
        debug_assert!(byte_start <= byte_end);
        Self {
            byte_start,
            byte_end,
            line,
            column,
        }
    }

    /// Span covering `self` through the end of `other`.
    pub fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            byte_start: self.byte_start,
            byte_end: other.byte_end.max(self.byte_end),
            line: self.line,
            column: self.column,
        }
    }

    pub fn len(&self) -> usize {
        self.byte_end - self.byte_start
    }

    pub fn is_empty(&self) -> bool {
        self.byte_start == self.byte_end
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        Self {
            byte_start: 0,
            byte_end: 0,
            line: 1,
            column: 1,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
