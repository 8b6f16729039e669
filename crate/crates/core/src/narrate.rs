//! Plain-text narrative of a chronology and coverage of a domain text.
//!
//! The narrative uses fixed templates:
//!
//! | term            | text                                            |
//! |-----------------|-------------------------------------------------|
//! | event `E`       | description, ending in `.`, then ` (E)`          |
//! | sequence        | parts joined by one space                       |
//! | `alt`           | `Either: ` a ` Or: ` b ...                      |
//! | `loop`          | body ` This repeats.`                           |
//! | `loop (g)`      | body ` Repeating this ` g `.`                   |
//! | `par`           | `In parallel: ` a ` And: ` b ...                |

use std::fmt;

use thiserror::Error;

use crate::diagnostic::Diagnostic;
use crate::dynamics::BehaviorExpr;
use crate::model::{Annotation, ByteRange, Document, EventId};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NarrateError {
    #[error("document declares no chronology")]
    NoChronology,
    #[error("chronology references undeclared event `{0}`")]
    UnknownEvent(EventId),
}

/// Narrative text for the document's chronology.
pub fn narrate_chronology(doc: &Document) -> Result<String, NarrateError> {
    let expr = doc.chronology().ok_or(NarrateError::NoChronology)?;
    narrate(doc, expr)
}

fn narrate(doc: &Document, e: &BehaviorExpr) -> Result<String, NarrateError> {
    Ok(match e {
        BehaviorExpr::Event(id) => {
            let event = doc
                .event(id)
                .ok_or_else(|| NarrateError::UnknownEvent(id.clone()))?;
            let mut text = event.description.trim_end().to_string();
            if !text.ends_with('.') {
                text.push('.');
            }
            format!("{text} ({id})")
        }
        BehaviorExpr::Seq(xs) => parts(doc, xs)?.join(" "),
        BehaviorExpr::Alt(xs) => format!("Either: {}", parts(doc, xs)?.join(" Or: ")),
        BehaviorExpr::Par(xs) => format!("In parallel: {}", parts(doc, xs)?.join(" And: ")),
        BehaviorExpr::Loop { body, guard } => {
            let body = narrate(doc, body)?;
            match guard {
                Some(g) => format!("{body} Repeating this {g}."),
                None => format!("{body} This repeats."),
            }
        }
    })
}

fn parts(doc: &Document, xs: &[BehaviorExpr]) -> Result<Vec<String>, NarrateError> {
    xs.iter().map(|x| narrate(doc, x)).collect()
}

/// How much of a domain text the annotations cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub total_bytes: usize,
    /// Size of the union of all clipped spans.
    pub covered_bytes: usize,
    /// Source text with each merged covered run wrapped in `<<` and `>>`.
    pub marked_text: String,
    /// One warning per clipped span.
    pub warnings: Vec<Diagnostic>,
}

impl CoverageReport {
    /// Percentage times ten, rounded half up.
    pub fn percent_tenths(&self) -> u64 {
        if self.total_bytes == 0 {
            return 0;
        }
        let (c, t) = (self.covered_bytes as u128, self.total_bytes as u128);
        ((2000 * c + t) / (2 * t)) as u64
    }

    pub fn percent(&self) -> f64 {
        self.percent_tenths() as f64 / 10.0
    }

    pub fn percent_text(&self) -> String {
        let t = self.percent_tenths();
        format!("{}.{}", t / 10, t % 10)
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coverage: {}%", self.percent_text())?;
        writeln!(
            f,
            "covered: {}/{} bytes",
            self.covered_bytes, self.total_bytes
        )?;
        writeln!(f)?;
        f.write_str(&self.marked_text)?;
        if !self.marked_text.ends_with('\n') {
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Coverage of `text` by the annotation spans.
pub fn coverage_report<'a, I>(text: &str, annotations: I) -> CoverageReport
where
    I: IntoIterator<Item = &'a Annotation>,
{
    coverage_with_spans(
        text,
        annotations.into_iter().map(|a| (a, SourceSpan::default())),
    )
}

/// Coverage of `text` by the document's annotations; warnings point at the
/// offending `annotate` declarations.
pub fn document_coverage(doc: &Document, text: &str) -> CoverageReport {
    let spans = &doc.spans().annotations;
    coverage_with_spans(
        text,
        doc.annotations()
            .into_iter()
            .enumerate()
            .map(|(i, a)| (a, spans.get(i).copied().unwrap_or_default())),
    )
}

fn coverage_with_spans<'a>(
    text: &str,
    annotations: impl Iterator<Item = (&'a Annotation, SourceSpan)>,
) -> CoverageReport {
    let len = text.len();
    let mut warnings = Vec::new();
    let mut ranges = Vec::new();
    for (a, at) in annotations {
        for r in &a.spans {
            let (start, end) = (r.start.min(len), r.end.min(len));
            if r.end > len || r.start > len {
                warnings.push(Diagnostic::warning(
                    "COV001",
                    format!(
                        "span {}..{} of {} exceeds the {len}-byte text; clipped to {start}..{end}",
                        r.start, r.end, a.event
                    ),
                    at,
                ));
            }
            if start < end {
                ranges.push(ByteRange::new(start, end));
            }
        }
    }
    let merged = merge(ranges);
    let covered_bytes = merged.iter().map(|r| r.end - r.start).sum();

    // markers go on character boundaries so the marked text stays valid UTF-8
    let widened = merge(
        merged
            .iter()
            .map(|r| ByteRange::new(floor_boundary(text, r.start), ceil_boundary(text, r.end)))
            .collect(),
    );
    let mut marked_text = String::with_capacity(len + 4 * widened.len());
    let mut at = 0;
    for r in &widened {
        marked_text.push_str(&text[at..r.start]);
        marked_text.push_str("<<");
        marked_text.push_str(&text[r.start..r.end]);
        marked_text.push_str(">>");
        at = r.end;
    }
    marked_text.push_str(&text[at..]);

    CoverageReport {
        total_bytes: len,
        covered_bytes,
        marked_text,
        warnings,
    }
}

/// Sorted, disjoint, non-adjacent union of nonempty ranges.
fn merge(mut ranges: Vec<ByteRange>) -> Vec<ByteRange> {
    ranges.sort_by_key(|r| (r.start, r.end));
    let mut out: Vec<ByteRange> = Vec::with_capacity(ranges.len());
    for r in ranges.into_iter().filter(|r| r.start < r.end) {
        match out.last_mut() {
            Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
            _ => out.push(r),
        }
    }
    out
}

fn floor_boundary(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

fn ceil_boundary(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i += 1;
    }
    i
}
