//! Toolchain for Thinging Machine (TM) conceptual models.
//!
//! A TM model is a tree of thimacs whose actions (create, process, release,
//! transfer, receive) are linked by flows and triggers. Events carve regions
//! out of this static model and a chronology orders them.
//!
//! * [`dsl`] parses and prints the `.tm` text format.
//! * [`validate`] checks flow grammar and event declarations.
//! * [`transform`] removes release/transfer/receive chains and marks implicit nodes.
//! * [`dynamics`] decides, steps and enumerates chronology traces.
//! * [`render`] emits DOT and SVG for static, dynamic and chronology views.
//! * [`narrate`] writes chronology prose and source-text coverage reports.
//! * [`corpus`] checks golden corpus cases end to end.

pub mod corpus;
pub mod diagnostic;
pub mod dsl;
pub mod dynamics;
pub mod model;
pub mod narrate;
pub mod render;
pub mod span;
pub mod transform;
pub mod validate;

pub use diagnostic::{Diagnostic, Severity};
pub use dsl::{parse, print_canonical};
pub use dynamics::{BehaviorExpr, Chronology, Trace};
pub use model::{ActionKind, Document, ElementId, EventId, Region, Stats};
pub use narrate::{
    coverage_report, document_coverage, narrate_chronology, CoverageReport, NarrateError,
};
pub use render::{render, to_dot, to_svg, Format, RenderOptions, View, ViewError};
pub use span::SourceSpan;
pub use transform::{simplify_level1, SimplificationMap, TransformError};
pub use validate::{check_document, check_dynamic, check_static, infer_mode, Mode};
