//! DOT and SVG emission for the static, dynamic and chronology views.
//!
//! Both formats are produced without an external layout engine and are
//! byte-deterministic for a given document and options. Triggers are the only
//! dashed edges; storages are cylinders.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{ActionKind, ActionNode, Document, Event, EventId};

pub mod check;
mod chrono;
mod dot;
mod layout;
mod svg;

pub use dot::to_dot;
pub use svg::to_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum View {
    #[default]
    Static,
    Dynamic,
    Chronology,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Dot,
    Svg,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub view: View,
    pub format: Format,
    /// Hide create and process labels while keeping their boxes.
    pub implicit_notation: bool,
    /// Dynamic view only: overlay just these events.
    pub event_filter: Option<BTreeSet<EventId>>,
}

impl RenderOptions {
    pub fn new(view: View, format: Format) -> Self {
        Self {
            view,
            format,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViewError {
    #[error("document declares no chronology")]
    NoChronology,
    #[error("dynamic view needs at least one declared event")]
    NoEvents,
    #[error("event filter names undeclared event `{0}`")]
    UnknownEvent(EventId),
}

/// Renders in the format selected by `opts`.
pub fn render(doc: &Document, opts: &RenderOptions) -> Result<String, ViewError> {
    match opts.format {
        Format::Dot => to_dot(doc, opts),
        Format::Svg => to_svg(doc, opts),
    }
}

fn selected_events<'a>(
    doc: &'a Document,
    opts: &RenderOptions,
) -> Result<Vec<&'a Event>, ViewError> {
    let events = doc.events();
    if events.is_empty() {
        return Err(ViewError::NoEvents);
    }
    match &opts.event_filter {
        None => Ok(events),
        Some(filter) => {
            if let Some(missing) = filter.iter().find(|id| doc.event(id).is_none()) {
                return Err(ViewError::UnknownEvent(missing.clone()));
            }
            Ok(events
                .into_iter()
                .filter(|e| filter.contains(&e.id))
                .collect())
        }
    }
}

fn label_hidden(a: &ActionNode, opts: &RenderOptions) -> bool {
    a.implicit
        || (opts.implicit_notation && matches!(a.kind, ActionKind::Create | ActionKind::Process))
}
