use std::collections::BTreeMap;
use std::fmt::Write;

use super::chrono::{ChronoGraph, ChronoNode};
use super::layout::layer;
use super::{label_hidden, selected_events, RenderOptions, View, ViewError};
use crate::model::{Document, ElementId, Item};

const PAD: f64 = 12.0;
const HEADER: f64 = 20.0;
const GAP_X: f64 = 36.0;
const GAP_Y: f64 = 16.0;
const ACTION: (f64, f64) = (84.0, 36.0);
const STORE: (f64, f64) = (84.0, 46.0);
const EMPTY_THIMAC: (f64, f64) = (96.0, 24.0);

/// SVG 1.1 drawing of the selected view.
pub fn to_svg(doc: &Document, opts: &RenderOptions) -> Result<String, ViewError> {
    match opts.view {
        View::Static => Ok(static_svg(doc, opts, &[])),
        View::Dynamic => {
            let events = selected_events(doc, opts)?;
            Ok(static_svg(doc, opts, &events))
        }
        View::Chronology => chronology_svg(doc),
    }
}

fn n(v: f64) -> String {
    let s = format!("{v:.1}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl Rect {
    fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Point where the ray from the center towards `(px, py)` leaves the rectangle.
    fn exit_towards(&self, px: f64, py: f64) -> (f64, f64) {
        let (cx, cy) = self.center();
        let (dx, dy) = (px - cx, py - cy);
        if dx == 0.0 && dy == 0.0 {
            return (cx, cy);
        }
        let tx = if dx == 0.0 {
            f64::INFINITY
        } else {
            (self.w / 2.0) / dx.abs()
        };
        let ty = if dy == 0.0 {
            f64::INFINITY
        } else {
            (self.h / 2.0) / dy.abs()
        };
        let t = tx.min(ty);
        (cx + dx * t, cy + dy * t)
    }

    fn union(&self, o: &Rect) -> Rect {
        let x = self.x.min(o.x);
        let y = self.y.min(o.y);
        Rect {
            x,
            y,
            w: (self.x + self.w).max(o.x + o.w) - x,
            h: (self.y + self.h).max(o.y + o.h) - y,
        }
    }
}

/// A measured box with children at offsets relative to its origin.
struct Block<'a> {
    item: Option<&'a Item>,
    w: f64,
    h: f64,
    kids: Vec<(Block<'a>, f64, f64)>,
}

fn item_id(item: &Item) -> Option<&ElementId> {
    match item {
        Item::Thimac(t) => Some(&t.id),
        Item::Action(a) => Some(&a.id),
        Item::Store(s) => Some(&s.id),
        _ => None,
    }
}

fn within(id: &ElementId, root: &ElementId) -> bool {
    id == root
        || id
            .as_str()
            .strip_prefix(root.as_str())
            .is_some_and(|rest| rest.starts_with('.'))
}

fn measure<'a>(
    item: Option<&'a Item>,
    items: &'a [Item],
    edges: &[(ElementId, ElementId)],
) -> Block<'a> {
    let children: Vec<&Item> = items.iter().filter(|i| item_id(i).is_some()).collect();
    let ids: Vec<&ElementId> = children.iter().filter_map(|i| item_id(i)).collect();
    let index_of = |e: &ElementId| ids.iter().position(|c| within(e, c));
    let lifted: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|(a, b)| Some((index_of(a)?, index_of(b)?)))
        .filter(|(i, j)| i != j)
        .collect();
    let blocks: Vec<Block> = children
        .iter()
        .map(|c| match c {
            Item::Thimac(t) => measure(Some(c), &t.items, edges),
            Item::Store(_) => Block {
                item: Some(c),
                w: STORE.0,
                h: STORE.1,
                kids: Vec::new(),
            },
            _ => Block {
                item: Some(c),
                w: ACTION.0,
                h: ACTION.1,
                kids: Vec::new(),
            },
        })
        .collect();

    let (pad, header) = if item.is_some() {
        (PAD, HEADER)
    } else {
        (PAD * 2.0, 0.0)
    };
    let ranks = layer(blocks.len(), &lifted);
    let mut slots: Vec<Option<Block>> = blocks.into_iter().map(Some).collect();
    let mut kids = Vec::new();
    let mut x = pad;
    let mut height: f64 = 0.0;
    for rank in &ranks {
        let width = rank
            .iter()
            .map(|&i| slots[i].as_ref().map_or(0.0, |b| b.w))
            .fold(0.0, f64::max);
        let mut y = pad + header;
        for &i in rank {
            let b = slots[i].take().expect("each block is placed once");
            let (bw, bh) = (b.w, b.h);
            kids.push((b, x + (width - bw) / 2.0, y));
            y += bh + GAP_Y;
        }
        height = height.max(y - GAP_Y - pad - header);
        x += width + GAP_X;
    }
    let inner_w = if ranks.is_empty() {
        0.0
    } else {
        x - GAP_X - pad
    };
    let (w, h) = if kids.is_empty() && item.is_some() {
        (EMPTY_THIMAC.0, header + EMPTY_THIMAC.1)
    } else {
        (inner_w + 2.0 * pad, height + header + 2.0 * pad)
    };
    let title_w = match item {
        Some(Item::Thimac(t)) => 8.0 * t.name.chars().count() as f64 + 2.0 * PAD,
        _ => 0.0,
    };
    Block {
        item,
        w: w.max(title_w),
        h,
        kids,
    }
}

fn flatten<'a>(b: &Block<'a>, x: f64, y: f64, out: &mut Vec<(&'a Item, Rect)>) {
    if let Some(item) = b.item {
        out.push((
            item,
            Rect {
                x,
                y,
                w: b.w,
                h: b.h,
            },
        ));
    }
    for (k, dx, dy) in &b.kids {
        flatten(k, x + dx, y + dy, out);
    }
}

fn open_svg(w: f64, h: f64, title: &str, out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">",
        n(w),
        n(h),
        n(w),
        n(h)
    );
    let _ = writeln!(out, "<title>{}</title>", esc(title));
}

fn arrow(from: &Rect, to: &Rect, class: &str, dashed: bool, out: &mut String) {
    let (tx, ty) = to.center();
    let (fx, fy) = from.center();
    let (x1, y1) = from.exit_towards(tx, ty);
    let (x2, y2) = to.exit_towards(fx, fy);
    let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
    let dash = if dashed {
        " stroke-dasharray=\"6,4\""
    } else {
        ""
    };
    let _ = write!(out, "<g class=\"{class}\">");
    let _ = write!(
        out,
        "<path d=\"M {} {} L {} {}\" fill=\"none\" stroke=\"black\"{dash}/>",
        n(x1),
        n(y1),
        n(x2),
        n(y2)
    );
    if len > 0.0 {
        let (ux, uy) = ((x2 - x1) / len, (y2 - y1) / len);
        let (bx, by) = (x2 - 8.0 * ux, y2 - 8.0 * uy);
        let _ = write!(
            out,
            "<path d=\"M {} {} L {} {} L {} {} Z\" fill=\"black\"/>",
            n(x2),
            n(y2),
            n(bx - 4.0 * uy),
            n(by + 4.0 * ux),
            n(bx + 4.0 * uy),
            n(by - 4.0 * ux)
        );
    }
    out.push_str("</g>\n");
}

fn static_svg(doc: &Document, opts: &RenderOptions, events: &[&crate::model::Event]) -> String {
    let edges: Vec<(ElementId, ElementId)> = doc
        .flows()
        .iter()
        .map(|f| (f.from.clone(), f.to.clone()))
        .chain(
            doc.triggers()
                .iter()
                .map(|t| (t.from.clone(), t.to.clone())),
        )
        .collect();
    let root = measure(None, doc.items(), &edges);
    let mut placed = Vec::new();
    flatten(&root, 0.0, 0.0, &mut placed);
    let rects: BTreeMap<&ElementId, Rect> = placed
        .iter()
        .filter_map(|(i, r)| Some((item_id(i)?, *r)))
        .collect();

    let mut out = String::new();
    open_svg(root.w.max(40.0), root.h.max(40.0), doc.name(), &mut out);
    out.push_str("<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for (item, r) in &placed {
        if let Item::Thimac(t) = item {
            let _ = writeln!(
                out,
                "<g class=\"thimac\" data-id=\"{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/><text x=\"{}\" y=\"{}\">{}</text></g>",
                esc(t.id.as_str()),
                n(r.x),
                n(r.y),
                n(r.w),
                n(r.h),
                n(r.x + 6.0),
                n(r.y + 14.0),
                esc(&title(&t.name, t.label))
            );
        }
    }
    for f in doc.flows() {
        if let (Some(a), Some(b)) = (rects.get(&f.from), rects.get(&f.to)) {
            if doc.node_kind(&f.from).is_some() && doc.node_kind(&f.to).is_some() {
                arrow(a, b, "flow", false, &mut out);
            }
        }
    }
    for t in doc.triggers() {
        if let (Some(a), Some(b)) = (rects.get(&t.from), rects.get(&t.to)) {
            if doc.node_kind(&t.from).is_some() && doc.node_kind(&t.to).is_some() {
                arrow(a, b, "trigger", true, &mut out);
            }
        }
    }
    for (item, r) in &placed {
        match item {
            Item::Action(a) => {
                let _ = write!(
                    out,
                    "<g class=\"action\" data-id=\"{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"black\"/>",
                    esc(a.id.as_str()),
                    n(r.x),
                    n(r.y),
                    n(r.w),
                    n(r.h)
                );
                if !label_hidden(a, opts) {
                    let (cx, cy) = r.center();
                    let _ = write!(
                        out,
                        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                        n(cx),
                        n(cy + 4.0),
                        a.kind.keyword()
                    );
                }
                number(a.label, r, &mut out);
                out.push_str("</g>\n");
            }
            Item::Store(s) => {
                let ry = 6.0;
                let _ = write!(
                    out,
                    "<g class=\"storage\" data-id=\"{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"none\"/>",
                    esc(s.id.as_str()),
                    n(r.x),
                    n(r.y + ry),
                    n(r.w),
                    n(r.h - 2.0 * ry)
                );
                let _ = write!(
                    out,
                    "<path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"black\"/>",
                    n(r.x),
                    n(r.y + ry),
                    n(r.x),
                    n(r.y + r.h - ry),
                    n(r.x + r.w),
                    n(r.y + ry),
                    n(r.x + r.w),
                    n(r.y + r.h - ry)
                );
                for cy in [r.y + ry, r.y + r.h - ry] {
                    let _ = write!(
                        out,
                        "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"white\" stroke=\"black\"/>",
                        n(r.x + r.w / 2.0),
                        n(cy),
                        n(r.w / 2.0),
                        n(ry)
                    );
                }
                let (cx, cy) = r.center();
                let _ = write!(
                    out,
                    "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                    n(cx),
                    n(cy + 4.0),
                    esc(&s.name)
                );
                number(s.label, r, &mut out);
                out.push_str("</g>\n");
            }
            _ => {}
        }
    }

    for e in events {
        let minimal: Vec<&Rect> = e
            .region
            .elements
            .iter()
            .filter(|id| rects.contains_key(id))
            .filter(|id| {
                !e.region
                    .elements
                    .iter()
                    .any(|o| o != *id && rects.contains_key(o) && within(o, id))
            })
            .filter_map(|id| rects.get(id))
            .collect();
        let Some(first) = minimal.first() else {
            continue;
        };
        let b = minimal.iter().fold(**first, |acc, r| acc.union(r));
        let m = 5.0;
        let _ = writeln!(
            out,
            "<g class=\"event\" data-event=\"{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"6\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/><text x=\"{}\" y=\"{}\" font-weight=\"bold\">{}</text></g>",
            esc(&e.id.to_string()),
            n(b.x - m),
            n(b.y - m),
            n(b.w + 2.0 * m),
            n(b.h + 2.0 * m),
            n(b.x - m + 2.0),
            n(b.y - m - 3.0),
            esc(&e.id.to_string())
        );
    }
    out.push_str("</svg>\n");
    out
}

fn title(name: &str, label: Option<u32>) -> String {
    match label {
        Some(k) => format!("{name} ({k})"),
        None => name.to_string(),
    }
}

fn number(label: Option<u32>, r: &Rect, out: &mut String) {
    if let Some(k) = label {
        let _ = write!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"gray\" text-anchor=\"end\">{k}</text>",
            n(r.x + r.w - 3.0),
            n(r.y + 11.0)
        );
    }
}

fn chronology_svg(doc: &Document) -> Result<String, ViewError> {
    let expr = doc.chronology().ok_or(ViewError::NoChronology)?;
    let g = ChronoGraph::build(expr);
    let forward: Vec<(usize, usize)> = g
        .edges
        .iter()
        .filter(|e| e.back.is_none())
        .map(|e| (e.from, e.to))
        .collect();
    let ranks = layer(g.nodes.len(), &forward);
    let size = |k: &ChronoNode| match k {
        ChronoNode::Start | ChronoNode::End => (20.0, 20.0),
        ChronoNode::Event(_) => (48.0, 28.0),
        ChronoNode::AltSplit | ChronoNode::AltJoin => (24.0, 24.0),
        ChronoNode::ParSplit | ChronoNode::ParJoin => (8.0, 40.0),
        ChronoNode::Skip => (6.0, 6.0),
    };
    let rows = ranks.iter().map(Vec::len).max().unwrap_or(1) as f64;
    let row_h = 56.0;
    let col_w = 76.0;
    let margin = 30.0;
    let height = rows * row_h + 2.0 * margin;
    let mut rects = vec![
        Rect {
            x: 0.0,
            y: 0.0,
            w: 0.0,
            h: 0.0
        };
        g.nodes.len()
    ];
    for (c, rank) in ranks.iter().enumerate() {
        let offset = (rows - rank.len() as f64) * row_h / 2.0;
        for (r, &v) in rank.iter().enumerate() {
            let (w, h) = size(&g.nodes[v]);
            let cx = margin + c as f64 * col_w + col_w / 2.0;
            let cy = margin + offset + r as f64 * row_h + row_h / 2.0;
            rects[v] = Rect {
                x: cx - w / 2.0,
                y: cy - h / 2.0,
                w,
                h,
            };
        }
    }
    let width = ranks.len() as f64 * col_w + 2.0 * margin;

    let mut out = String::new();
    open_svg(
        width,
        height,
        &format!("{} chronology", doc.name()),
        &mut out,
    );
    out.push_str("<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for e in &g.edges {
        match &e.back {
            None => arrow(&rects[e.from], &rects[e.to], "next", false, &mut out),
            Some(guard) => {
                let (a, b) = (rects[e.from], rects[e.to]);
                let low = a.y.max(b.y) + a.h.max(b.h) + 18.0;
                let (x1, y1) = (a.x + a.w / 2.0, a.y + a.h);
                let (x2, y2) = (b.x + b.w / 2.0, b.y + b.h);
                let _ = write!(
                    out,
                    "<g class=\"loop\"><path d=\"M {} {} C {} {} {} {} {} {}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
                    n(x1),
                    n(y1),
                    n(x1 + 10.0),
                    n(low),
                    n(x2 - 10.0),
                    n(low),
                    n(x2),
                    n(y2)
                );
                let _ = write!(
                    out,
                    "<path d=\"M {} {} L {} {} L {} {} Z\" fill=\"black\"/>",
                    n(x2),
                    n(y2),
                    n(x2 - 4.0),
                    n(y2 + 8.0),
                    n(x2 + 4.0),
                    n(y2 + 8.0)
                );
                if let Some(text) = guard {
                    let _ = write!(
                        out,
                        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>",
                        n((x1 + x2) / 2.0),
                        n(low + 10.0),
                        esc(text)
                    );
                }
                out.push_str("</g>\n");
            }
        }
    }
    for (v, node) in g.nodes.iter().enumerate() {
        let r = rects[v];
        let (cx, cy) = r.center();
        match node {
            ChronoNode::Start | ChronoNode::End | ChronoNode::Skip => {
                let fill = if matches!(node, ChronoNode::Start) {
                    "black"
                } else {
                    "white"
                };
                let _ = writeln!(
                    out,
                    "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"{fill}\" stroke=\"black\"/>",
                    n(cx),
                    n(cy),
                    n(r.w / 2.0),
                    n(r.h / 2.0)
                );
            }
            ChronoNode::Event(id) => {
                let _ = writeln!(
                    out,
                    "<g class=\"chrono-event\" data-event=\"{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"black\"/><text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text></g>",
                    esc(id),
                    n(r.x),
                    n(r.y),
                    n(r.w),
                    n(r.h),
                    n(cx),
                    n(cy + 4.0),
                    esc(id)
                );
            }
            ChronoNode::AltSplit | ChronoNode::AltJoin => {
                let _ = writeln!(
                    out,
                    "<path class=\"alt\" d=\"M {} {} L {} {} L {} {} L {} {} Z\" fill=\"white\" stroke=\"black\"/>",
                    n(cx),
                    n(r.y),
                    n(r.x + r.w),
                    n(cy),
                    n(cx),
                    n(r.y + r.h),
                    n(r.x),
                    n(cy)
                );
            }
            ChronoNode::ParSplit | ChronoNode::ParJoin => {
                let _ = writeln!(
                    out,
                    "<rect class=\"par\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"black\"/>",
                    n(r.x),
                    n(r.y),
                    n(r.w),
                    n(r.h)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
