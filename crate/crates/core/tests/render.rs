mod common;

use std::collections::BTreeSet;

use common::{case_doc, CASES};
use tm_core::render::check::{read_dot, scan_xml};
use tm_core::{render, EventId, Format, RenderOptions, View, ViewError};

const VIEWS: [View; 3] = [View::Static, View::Dynamic, View::Chronology];

#[test]
fn static_dot_structure() {
    for case in CASES {
        let doc = case_doc(case);
        let stats = doc.stats();
        let dot = render(&doc, &RenderOptions::new(View::Static, Format::Dot)).unwrap();
        let g = read_dot(&dot).unwrap_or_else(|e| panic!("{case}: {e}"));
        assert!(g.directed);
        assert_eq!(g.clusters(), stats.thimacs, "{case}");
        assert_eq!(g.nodes.len(), stats.actions() + stats.storages, "{case}");
        assert_eq!(g.nodes_with("shape", "cylinder"), stats.storages, "{case}");
        assert_eq!(g.dashed_edges(), stats.triggers, "{case}");
        assert_eq!(g.edges.len(), stats.flows + stats.triggers, "{case}");
        for e in &g.edges {
            assert!(g.nodes.contains_key(&e.from) && g.nodes.contains_key(&e.to));
        }
    }
}

#[test]
fn static_svg_structure() {
    for case in CASES {
        let doc = case_doc(case);
        let stats = doc.stats();
        let svg = render(&doc, &RenderOptions::new(View::Static, Format::Svg)).unwrap();
        let x = scan_xml(&svg).unwrap_or_else(|e| panic!("{case}: {e}"));
        assert_eq!(x.root().unwrap().name, "svg");
        assert_eq!(x.count_with("g", "class", "thimac"), stats.thimacs);
        assert_eq!(x.count_with("g", "class", "action"), stats.actions());
        assert_eq!(x.count_with("g", "class", "storage"), stats.storages);
        assert_eq!(x.count_with("g", "class", "trigger"), stats.triggers);
        assert_eq!(x.count_with("g", "class", "flow"), stats.flows);
        assert_eq!(
            x.count_with("path", "stroke-dasharray", "6,4"),
            stats.triggers
        );
    }
}

#[test]
fn every_view_is_well_formed() {
    for case in CASES {
        let doc = case_doc(case);
        for view in VIEWS {
            let dot = render(&doc, &RenderOptions::new(view, Format::Dot)).unwrap();
            read_dot(&dot).unwrap_or_else(|e| panic!("{case} {view:?}: {e}"));
            let svg = render(&doc, &RenderOptions::new(view, Format::Svg)).unwrap();
            scan_xml(&svg).unwrap_or_else(|e| panic!("{case} {view:?}: {e}"));
            assert_eq!(
                svg,
                render(&doc, &RenderOptions::new(view, Format::Svg)).unwrap()
            );
        }
    }
}

#[test]
fn dynamic_view_has_one_cluster_per_event() {
    for case in CASES {
        let doc = case_doc(case);
        let events = doc.stats().events;
        let dot = render(&doc, &RenderOptions::new(View::Dynamic, Format::Dot)).unwrap();
        let g = read_dot(&dot).unwrap();
        let event_clusters = g
            .subgraphs
            .iter()
            .filter(|s| s.starts_with("cluster_event_"))
            .count();
        assert_eq!(event_clusters, events, "{case}");
        let svg = render(&doc, &RenderOptions::new(View::Dynamic, Format::Svg)).unwrap();
        assert_eq!(
            scan_xml(&svg).unwrap().count_with("g", "class", "event"),
            events
        );
    }
}

#[test]
fn event_filter() {
    let doc = case_doc("sales");
    let mut opts = RenderOptions::new(View::Dynamic, Format::Svg);
    opts.event_filter = Some(BTreeSet::from([EventId::new("E2")]));
    let svg = render(&doc, &opts).unwrap();
    let x = scan_xml(&svg).unwrap();
    assert_eq!(x.count_with("g", "class", "event"), 1);
    assert_eq!(x.count_with("g", "data-event", "E2"), 1);
    opts.event_filter = Some(BTreeSet::from([EventId::new("E9")]));
    assert_eq!(
        render(&doc, &opts),
        Err(ViewError::UnknownEvent(EventId::new("E9")))
    );
}

#[test]
fn chronology_view_shapes() {
    let doc = case_doc("h2s");
    let dot = render(&doc, &RenderOptions::new(View::Chronology, Format::Dot)).unwrap();
    let g = read_dot(&dot).unwrap();
    assert_eq!(g.nodes_with("shape", "box"), 17);
    assert_eq!(g.nodes_with("shape", "diamond"), 2);
    let loops: Vec<_> = g
        .edges
        .iter()
        .filter(|e| e.attrs.get("style").map(String::as_str) == Some("bold"))
        .collect();
    assert_eq!(loops.len(), 1);
    assert_eq!(loops[0].attrs["label"], "for all residents in the list");

    let milk = case_doc("milk");
    let svg = render(&milk, &RenderOptions::new(View::Chronology, Format::Svg)).unwrap();
    let x = scan_xml(&svg).unwrap();
    assert_eq!(x.count_with("g", "class", "chrono-event"), 26);
    // two forks and two joins
    assert_eq!(x.count_with("rect", "class", "par"), 4);
}

#[test]
fn implicit_notation_hides_labels() {
    let doc = case_doc("sales");
    let mut opts = RenderOptions::new(View::Static, Format::Dot);
    let plain = read_dot(&render(&doc, &opts).unwrap()).unwrap();
    opts.implicit_notation = true;
    let implicit = read_dot(&render(&doc, &opts).unwrap()).unwrap();
    let blank = |g: &tm_core::render::check::DotGraph| g.nodes_with("label", "");
    let stats = doc.stats();
    assert_eq!(blank(&plain), 0);
    assert_eq!(blank(&implicit), stats.create + stats.process);
}

#[test]
fn views_without_chronology() {
    let doc = tm_core::parse("model \"m\" { thimac A { action c: create } }").unwrap();
    assert_eq!(
        render(&doc, &RenderOptions::new(View::Chronology, Format::Dot)),
        Err(ViewError::NoChronology)
    );
    assert_eq!(
        render(&doc, &RenderOptions::new(View::Dynamic, Format::Svg)),
        Err(ViewError::NoEvents)
    );
}
