//! Acceptance gate. Prints one PASS or FAIL line per criterion and exits
//! nonzero if any fails or the run exceeds its time budget.

mod common;

use std::collections::BTreeSet;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    arb_pipeline_model, case_doc, case_source, case_text, corpus_root, covered_bytes, flow_closure,
    two_node_model, ADJACENCY, CASES, KINDS,
};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRunner};
use tm_core::model::{Annotation, ByteRange};
use tm_core::render::check::{read_dot, scan_xml};
use tm_core::{
    check_document, check_static, coverage_report, document_coverage, narrate_chronology, parse,
    print_canonical, render, simplify_level1, Chronology, EventId, Format, Mode, RenderOptions,
    Trace, View,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const BUDGET: Duration = Duration::from_secs(5);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn corpus_validity() -> Outcome {
    let mut counts = Vec::new();
    for case in CASES {
        let doc = parse(&case_text(case)).map_err(|d| format!("{case} does not parse: {d:?}"))?;
        let errors: Vec<_> = check_document(&doc, Mode::Strict)
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.render("model.tm"))
            .collect();
        ensure!(errors.is_empty(), "{case}: {errors:?}");
        counts.push(doc.stats().events);
    }
    ensure!(counts == [6, 17, 26], "event counts {counts:?}");
    Ok("events 6/17/26, strict errors 0".into())
}

fn surviving_closure_preserved(doc: &tm_core::Document) -> Result<usize, String> {
    let (simple, _) = simplify_level1(doc).map_err(|e| e.to_string())?;
    let s = simple.stats();
    ensure!(
        s.release + s.transfer + s.receive == 0,
        "elidable nodes remain: {s:?}"
    );
    let elided: BTreeSet<String> = doc
        .actions()
        .iter()
        .filter(|a| a.kind.is_elidable())
        .map(|a| a.id.to_string())
        .collect();
    let before: BTreeSet<_> = flow_closure(doc)
        .into_iter()
        .filter(|(a, b)| !elided.contains(a) && !elided.contains(b))
        .collect();
    let after = flow_closure(&simple);
    ensure!(
        after == before,
        "reachability differs: {} vs {} pairs",
        after.len(),
        before.len()
    );
    Ok(before.len())
}

fn simplification() -> Outcome {
    let mut pairs = Vec::new();
    for case in CASES {
        pairs.push(
            surviving_closure_preserved(&case_doc(case)).map_err(|e| format!("{case}: {e}"))?,
        );
    }
    let mut runner = TestRunner::deterministic();
    let strategy = arb_pipeline_model();
    for _ in 0..64 {
        let m = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        let doc = parse(&m.text()).map_err(|d| format!("{d:?}"))?;
        surviving_closure_preserved(&doc)
            .map_err(|e| format!("generated model: {e}\n{}", m.text()))?;
    }
    Ok(format!(
        "reachable pairs {pairs:?} preserved; 64 generated models"
    ))
}

fn adjacency() -> Outcome {
    let mut legal = 0;
    for (i, from) in KINDS.iter().enumerate() {
        for (j, to) in KINDS.iter().enumerate() {
            let doc = parse(&two_node_model(from, to)).map_err(|d| format!("{d:?}"))?;
            let codes: Vec<_> = check_static(&doc, Mode::Strict)
                .iter()
                .map(|d| d.code)
                .collect();
            let want: &[&str] = if ADJACENCY[i][j] { &[] } else { &["V3"] };
            ensure!(codes == want, "{from} -> {to}: {codes:?}");
            legal += usize::from(ADJACENCY[i][j]);
        }
    }
    Ok(format!("25 pairs, {legal} legal"))
}

fn chronology() -> Outcome {
    let sales = Chronology::from_document(&case_doc("sales")).map_err(|e| e.to_string())?;
    let ids = ["E1", "E2", "E3", "E4", "E5", "E6"];
    ensure!(
        sales.accepts(&Trace::new(ids)).unwrap(),
        "sales E1..E6 rejected"
    );
    for i in 0..ids.len() - 1 {
        let mut t = ids;
        t.swap(i, i + 1);
        ensure!(
            !sales.accepts(&Trace::new(t)).unwrap(),
            "transposition {t:?} accepted"
        );
    }

    let h2s = Chronology::from_document(&case_doc("h2s")).map_err(|e| e.to_string())?;
    let one = h2s.enumerate(1, 1000).map_err(|e| e.to_string())?;
    ensure!(
        one.traces.len() == 2 && !one.truncated,
        "h2s max_loop=1 gives {} traces",
        one.traces.len()
    );

    // every trace with both E8 and E14 over the full alphabet, up to loop depth 3
    let mut checked = 0;
    let all = h2s.enumerate(3, 1000).map_err(|e| e.to_string())?;
    for t in &all.traces {
        ensure!(h2s.accepts(t).unwrap(), "enumerated {t} rejected");
        for extra in ["E8", "E14"] {
            for at in 0..=t.len() {
                let mut v = t.0.clone();
                v.insert(at, EventId::new(extra));
                let both =
                    v.iter().any(|e| e.as_str() == "E8") && v.iter().any(|e| e.as_str() == "E14");
                if both {
                    ensure!(
                        !h2s.accepts(&Trace(v)).unwrap(),
                        "trace with E8 and E14 accepted"
                    );
                    checked += 1;
                }
            }
        }
    }
    for case in CASES {
        let c = Chronology::from_document(&case_doc(case)).map_err(|e| e.to_string())?;
        for t in c.enumerate(2, 1000).map_err(|e| e.to_string())?.traces {
            ensure!(c.accepts(&t).unwrap(), "{case}: enumerated {t} rejected");
        }
    }
    Ok(format!(
        "5 transpositions rejected, 2 h2s traces, {checked} E8+E14 traces rejected"
    ))
}

fn round_trip() -> Outcome {
    for case in CASES {
        let doc = case_doc(case);
        let first = print_canonical(&doc);
        let again = parse(&first).map_err(|d| format!("{case}: {d:?}"))?;
        ensure!(again == doc, "{case}: reparse differs");
        ensure!(
            print_canonical(&again) == first,
            "{case}: second print differs"
        );
        ensure!(
            print_canonical(&case_doc(case)) == first,
            "{case}: print is not stable"
        );
        let golden =
            std::fs::read_to_string(corpus_root().join(case).join("expected/canonical.golden"))
                .map_err(|e| format!("{case}: {e}"))?;
        ensure!(golden == first, "{case}: canonical golden differs");
    }
    Ok("3 corpus files".into())
}

fn rendering() -> Outcome {
    let mut artifacts = 0;
    for case in CASES {
        let doc = case_doc(case);
        let s = doc.stats();
        for view in [View::Static, View::Dynamic, View::Chronology] {
            let dot =
                render(&doc, &RenderOptions::new(view, Format::Dot)).map_err(|e| e.to_string())?;
            let g = read_dot(&dot).map_err(|e| format!("{case} {view:?} dot: {e}"))?;
            let svg =
                render(&doc, &RenderOptions::new(view, Format::Svg)).map_err(|e| e.to_string())?;
            let x = scan_xml(&svg).map_err(|e| format!("{case} {view:?} svg: {e}"))?;
            artifacts += 2;
            if view == View::Static {
                ensure!(
                    g.clusters() == s.thimacs,
                    "{case}: {} clusters",
                    g.clusters()
                );
                ensure!(
                    g.nodes.len() == s.actions() + s.storages,
                    "{case}: {} dot nodes",
                    g.nodes.len()
                );
                ensure!(
                    g.dashed_edges() == s.triggers,
                    "{case}: {} dashed edges",
                    g.dashed_edges()
                );
                ensure!(
                    g.nodes_with("shape", "cylinder") == s.storages,
                    "{case}: cylinders"
                );
                ensure!(
                    x.count_with("path", "stroke-dasharray", "6,4") == s.triggers,
                    "{case}: dashed svg paths"
                );
                ensure!(
                    x.count_with("g", "class", "storage") == s.storages,
                    "{case}: svg storages"
                );
                ensure!(
                    x.count("ellipse") == 2 * s.storages,
                    "{case}: cylinder ellipses"
                );
            }
        }
    }
    Ok(format!("{artifacts} artifacts"))
}

fn narrative() -> Outcome {
    let h2s = narrate_chronology(&case_doc("h2s")).map_err(|e| e.to_string())?;
    let mut from = 0;
    for needle in [
        "Either:",
        "Repeating this for all residents in the list",
        "Or:",
    ] {
        let at = h2s[from..]
            .find(needle)
            .ok_or(format!("`{needle}` missing or out of order"))?;
        from += at + needle.len();
    }

    let sales = case_doc("sales");
    let text = narrate_chronology(&sales).map_err(|e| e.to_string())?;
    let mentioned: Vec<String> = text
        .split(" (")
        .skip(1)
        .filter_map(|s| s.split_once(')').map(|(id, _)| id.to_string()))
        .collect();
    let declared: Vec<String> = sales.events().iter().map(|e| e.id.to_string()).collect();
    ensure!(mentioned == declared, "sales narrative ids {mentioned:?}");

    for case in CASES {
        let doc = case_doc(case);
        let a = narrate_chronology(&doc).map_err(|e| e.to_string())?;
        ensure!(
            a == narrate_chronology(&doc).unwrap(),
            "{case}: narrative unstable"
        );
        let golden =
            std::fs::read_to_string(corpus_root().join(case).join("expected/narrative.golden"))
                .map_err(|e| format!("{case}: {e}"))?;
        ensure!(
            golden == format!("{a}\n"),
            "{case}: narrative golden differs"
        );
    }
    Ok("connectives in order, sales ids in order, goldens match".into())
}

fn coverage() -> Outcome {
    let text = case_source("h2s").ok_or("h2s source.txt missing")?;
    let none = coverage_report(&text, []);
    ensure!(
        none.percent_text() == "0.0",
        "no annotations: {}",
        none.percent_text()
    );
    let whole = Annotation {
        event: EventId::new("E1"),
        spans: vec![ByteRange::new(0, text.len())],
    };
    let full = coverage_report(&text, [&whole]);
    ensure!(
        full.percent_text() == "100.0",
        "full span: {}",
        full.percent_text()
    );

    let doc = case_doc("h2s");
    let report = document_coverage(&doc, &text);
    let anchor = "After completing all scheduled pickups, the driver drops off";
    let start = text.find(anchor).ok_or("anchor sentence not in source")?;
    let end = start
        + text[start..]
            .find('.')
            .ok_or("anchor sentence unterminated")?
        + 1;
    let spans: Vec<(usize, usize)> = doc
        .annotations()
        .iter()
        .flat_map(|a| a.spans.iter().map(|r| (r.start, r.end)))
        .collect();
    let mut bits = vec![false; text.len()];
    for &(s, e) in &spans {
        bits[s.min(text.len())..e.min(text.len())].fill(true);
    }
    ensure!(
        bits[start..end].iter().all(|b| *b),
        "anchor sentence not fully covered"
    );
    let marked = &report.marked_text;
    let before = &marked[..marked
        .find(&text[start..end])
        .ok_or("anchor split by markers")?];
    ensure!(
        before.rfind("<<") > before.rfind(">>"),
        "anchor not inside a marked run"
    );

    let raw: usize = spans.iter().map(|(s, e)| e - s).sum();
    let oracle = covered_bytes(text.len(), &spans);
    ensure!(
        report.covered_bytes == oracle,
        "covered {} vs bitmap {oracle}",
        report.covered_bytes
    );
    ensure!(raw > oracle, "corpus spans do not overlap; merge untested");
    let doubled: Vec<&Annotation> = doc
        .annotations()
        .into_iter()
        .chain(doc.annotations())
        .collect();
    ensure!(
        coverage_report(&text, doubled).covered_bytes == oracle,
        "duplicated spans counted twice"
    );
    Ok(format!(
        "h2s {}%, {oracle} of {raw} raw bytes after merge",
        report.percent_text()
    ))
}

fn robustness() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 400,
        failure_persistence: None,
        ..Config::default()
    });
    let seeds: Vec<String> = CASES.iter().map(|c| case_text(c)).collect();
    let strategy = (
        0..seeds.len(),
        proptest::sample::select(vec![0usize, 1, 7, 31]),
        proptest::prelude::any::<proptest::sample::Index>(),
        "\\PC{0,24}",
    );
    let result = runner.run(&strategy, |(case, cut, at, insert)| {
        let base = &seeds[case];
        let mut start = at.index(base.len() + 1);
        while !base.is_char_boundary(start) {
            start -= 1;
        }
        let mut end = (start + cut).min(base.len());
        while !base.is_char_boundary(end) {
            end += 1;
        }
        let src = format!("{}{}{}", &base[..start], insert, &base[end..]);
        for input in [src.as_str(), insert.as_str()] {
            check_bounds(input).map_err(proptest::test_runner::TestCaseError::fail)?;
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("800 inputs".into())
}

fn check_bounds(src: &str) -> Result<(), String> {
    let n = src.len();
    let inside = |s: tm_core::SourceSpan| s.byte_start <= s.byte_end && s.byte_end <= n;
    let diags = match parse(src) {
        Err(d) => d,
        Ok(doc) => check_document(&doc, Mode::Strict),
    };
    match diags.iter().find(|d| !inside(d.span)) {
        Some(d) => Err(format!("{d:?} outside 0..{n} for {src:?}")),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let criteria: [Criterion; 9] = [
        ("corpus validity", corpus_validity),
        ("simplification preserves reachability", simplification),
        ("adjacency exhaustiveness", adjacency),
        ("chronology semantics", chronology),
        ("round trip", round_trip),
        ("rendering structure", rendering),
        ("narrative", narrative),
        ("coverage", coverage),
        ("parser robustness", robustness),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed > BUDGET {
        failed += 1;
        println!(
            "FAIL time budget: {:.2}s exceeds {}s",
            elapsed.as_secs_f64(),
            BUDGET.as_secs()
        );
    } else {
        println!(
            "{} of 9 criteria passed in {:.2}s",
            9 - failed.min(9),
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
