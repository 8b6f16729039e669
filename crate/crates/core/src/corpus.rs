//! Golden corpus cases.
//!
//! A case is a directory holding `model.tm`, optionally the domain text named
//! by its `source` declaration, and `expected/<output>.golden` files. Goldens
//! are only rewritten by [`update_case`].

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::dsl::{parse, print_canonical};
use crate::dynamics::Chronology;
use crate::narrate::{document_coverage, narrate_chronology};
use crate::transform::simplify_level1;
use crate::validate::{check_document, Mode};

pub const MODEL_FILE: &str = "model.tm";
pub const EXPECTED_DIR: &str = "expected";
/// Loop unrolling used for the `traces` golden.
pub const TRACE_MAX_LOOP: usize = 2;
pub const TRACE_MAX_TRACES: usize = 1000;

/// Computes every golden output of a case from the model text and the loaded
/// domain text, if the model names one.
pub fn case_outputs(
    model: &str,
    source_text: Option<&str>,
) -> Result<BTreeMap<&'static str, String>, String> {
    let doc = parse(model).map_err(|diags| {
        diags
            .iter()
            .map(|d| d.render(MODEL_FILE))
            .collect::<Vec<_>>()
            .join("\n")
    })?;
    let mut out = BTreeMap::new();
    out.insert("canonical", print_canonical(&doc));
    out.insert("stats", format!("{}\n", doc.stats()));

    let mut check = String::new();
    for d in check_document(&doc, Mode::Strict) {
        check.push_str(&d.render(MODEL_FILE));
        check.push('\n');
    }
    out.insert("check", check);

    let (simple, _) = simplify_level1(&doc).map_err(|e| format!("simplify: {e}"))?;
    out.insert("simplified", print_canonical(&simple));

    if doc.chronology().is_some() {
        let chrono = Chronology::from_document(&doc).map_err(|e| format!("chronology: {e}"))?;
        let found = chrono
            .enumerate(TRACE_MAX_LOOP, TRACE_MAX_TRACES)
            .map_err(|e| format!("enumerate: {e}"))?;
        let mut traces = String::new();
        for t in &found.traces {
            traces.push_str(&t.to_string());
            traces.push('\n');
        }
        if found.truncated {
            traces.push_str("...\n");
        }
        out.insert("traces", traces);
        let narrative = narrate_chronology(&doc).map_err(|e| format!("narrate: {e}"))?;
        out.insert("narrative", format!("{narrative}\n"));
    }

    if let Some(text) = source_text {
        out.insert("coverage", document_coverage(&doc, text).to_string());
    }
    Ok(out)
}

/// Outcome of one case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseReport {
    pub name: String,
    pub failures: Vec<String>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Case directories under `root`, sorted by name.
pub fn list_cases(root: &Path) -> io::Result<Vec<PathBuf>> {
    let mut cases: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join(MODEL_FILE).is_file())
        .collect();
    cases.sort();
    Ok(cases)
}

fn load(dir: &Path) -> Result<(String, Option<String>), String> {
    let model_path = dir.join(MODEL_FILE);
    let model = fs::read_to_string(&model_path)
        .map_err(|e| format!("cannot read {}: {e}", model_path.display()))?;
    let source = match parse(&model)
        .ok()
        .and_then(|d| d.source().map(str::to_string))
    {
        Some(rel) => {
            let p = dir.join(&rel);
            Some(fs::read_to_string(&p).map_err(|e| format!("cannot read {}: {e}", p.display()))?)
        }
        None => None,
    };
    Ok((model, source))
}

fn case_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

/// Recomputes a case and compares it with its goldens.
pub fn verify_case(dir: &Path) -> CaseReport {
    let name = case_name(dir);
    let mut failures = Vec::new();
    match load(dir).and_then(|(m, s)| case_outputs(&m, s.as_deref()).map(|o| (m, o))) {
        Err(e) => failures.push(e),
        Ok((model, outputs)) => {
            if !outputs["check"].is_empty() {
                failures.push(format!("strict check reports:\n{}", outputs["check"]));
            }
            let canonical = &outputs["canonical"];
            match parse(canonical) {
                Ok(again) if print_canonical(&again) == *canonical => {}
                _ => failures.push("canonical print does not reparse to itself".into()),
            }
            if parse(canonical).ok() != parse(&model).ok() {
                failures.push("canonical print changes the document".into());
            }
            let expected = dir.join(EXPECTED_DIR);
            for (key, actual) in &outputs {
                let path = expected.join(format!("{key}.golden"));
                match fs::read_to_string(&path) {
                    Ok(want) if want == *actual => {}
                    Ok(_) => failures.push(format!("{key}.golden differs")),
                    Err(_) => failures.push(format!("{key}.golden is missing")),
                }
            }
            if let Ok(entries) = fs::read_dir(&expected) {
                let mut extra: Vec<String> = entries
                    .filter_map(Result::ok)
                    .filter_map(|e| {
                        let f = e.file_name().to_string_lossy().into_owned();
                        let key = f.strip_suffix(".golden")?.to_string();
                        (!outputs.contains_key(key.as_str())).then_some(f)
                    })
                    .collect();
                extra.sort();
                for f in extra {
                    failures.push(format!("{f} has no corresponding output"));
                }
            }
        }
    }
    CaseReport { name, failures }
}

/// Verifies every case under `root`.
pub fn corpus_verify(root: &Path) -> io::Result<Vec<CaseReport>> {
    Ok(list_cases(root)?.iter().map(|d| verify_case(d)).collect())
}

/// Rewrites the goldens of one case from its current outputs.
pub fn update_case(dir: &Path) -> Result<(), String> {
    let (model, source) = load(dir)?;
    let outputs = case_outputs(&model, source.as_deref())?;
    let expected = dir.join(EXPECTED_DIR);
    fs::create_dir_all(&expected).map_err(|e| e.to_string())?;
    for (key, text) in outputs {
        fs::write(expected.join(format!("{key}.golden")), text).map_err(|e| e.to_string())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = r#"model "m" {
  thimac A {
    action c: create
    action p: process
  }
  flow A.c -> A.p
  event E1 "Start" covers { A.c }
  chronology { E1 }
}
"#;

    #[test]
    fn outputs_and_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        fs::write(dir.join(MODEL_FILE), MODEL).unwrap();
        let report = verify_case(dir);
        assert!(
            report.failures.iter().all(|f| f.ends_with("is missing")),
            "{report:?}"
        );
        update_case(dir).unwrap();
        assert!(verify_case(dir).passed());
        fs::write(dir.join(EXPECTED_DIR).join("narrative.golden"), "changed\n").unwrap();
        assert_eq!(
            verify_case(dir).failures,
            vec!["narrative.golden differs".to_string()]
        );
    }
}
