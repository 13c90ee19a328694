//! Loading and running the RMLTC conformance corpus.

#![allow(dead_code)]

pub mod cartesian;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use kgc_core::construct::{ConstructError, ConstructOptions};
use kgc_core::dataset::Quad;
use kgc_core::isomorphism::{dataset_quads, isomorphic, parse_nquads};
use kgc_core::rml::parse_turtle;
use kgc_core::{construct, Diagnostics};

pub const BASE: &str = "http://example.com/base/";

pub fn corpus_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/rmltc")
}

#[derive(Debug, Clone)]
pub struct Case {
    pub id: String,
    pub dir: PathBuf,
    pub expect_error: bool,
}

impl Case {
    pub fn mapping(&self) -> Vec<u8> {
        fs::read(self.dir.join("mapping.ttl")).unwrap_or_else(|e| panic!("{}: {e}", self.id))
    }

    pub fn mapping_text(&self) -> String {
        String::from_utf8(self.mapping()).expect("mappings are UTF-8")
    }

    pub fn expected(&self) -> BTreeSet<Quad> {
        let bytes = fs::read(self.dir.join("output.nq")).unwrap_or_else(|e| panic!("{}: {e}", self.id));
        parse_nquads(&bytes).unwrap_or_else(|e| panic!("{}: expected output: {e}", self.id))
    }

    pub fn has_join(&self) -> bool {
        self.mapping_text().contains("rr:joinCondition")
    }

    pub fn has_graph_map(&self) -> bool {
        let m = self.mapping_text();
        m.contains("rr:graph ") || m.contains("rr:graphMap")
    }

    pub fn run(&self, optimize: bool) -> Result<BTreeSet<Quad>, ConstructError> {
        let mut options = ConstructOptions::new(&self.dir);
        options.base = BASE.to_owned();
        options.optimize = optimize;
        let dataset = construct(&self.mapping(), &options, &Diagnostics::new())?;
        Ok(dataset_quads(&dataset))
    }

    /// Runs the case and compares with the expected output or error.
    pub fn check(&self) -> Result<(), String> {
        match (self.run(false), self.expect_error) {
            (Err(_), true) => Ok(()),
            (Ok(quads), true) => Err(format!("expected an error, got {} quads", quads.len())),
            (Err(e), false) => Err(format!("failed: {e}")),
            (Ok(quads), false) => {
                let expected = self.expected();
                if isomorphic(&quads, &expected) {
                    Ok(())
                } else {
                    Err(format!(
                        "output not isomorphic to expected\n--- got\n{}--- expected\n{}",
                        lines(&quads),
                        lines(&expected)
                    ))
                }
            }
        }
    }
}

fn lines(quads: &BTreeSet<Quad>) -> String {
    quads.iter().map(|q| q.to_nquads_line() + "\n").collect()
}

pub fn all_cases() -> Vec<Case> {
    let mut cases: Vec<Case> = fs::read_dir(corpus_root())
        .expect("corpus directory")
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .map(|e| {
            let dir = e.path();
            Case {
                id: e.file_name().to_string_lossy().into_owned(),
                expect_error: dir.join("expect-error").exists(),
                dir,
            }
        })
        .collect();
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    cases
}

/// Entries of the skip manifest: a case id, or `*-SUFFIX` for a whole
/// family, with the reason it is not run.
pub fn skip_manifest() -> Vec<(String, String)> {
    let text = fs::read_to_string(corpus_root().join("skip.tsv")).expect("skip manifest");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (id, reason) = l.split_once('\t').unwrap_or_else(|| panic!("skip entry without reason: {l}"));
            (id.trim().to_owned(), reason.trim().to_owned())
        })
        .collect()
}

pub fn skip_reason(id: &str, manifest: &[(String, String)]) -> Option<String> {
    manifest.iter().find_map(|(pattern, reason)| {
        let hit = match pattern.strip_prefix('*') {
            Some(suffix) => id.ends_with(suffix),
            None => pattern == id,
        };
        hit.then(|| reason.clone())
    })
}

/// The cases that are run for conformance.
pub fn selected_cases() -> Vec<Case> {
    let manifest = skip_manifest();
    all_cases()
        .into_iter()
        .filter(|c| skip_reason(&c.id, &manifest).is_none())
        .collect()
}

/// Every mapping in the corpus that is expected to run, skipped ones
/// included, plus a few extra mappings exercising shapes the conformance
/// cases do not cover.
pub fn corpus_mappings() -> Vec<(String, PathBuf, Vec<u8>)> {
    let mut out: Vec<(String, PathBuf, Vec<u8>)> = all_cases()
        .into_iter()
        .filter(|c| !c.expect_error)
        .map(|c| (c.id.clone(), c.dir.clone(), c.mapping()))
        .collect();
    let extra = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/mappings");
    let mut entries: Vec<_> = fs::read_dir(&extra)
        .expect("extra mappings directory")
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "ttl"))
        .collect();
    entries.sort();
    for p in entries {
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        out.push((name, extra.clone(), fs::read(&p).unwrap()));
    }
    out
}

pub fn parse_mapping(bytes: &[u8]) -> kgc_core::rml::Graph {
    parse_turtle(bytes, BASE).expect("corpus mapping parses")
}
