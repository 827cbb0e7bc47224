#![allow(dead_code)]

use std::path::PathBuf;

use semiom_core::pack::{parse_pack, LocalePack};

pub fn fixture_dir(kind: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(kind)
}

/// `(file stem, raw text, parsed pack)` for every fixture of a kind, sorted.
pub fn fixtures(kind: &str) -> Vec<(String, String, LocalePack)> {
    let mut paths: Vec<_> = std::fs::read_dir(fixture_dir(kind))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let pack = parse_pack(text.as_bytes()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p.file_stem().unwrap().to_string_lossy().into_owned(), text, pack)
        })
        .collect()
}
