mod common;

use std::collections::{BTreeMap, BTreeSet};

use semiom_core::bundled;
use semiom_core::manifest::resolve_message;
use semiom_core::pack::{parse_pack, serialize_pack, Code};
use serde_json::Value;

#[test]
fn bundled_files_are_canonical_and_valid() {
    for (name, text) in bundled::SOURCES {
        let pack = parse_pack(text.as_bytes()).unwrap();
        assert_eq!(serialize_pack(&pack), text, "{name} is not in canonical form");
        let report = pack.validate();
        assert!(!report.has_errors(), "{name}: {:?}", report.findings);
    }
}

#[test]
fn double_round_trip_is_a_fixpoint() {
    for (name, text) in bundled::SOURCES {
        // Normalize through an unsorted, compact rendering first.
        let value: Value = serde_json::from_str(text).unwrap();
        let compact = serde_json::to_string(&value).unwrap();
        let once = serialize_pack(&parse_pack(compact.as_bytes()).unwrap());
        let twice = serialize_pack(&parse_pack(once.as_bytes()).unwrap());
        assert_eq!(once, twice, "{name}");
        assert_eq!(parse_pack(once.as_bytes()).unwrap(), parse_pack(text.as_bytes()).unwrap());
    }
}

#[test]
fn serialization_is_deterministic() {
    let pack = bundled::warehouse();
    let a = serialize_pack(&pack);
    let b = serialize_pack(&pack.as_ref().clone());
    assert_eq!(a, b);
}

#[test]
fn each_fault_fixture_flags_exactly_its_class() {
    let faults = common::fixtures("faults");
    assert!(faults.len() >= 7);
    let mut covered = BTreeSet::new();
    for (name, _, pack) in faults {
        let report = pack.validate();
        let expected = match &name[..2] {
            "e1" => Code::E1,
            "e2" => Code::E2,
            "e3" => Code::E3,
            "e4" => Code::E4,
            "e5" => Code::E5,
            "e6" => Code::E6,
            "w1" => {
                assert!(!report.has_errors(), "{name}: {:?}", report.findings);
                continue;
            }
            other => panic!("unexpected fixture prefix {other}"),
        };
        assert_eq!(report.error_codes(), BTreeSet::from([expected]), "{name}: {:?}", report.findings);
        covered.insert(expected);
    }
    assert_eq!(covered, BTreeSet::from([Code::E1, Code::E2, Code::E3, Code::E4, Code::E5, Code::E6]));
}

#[test]
fn missing_label_is_a_single_e3_naming_the_key() {
    let mut pack = bundled::office().as_ref().clone();
    pack.catalogs[0].entries.remove("action.save");
    let report = pack.validate();
    let errors: Vec<_> = report.errors().collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].code, Code::E3);
    assert!(errors[0].message.contains("action.save"));
}

/// Op names appearing in action programs, read straight from the JSON.
fn reachable_ops(text: &str) -> BTreeSet<String> {
    let doc: Value = serde_json::from_str(text).unwrap();
    doc["anchor"]["actions"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|a| a["program"].as_array().unwrap().iter().map(|s| s["op"].as_str().unwrap().to_owned()))
        .collect()
}

const ALL_OPS: [&str; 9] = [
    "create_artifact",
    "make_container",
    "write_content",
    "read_content",
    "move_node",
    "dissolve_container",
    "delete_node",
    "make_link",
    "list_children",
];

#[test]
fn w1_matches_a_reachability_oracle() {
    let mut sources: Vec<(String, String)> =
        bundled::SOURCES.iter().map(|(n, t)| ((*n).to_owned(), (*t).to_owned())).collect();
    sources.extend(common::fixtures("faults").into_iter().map(|(n, t, _)| (n, t)));
    for (name, text) in sources {
        let reachable = reachable_ops(&text);
        let expected: BTreeSet<&str> = ALL_OPS.into_iter().filter(|op| !reachable.contains(*op)).collect();
        let pack = parse_pack(text.as_bytes()).unwrap();
        let flagged: BTreeSet<&str> = pack
            .validate()
            .warnings()
            .filter(|f| f.code == Code::W1)
            .map(|f| ALL_OPS.into_iter().find(|op| f.message.contains(&format!("`{op}`"))).unwrap())
            .collect();
        assert_eq!(flagged, expected, "{name}");
    }
    let (_, text, pack) = common::fixtures("faults").into_iter().find(|(n, ..)| n == "w1-no-make-link").unwrap();
    assert!(!reachable_ops(&text).contains("make_link"));
    assert!(pack.validate().warnings().any(|f| f.message.contains("`make_link`")));
}

/// Placeholder names, found by a plain scan for `{word}`.
fn scan_placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}').unwrap() + open;
        out.push(rest[open + 1..close].to_owned());
        rest = &rest[close + 1..];
    }
    out
}

#[test]
fn every_bundled_message_resolves() {
    for pack in bundled::packs() {
        for catalog in &pack.catalogs {
            for (key, variants) in &catalog.entries {
                for (level, template) in variants {
                    let args: BTreeMap<String, String> =
                        scan_placeholders(template).into_iter().map(|p| (p.clone(), format!("<{p}>"))).collect();
                    let text = resolve_message(catalog, key, level, &args).unwrap();
                    assert!(!text.contains('{') && !text.contains('}'), "{key}/{level}: {text}");
                    for value in args.values() {
                        assert!(text.contains(value.as_str()));
                    }
                }
            }
        }
    }
}

#[test]
fn bundled_packs_translate_every_wire_error() {
    for pack in bundled::packs() {
        for catalog in &pack.catalogs {
            for key in semiom_core::conversation::keys::ERRORS {
                assert!(catalog.entries.contains_key(key), "{} lacks {key}", pack.meta.id);
            }
        }
    }
}

#[test]
fn wire_error_entries_take_no_placeholders() {
    let text = bundled::SOURCES[0].1.replacen("\"No such pack.\"", "\"No pack {name}.\"", 2);
    let report = parse_pack(text.as_bytes()).unwrap().validate();
    assert_eq!(report.error_codes(), [Code::E5].into());
}
