use std::collections::{BTreeMap, BTreeSet};

use semiom_core::algebra::{NodeId, Value};
use semiom_core::anchor::{canonical_bindings, enumerate_workspaces, instantiate, DEFAULT_STATE_CAP};
use semiom_core::bundled;

#[test]
fn instantiated_programs_touch_only_focus_parent_and_bound_nodes() {
    let states = enumerate_workspaces(3, DEFAULT_STATE_CAP).unwrap();
    let mut programs = 0;
    for pack in bundled::packs() {
        for ws in &states {
            for node in ws.nodes() {
                for action in pack.anchor.enabled_actions(ws, node.id).unwrap() {
                    for binding in canonical_bindings(action, ws, 16) {
                        let Ok(program) = instantiate(action, &binding, ws, node.id) else { continue };
                        let mut allowed: BTreeSet<NodeId> = BTreeSet::from([node.id]);
                        allowed.extend(ws.parent_of(node.id).unwrap());
                        allowed.extend(binding.values().filter_map(|v| match v {
                            Value::Node(id) => Some(*id),
                            _ => None,
                        }));
                        assert!(program.node_literals().is_subset(&allowed), "{} at {}", action.id, node.id);
                        programs += 1;
                    }
                }
            }
        }
    }
    assert!(programs > 1000);
}

#[test]
fn enabled_actions_depend_only_on_category_and_root_flag() {
    let states = enumerate_workspaces(4, DEFAULT_STATE_CAP).unwrap();
    for pack in bundled::packs() {
        let mut seen: BTreeMap<(String, bool), Vec<String>> = BTreeMap::new();
        for ws in &states {
            for node in ws.nodes() {
                let key = (node.category().to_string(), node.id == ws.root());
                let ids: Vec<String> =
                    pack.anchor.enabled_actions(ws, node.id).unwrap().into_iter().map(|a| a.id.clone()).collect();
                let first = seen.entry(key).or_insert_with(|| ids.clone());
                assert_eq!(*first, ids);
            }
        }
        assert!(seen.len() >= 6);
    }
}

#[test]
fn spec_level_applicability_examples() {
    let office = bundled::office();
    let ws = semiom_core::algebra::Workspace::new();
    let ids: Vec<&str> = office.anchor.enabled_actions(&ws, ws.root()).unwrap().iter().map(|a| a.id.as_str()).collect();
    assert!(ids.contains(&"new-document") && !ids.contains(&"open"));

    let warehouse = bundled::warehouse();
    let (ws, b) = ws.make_container(ws.root(), "B").unwrap();
    let ids: Vec<&str> = warehouse.anchor.enabled_actions(&ws, b).unwrap().iter().map(|a| a.id.as_str()).collect();
    assert!(ids.contains(&"break-box"));
    let action = warehouse.anchor.action("break-box").unwrap();
    let program = instantiate(action, &Default::default(), &ws, b).unwrap();
    assert_eq!(program.to_string(), format!("[dissolve_container(id={b})]"));

    let tray = bundled::paper_tray();
    let action = tray.anchor.action("take-a-sheet").unwrap();
    let binding = BTreeMap::from([("name".to_owned(), Value::Name("draft".into()))]);
    let program = instantiate(action, &binding, &ws, ws.root()).unwrap();
    assert_eq!(program.to_string(), "[create_artifact(parent=#0, kind=text, name=\"draft\")]");
}
