use std::collections::BTreeSet;
use std::sync::{Arc, Barrier};

use reqwest::blocking::Client;
use semiom_core::bundled;
use semiom_core::conversation::keys;
use semiom_service::{Background, Registry, Store};
use serde_json::{json, Value};

fn server() -> Background {
    Background::start(Arc::new(Store::new(Registry::bundled()))).unwrap()
}

struct Reply {
    status: u16,
    body: Value,
    bytes: Vec<u8>,
}

fn send(req: reqwest::blocking::RequestBuilder) -> Reply {
    let resp = req.send().unwrap();
    let status = resp.status().as_u16();
    let bytes = resp.bytes().unwrap().to_vec();
    let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    Reply { status, body, bytes }
}

fn create(c: &Client, s: &Background, pack: &str) -> String {
    let r = send(c.post(s.url("/sessions")).json(&json!({ "pack_id": pack })));
    assert_eq!(r.status, 201, "{}", r.body);
    r.body["session_id"].as_str().unwrap().to_owned()
}

fn post(c: &Client, s: &Background, id: &str, mv: Value, rev: u64) -> Reply {
    send(c.post(s.url(&format!("/sessions/{id}/moves"))).json(&json!({ "move": mv, "expected_revision": rev })))
}

fn get(c: &Client, s: &Background, path: &str) -> Reply {
    send(c.get(s.url(path)))
}

fn assert_error(r: &Reply, status: u16, code: &str) {
    assert_eq!(r.status, status, "{}", r.body);
    assert_eq!(r.body["code"], code);
    let key = r.body["message_key"].as_str().unwrap();
    assert!(keys::ERRORS.contains(&key), "{key}");
}

#[test]
fn lists_the_bundled_packs() {
    let s = server();
    let r = get(&Client::new(), &s, "/packs");
    assert_eq!(r.status, 200);
    let ids: Vec<&str> = r.body.as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["office", "paper-tray", "warehouse"]);
    assert_eq!(r.body[1]["manifests"][0]["direction"], "rtl");
}

#[test]
fn sessions_start_at_revision_zero() {
    let s = server();
    let c = Client::new();
    let a = send(c.post(s.url("/sessions")).json(&json!({ "pack_id": "office" })));
    assert_eq!((a.status, a.body["revision"].as_u64()), (201, Some(0)));
    let b = create(&c, &s, "office");
    assert_ne!(a.body["session_id"].as_str().unwrap(), b);
    assert_error(&send(c.post(s.url("/sessions")).json(&json!({ "pack_id": "atlas" }))), 404, "unknown_pack");
    assert_error(&get(&c, &s, "/sessions/nope/moves"), 404, "unknown_session");
    assert_error(&get(&c, &s, "/nowhere"), 404, "unknown_route");
    let bad = send(c.post(s.url("/sessions")).header("content-type", "application/json").body("{\"pack\": 1}"));
    assert_error(&bad, 400, "bad_request");
}

#[test]
fn moves_advance_the_revision() {
    let s = server();
    let c = Client::new();
    let id = create(&c, &s, "office");
    let r = post(&c, &s, &id, json!({ "kind": "summon" }), 0);
    assert_eq!(r.status, 200);
    assert_eq!(r.body["revision"], 1);
    assert_eq!(r.body["system_moves"], json!([{ "seq": 1, "actor": "system", "kind": "offer" }]));

    let before = get(&c, &s, &format!("/sessions/{id}/moves")).bytes;
    let stale = post(&c, &s, &id, json!({ "kind": "state_need", "args": { "need": "new-folder" } }), 0);
    assert_error(&stale, 409, "revision_conflict");
    assert_eq!(stale.body["revision"], 1);
    let illegal = post(&c, &s, &id, json!({ "kind": "summon" }), 1);
    assert_error(&illegal, 422, "illegal_move");
    let forged = post(&c, &s, &id, json!({ "actor": "system", "kind": "offer" }), 1);
    assert_error(&forged, 422, "illegal_move");
    let garbled = post(&c, &s, &id, json!({ "kind": "dance" }), 1);
    assert_error(&garbled, 400, "bad_request");
    assert_eq!(get(&c, &s, &format!("/sessions/{id}/moves")).bytes, before);

    let view = get(&c, &s, &format!("/sessions/{id}/moves")).body;
    assert_eq!(view["phase"], "offer_made");
    assert_eq!(view["transcript"].as_array().unwrap().len(), 2);
    let needs: Vec<&str> = view["legal"].as_array().unwrap().iter().map(|t| t["args"]["need"].as_str().unwrap()).collect();
    assert!(needs.contains(&"new-document"));
}

#[test]
fn a_sheet_taken_over_http_shows_up_in_the_render() {
    let s = server();
    let c = Client::new();
    let id = create(&c, &s, "paper-tray");
    post(&c, &s, &id, json!({ "kind": "summon" }), 0);
    post(&c, &s, &id, json!({ "kind": "state_need", "args": { "need": "take-a-sheet" } }), 1);
    let r = post(&c, &s, &id, json!({ "kind": "provide_detail", "args": { "bindings": { "name": { "name": "draft" } } } }), 2);
    assert_eq!(r.body["system_moves"][0]["kind"], "resolve");
    assert_eq!(r.body["system_moves"][0]["args"]["outcome"], "ok");
    let tree = get(&c, &s, &format!("/sessions/{id}/render")).body;
    assert_eq!(tree["revision"], 3);
    let rows = tree["tree"]["regions"].as_array().unwrap().iter().find(|r| r["role"] == "workspace").unwrap();
    assert_eq!(rows["children"][0]["name"], "draft");
    assert_eq!(rows["children"][0]["kind"], "row");
}

fn action_ids(tree: &Value) -> BTreeSet<String> {
    let region = tree["tree"]["regions"].as_array().unwrap().iter().find(|r| r["role"] == "actions").unwrap();
    region["children"].as_array().unwrap().iter().map(|a| a["action"].as_str().unwrap().to_owned()).collect()
}

#[test]
fn renders_are_stable_and_manifest_independent() {
    let s = server();
    let c = Client::new();
    let id = create(&c, &s, "office");
    post(&c, &s, &id, json!({ "kind": "summon" }), 0);
    let path = format!("/sessions/{id}/render?manifest=office-chat");
    let first = get(&c, &s, &path);
    assert_eq!(first.status, 200);
    assert_eq!(first.bytes, get(&c, &s, &path).bytes);
    let toolbar = get(&c, &s, &format!("/sessions/{id}/render?manifest=office-toolbar"));
    assert_eq!(action_ids(&first.body), action_ids(&toolbar.body));
    assert_ne!(first.bytes, toolbar.bytes);

    assert_error(&get(&c, &s, &format!("/sessions/{id}/render?manifest=warehouse-menu")), 404, "unknown_manifest");
    assert_error(&get(&c, &s, &format!("/sessions/{id}/render?focus=42")), 404, "unknown_node");
    assert_error(&get(&c, &s, &format!("/sessions/{id}/render?focus=root")), 400, "bad_request");
}

#[test]
fn concurrent_posts_at_one_revision_have_one_winner() {
    let s = server();
    let id = create(&Client::new(), &s, "office");
    let racers = 16;
    let barrier = Barrier::new(racers);
    let statuses: Vec<u16> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..racers)
            .map(|_| {
                scope.spawn(|| {
                    let c = Client::new();
                    barrier.wait();
                    post(&c, &s, &id, json!({ "kind": "summon" }), 0).status
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(statuses.iter().filter(|&&s| s == 200).count(), 1, "{statuses:?}");
    assert_eq!(statuses.iter().filter(|&&s| s == 409).count(), racers - 1);
    let view = get(&Client::new(), &s, &format!("/sessions/{id}/moves")).body;
    assert_eq!((view["revision"].as_u64(), view["transcript"].as_array().unwrap().len()), (Some(1), 2));
}

#[test]
fn accepted_moves_are_totally_ordered_by_revision() {
    let s = server();
    let id = create(&Client::new(), &s, "office");
    post(&Client::new(), &s, &id, json!({ "kind": "summon" }), 0);
    let workers = 6;
    let accepted: Vec<Vec<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (s, id) = (&s, &id);
                scope.spawn(move || {
                    let c = Client::new();
                    let mut mine = Vec::new();
                    for attempt in 0..25 {
                        let view = get(&c, s, &format!("/sessions/{id}/moves")).body;
                        let rev = view["revision"].as_u64().unwrap();
                        let mv = match view["phase"].as_str().unwrap() {
                            "offer_made" | "resolved" => json!({ "kind": "state_need", "args": { "need": "new-folder" } }),
                            "capability_confirmed" => json!({
                                "kind": "provide_detail",
                                "args": { "bindings": { "name": { "name": format!("w{w}-{attempt}") } } }
                            }),
                            other => panic!("unexpected phase {other}"),
                        };
                        let r = post(&c, s, id, mv, rev);
                        match r.status {
                            200 => {
                                assert_eq!(r.body["revision"].as_u64(), Some(rev + 1));
                                mine.push(rev + 1);
                            }
                            409 => {}
                            other => panic!("{other}: {}", r.body),
                        }
                    }
                    mine
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut all: Vec<u64> = accepted.into_iter().flatten().collect();
    all.sort();
    let final_view = get(&Client::new(), &s, &format!("/sessions/{id}/moves")).body;
    let last = final_view["revision"].as_u64().unwrap();
    assert_eq!(all, (2..=last).collect::<Vec<_>>());
    // Each accepted user move is followed by exactly one system reply.
    let transcript = final_view["transcript"].as_array().unwrap();
    assert_eq!(transcript.len() as u64, 2 * last);
    for (i, record) in transcript.iter().enumerate() {
        assert_eq!(record["seq"].as_u64(), Some(i as u64));
        assert_eq!(record["actor"], if i % 2 == 0 { "user" } else { "system" });
    }
}

#[test]
fn swapping_packs_keeps_the_workspace() {
    let s = server();
    let c = Client::new();
    let id = create(&c, &s, "office");
    post(&c, &s, &id, json!({ "kind": "summon" }), 0);
    post(&c, &s, &id, json!({ "kind": "state_need", "args": { "need": "new-folder" } }), 1);
    post(&c, &s, &id, json!({ "kind": "provide_detail", "args": { "bindings": { "name": { "name": "plans" } } } }), 2);
    let ws_path = format!("/sessions/{id}/workspace");
    let before = get(&c, &s, &ws_path);
    let labels_before = get(&c, &s, &format!("/sessions/{id}/render")).body;

    let swapped = send(c.put(s.url(&format!("/sessions/{id}/pack"))).json(&json!({ "pack_id": "warehouse" })));
    assert_eq!(swapped.status, 200);
    assert_eq!((swapped.body["revision"].as_u64(), swapped.body["pack_id"].as_str()), (Some(4), Some("warehouse")));
    let after = get(&c, &s, &ws_path);
    assert_eq!(before.body["workspace"].to_string(), after.body["workspace"].to_string());
    let view = get(&c, &s, &format!("/sessions/{id}/moves")).body;
    assert_eq!(view["transcript"].as_array().unwrap().len(), 6);
    let render = get(&c, &s, &format!("/sessions/{id}/render")).body;
    assert_eq!(render["tree"]["manifest"], "warehouse-menu");
    assert_ne!(action_ids(&render), action_ids(&labels_before));
    let rows = |t: &Value| t["tree"]["regions"][1]["children"].clone();
    assert_eq!(rows(&render)[0]["node"], rows(&labels_before)[0]["node"]);
    assert_eq!(rows(&render)[0]["glyph"], "box");

    let r = post(&c, &s, &id, json!({ "kind": "state_need", "args": { "need": "new-box" } }), 4);
    assert_eq!(r.body["system_moves"][0]["kind"], "confirm_capability");

    let same = send(c.put(s.url(&format!("/sessions/{id}/pack"))).json(&json!({ "pack_id": "warehouse" })));
    assert_eq!(same.body["revision"], 6);
    assert_eq!(get(&c, &s, &ws_path).body["workspace"], after.body["workspace"]);
    let unknown = send(c.put(s.url(&format!("/sessions/{id}/pack"))).json(&json!({ "pack_id": "atlas" })));
    assert_error(&unknown, 404, "unknown_pack");
}

#[test]
fn swapping_to_an_anchor_without_words_is_refused() {
    let s = server();
    let c = Client::new();
    let ws = json!({
        "root": 0, "next_id": 3,
        "nodes": [
            { "id": 0, "name": "root", "kind": "container", "children": [1, 2] },
            { "id": 1, "name": "notes", "kind": "text", "content": "" },
            { "id": 2, "name": "to notes", "kind": "link", "target": 1 }
        ]
    });
    let r = send(c.post(s.url("/sessions")).json(&json!({ "pack_id": "office", "workspace": ws })));
    let id = r.body["session_id"].as_str().unwrap().to_owned();
    let refused = send(c.put(s.url(&format!("/sessions/{id}/pack"))).json(&json!({ "pack_id": "paper-tray" })));
    assert_error(&refused, 422, "incompatible_anchor");
    assert!(refused.body["message"].as_str().unwrap().contains("link"));
    assert_eq!(get(&c, &s, &format!("/sessions/{id}")).body["revision"], 0);
    assert_eq!(get(&c, &s, &format!("/sessions/{id}/workspace")).body["workspace"], ws);
}

#[test]
fn error_keys_are_translated_by_every_bundled_pack() {
    for pack in bundled::packs() {
        let catalog = &pack.catalogs[0];
        for key in keys::ERRORS {
            assert!(catalog.entries.contains_key(key), "{}: {key}", pack.meta.id);
        }
    }
}
