//! The packs that ship with the engine.

use std::sync::{Arc, OnceLock};

use crate::pack::{parse_pack, LocalePack};

/// `(file name, source)` of every bundled pack.
pub const SOURCES: [(&str, &str); 3] = [
    ("office.json", include_str!("../packs/office.json")),
    ("warehouse.json", include_str!("../packs/warehouse.json")),
    ("paper-tray.json", include_str!("../packs/paper-tray.json")),
];

fn all() -> &'static [Arc<LocalePack>] {
    static PACKS: OnceLock<Vec<Arc<LocalePack>>> = OnceLock::new();
    PACKS.get_or_init(|| {
        SOURCES
            .iter()
            .map(|(name, text)| Arc::new(parse_pack(text.as_bytes()).unwrap_or_else(|e| panic!("bundled {name}: {e}"))))
            .collect()
    })
}

/// Every bundled pack, in a fixed order.
pub fn packs() -> Vec<Arc<LocalePack>> {
    all().to_vec()
}

/// The bundled pack whose `meta.id` is `id`.
pub fn by_id(id: &str) -> Option<Arc<LocalePack>> {
    all().iter().find(|p| p.meta.id == id).cloned()
}

pub fn office() -> Arc<LocalePack> {
    by_id("office").expect("office is bundled")
}

pub fn warehouse() -> Arc<LocalePack> {
    by_id("warehouse").expect("warehouse is bundled")
}

pub fn paper_tray() -> Arc<LocalePack> {
    by_id("paper-tray").expect("paper-tray is bundled")
}
