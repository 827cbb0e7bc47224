//! Text projection of render trees.

use std::fmt::Write;

use semiom_core::manifest::{RegionRole, RenderNode, RenderTree, Side};

fn role_name(role: RegionRole) -> &'static str {
    match role {
        RegionRole::Actions => "actions",
        RegionRole::Workspace => "workspace",
        RegionRole::Dialogue => "dialogue",
    }
}

fn node(out: &mut String, n: &RenderNode, depth: usize) {
    let pad = "  ".repeat(depth);
    match n {
        RenderNode::Region { role, children, .. } => {
            let _ = writeln!(out, "{pad}{}", role_name(*role));
            for c in children {
                node(out, c, depth + 1);
            }
        }
        RenderNode::Action { action, glyph, label } => {
            let glyph = glyph.as_deref().unwrap_or("-");
            let _ = writeln!(out, "{pad}[{glyph}] {label} ({action})");
        }
        RenderNode::Message { text, speaker, side } => {
            let side = match side {
                Some(Side::Start) => " <",
                Some(Side::End) => " >",
                None => "",
            };
            let _ = writeln!(out, "{pad}{speaker}{side}: {text}");
        }
        RenderNode::Row { node: id, name, glyph } => {
            let glyph = glyph.as_deref().unwrap_or("?");
            let _ = writeln!(out, "{pad}{id} {name} ({glyph})");
        }
    }
}

/// Indented outline, one line per render node.
pub fn outline(tree: &RenderTree) -> String {
    let mut out = String::new();
    let direction = serde_json::to_value(tree.direction).unwrap_or_default();
    let layout = serde_json::to_value(tree.layout).unwrap_or_default();
    let _ = writeln!(
        out,
        "== {} ({} {}) ==",
        tree.manifest,
        direction.as_str().unwrap_or("?"),
        layout.as_str().unwrap_or("?")
    );
    for region in &tree.regions {
        node(&mut out, region, 0);
    }
    out
}
