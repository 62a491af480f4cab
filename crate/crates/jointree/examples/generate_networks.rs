//! Regenerate the JSON network files under `data/` from their pinned seeds.
//!
//! ```text
//! cargo run --example generate_networks [-- <output-dir>]
//! ```
//!
//! Without an argument the files land in this crate's own `data/`
//! directory; a test pins the committed bytes to this generator, so the
//! output is reproducible.

use std::path::PathBuf;

use jointree::{render_doc, shipped_network_docs};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")));
    std::fs::create_dir_all(&dir).expect("create output directory");
    for (name, doc) in shipped_network_docs() {
        let path = dir.join(name);
        std::fs::write(&path, render_doc(&doc)).expect("write network file");
        println!("wrote {}", path.display());
    }
}
