//! Models shared by the benchmarks in `benches/`.

use cosserat_core::{parse_model, Model};

/// Parses `models/<name>` from the workspace root.
pub fn fixture(name: &str) -> Model {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|d| panic!("{}: {d:?}", path.display()))
}
