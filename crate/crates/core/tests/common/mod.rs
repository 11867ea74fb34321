#![allow(dead_code)]

use std::path::PathBuf;

use frobtwist::{parse_pd, LinkDiagram, PartialAssignment};

pub const CORPUS: [&str; 9] = [
    "unknot",
    "kink",
    "hopf",
    "trefoil",
    "figure_eight",
    "cinquefoil",
    "granny",
    "trefoil_unknot",
    "r2_unlink",
];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load(name: &str) -> LinkDiagram {
    let path = corpus_dir().join(format!("{name}.pd"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_pd(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus() -> Vec<(&'static str, LinkDiagram)> {
    CORPUS.iter().map(|&n| (n, load(n))).collect()
}

pub fn load_pins(d: &LinkDiagram, file: &str) -> PartialAssignment {
    let text = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
    let parsed = serde_json::from_str(&text).unwrap();
    frobtwist::io::pins_from_file(d, &parsed).unwrap()
}

/// The diagram with its connected state's crossings changed, so that the
/// empty state is a single circle. `None` for crossingless or disconnected input.
pub fn connected_variant(d: &LinkDiagram) -> Option<LinkDiagram> {
    if d.crossing_count() == 0 || !d.is_connected() {
        return None;
    }
    let s = d.find_connected_state().ok()?;
    Some(s.members().fold(d.clone(), |acc, c| acc.crossing_change(c)))
}
