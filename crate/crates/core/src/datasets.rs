//! Bundled and synthetic datasets.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::classify::{load_ground_truth, GroundTruth};
use crate::error::{Error, Result};
use crate::generators::planted_partition;
use crate::graph::{parse_edge_list, write_edge_list, Graph, LoadOptions};

const LESMIS_EDGES: &str = include_str!("../data/lesmis.edges");
const LESMIS_LABELS: &str = include_str!("../data/lesmis.labels");
const LESMIS_EDGES_SHA256: &str =
    "c0b85f119a90d91c77583a09c49119cb1388700e6e36a1f1dbaeeaa93e35f40f";
const LESMIS_LABELS_SHA256: &str =
    "44f6b4b6ba060c0263fa5cf6562ea8a4e795f57726739b9aec2d077183ff9b7a";

/// Class names of the bundled Les Misérables partition, by class index.
pub const LESMIS_CLASSES: [&str; 6] = [
    "Valjean",
    "Myriel",
    "Gavroche",
    "Cosette",
    "Thenardier",
    "Fantine",
];

/// Class sizes of the synthetic three-class fixture.
pub const WIKIMATH_SIZES: [usize; 3] = [106, 368, 435];

/// Class names of the synthetic three-class fixture.
pub const WIKIMATH_CLASSES: [&str; 3] = ["DM", "MA", "AM"];

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn verify(name: &'static str, text: &str, expected: &str) -> Result<()> {
    if sha256_hex(text.as_bytes()) == expected {
        Ok(())
    } else {
        Err(Error::Checksum(name))
    }
}

/// Les Misérables co-appearance network (77 characters, 254 unweighted
/// links) with its six-community ground truth.
pub fn bundled_lesmis() -> Result<(Graph, GroundTruth)> {
    verify("lesmis.edges", LESMIS_EDGES, LESMIS_EDGES_SHA256)?;
    verify("lesmis.labels", LESMIS_LABELS, LESMIS_LABELS_SHA256)?;
    let g = parse_edge_list(LESMIS_EDGES, LoadOptions::default())?;
    let truth = load_ground_truth(LESMIS_LABELS.as_bytes(), &g)?;
    Ok((g, truth))
}

/// Raw bundled files, edges then labels.
pub fn lesmis_sources() -> (&'static str, &'static str) {
    (LESMIS_EDGES, LESMIS_LABELS)
}

/// Imbalanced three-class planted partition with class sizes
/// [`WIKIMATH_SIZES`], standing in for a hyperlink graph of that shape.
/// Node names are `n0`, `n1`, ...
pub fn synthetic_wikimath(seed: u64) -> Result<(Graph, GroundTruth)> {
    let (g, class) = planted_partition(&WIKIMATH_SIZES, 8.0, 1.5, seed)?;
    let named = Graph::from_named_edges(
        (0..g.n_nodes()).map(|i| format!("n{i}")).collect(),
        g.edges().iter().map(|e| (e.i, e.j, e.w)),
    )?;
    Ok((named, GroundTruth::new(class)?))
}

/// Writes `g` as an edge list and `truth` as `node class` lines.
pub fn write_dataset(g: &Graph, truth: &GroundTruth, edges: &Path, labels: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(edges)?);
    write_edge_list(g, &mut out)?;
    out.flush()?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(labels)?);
    for i in 0..g.n_nodes() {
        writeln!(out, "{} {}", g.name(i), truth.class_of(i))?;
    }
    out.flush()?;
    Ok(())
}
