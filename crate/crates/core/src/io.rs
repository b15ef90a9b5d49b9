//! Text formats for instances and results.
//!
//! * edge list: `u v` per line, 0-indexed, written with `u < v` and sorted
//! * observations: `r c v` triplets sorted by `(r, c)`; `v` is 0/1, or real
//!   for Gaussian instances
//! * matrices: one row per line, binary rows as contiguous digits
//! * partitions: `u cluster group` per line
//! * diagnostics: `key=value` per line
//!
//! Readers skip blank lines and lines starting with `#`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BinaryMatrix, DenseMatrix, Entry, Observation, Partition, SideGraph};
use crate::rng::RNG_NAME;
use crate::synth::GaussianObservation;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines as `(1-based line number, fields)`.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, t.split_whitespace().collect()))
        }
    })
}

fn field<T: FromStr>(path: &Path, line: usize, what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse {what} from {s:?}")))
}

fn expect_fields(path: &Path, line: usize, fields: &[&str], k: usize) -> Result<()> {
    if fields.len() != k {
        return Err(parse_err(
            path,
            line,
            format!("expected {k} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

pub fn format_edge_list(graph: &SideGraph) -> String {
    let mut out = String::new();
    for &(u, v) in graph.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// `path` only labels errors.
pub fn parse_edge_list(text: &str, n: usize, path: &Path) -> Result<SideGraph> {
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (line, f) in records(text) {
        expect_fields(path, line, &f, 2)?;
        let u: usize = field(path, line, "vertex", f[0])?;
        let v: usize = field(path, line, "vertex", f[1])?;
        if u >= n || v >= n {
            return Err(parse_err(path, line, format!("vertex outside 0..{n}")));
        }
        if u == v {
            return Err(parse_err(path, line, "self-loop"));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(path, line, "duplicate edge"));
        }
        edges.push((u, v));
    }
    SideGraph::new(n, edges)
}

pub fn read_edge_list(path: &Path, n: usize) -> Result<SideGraph> {
    parse_edge_list(&read_text(path)?, n, path)
}

pub fn format_triplets(obs: &Observation) -> String {
    let mut out = String::new();
    for e in obs.entries() {
        let _ = writeln!(out, "{} {} {}", e.row, e.col, e.value);
    }
    out
}

fn check_cell(path: &Path, line: usize, r: usize, c: usize, n: usize, m: usize) -> Result<()> {
    if r >= n || c >= m {
        return Err(parse_err(path, line, format!("entry ({r}, {c}) outside {n}x{m}")));
    }
    Ok(())
}

pub fn parse_triplets(text: &str, n: usize, m: usize, path: &Path) -> Result<Observation> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (line, f) in records(text) {
        expect_fields(path, line, &f, 3)?;
        let row = field(path, line, "row", f[0])?;
        let col = field(path, line, "column", f[1])?;
        let value: u8 = field(path, line, "value", f[2])?;
        check_cell(path, line, row, col, n, m)?;
        if value > 1 {
            return Err(parse_err(path, line, format!("value {value} is not 0 or 1")));
        }
        if !seen.insert((row, col)) {
            return Err(parse_err(path, line, "duplicate entry"));
        }
        entries.push(Entry { row, col, value });
    }
    Observation::new(n, m, entries)
}

pub fn read_triplets(path: &Path, n: usize, m: usize) -> Result<Observation> {
    parse_triplets(&read_text(path)?, n, m, path)
}

pub fn format_real_triplets(obs: &GaussianObservation) -> String {
    let mut out = String::new();
    for &(r, c, v) in &obs.entries {
        let _ = writeln!(out, "{r} {c} {v}");
    }
    out
}

pub fn parse_real_triplets(text: &str, n: usize, m: usize, path: &Path) -> Result<GaussianObservation> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (line, f) in records(text) {
        expect_fields(path, line, &f, 3)?;
        let r = field(path, line, "row", f[0])?;
        let c = field(path, line, "column", f[1])?;
        let v: f64 = field(path, line, "value", f[2])?;
        check_cell(path, line, r, c, n, m)?;
        if !v.is_finite() {
            return Err(parse_err(path, line, "non-finite value"));
        }
        if !seen.insert((r, c)) {
            return Err(parse_err(path, line, "duplicate entry"));
        }
        entries.push((r, c, v));
    }
    entries.sort_by_key(|&(r, c, _)| (r, c));
    Ok(GaussianObservation { n, m, entries })
}

pub fn format_binary_matrix(x: &BinaryMatrix) -> String {
    let mut out = String::with_capacity(x.rows() * (x.cols() + 1));
    for r in 0..x.rows() {
        for &b in x.row(r) {
            out.push(char::from(b'0' + b));
        }
        out.push('\n');
    }
    out
}

pub fn parse_binary_matrix(text: &str, path: &Path) -> Result<BinaryMatrix> {
    let mut rows = Vec::new();
    let mut width = None;
    for (line, f) in records(text) {
        expect_fields(path, line, &f, 1)?;
        let row: Vec<u8> = f[0]
            .bytes()
            .map(|b| match b {
                b'0' | b'1' => Ok(b - b'0'),
                _ => Err(parse_err(path, line, format!("unexpected character {:?}", b as char))),
            })
            .collect::<Result<_>>()?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(parse_err(path, line, "row length differs from the first row"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "empty matrix"));
    }
    DenseMatrix::from_rows(rows)
}

pub fn read_binary_matrix(path: &Path) -> Result<BinaryMatrix> {
    parse_binary_matrix(&read_text(path)?, path)
}

pub fn format_real_matrix(x: &DenseMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..x.rows() {
        let row: Vec<String> = x.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_partition(part: &Partition) -> String {
    let mut out = String::new();
    for u in 0..part.n() {
        let _ = writeln!(out, "{u} {} {}", part.cluster_of(u), part.group_of(u));
    }
    out
}

/// Users must appear exactly once each, in any order.
pub fn parse_partition(text: &str, clusters: usize, groups: usize, path: &Path) -> Result<Partition> {
    let mut labels: Vec<Option<(usize, usize)>> = Vec::new();
    for (line, f) in records(text) {
        expect_fields(path, line, &f, 3)?;
        let u: usize = field(path, line, "user", f[0])?;
        let x: usize = field(path, line, "cluster", f[1])?;
        let i: usize = field(path, line, "group", f[2])?;
        if x >= clusters || i >= groups {
            return Err(parse_err(path, line, "label out of range"));
        }
        if u >= labels.len() {
            labels.resize(u + 1, None);
        }
        if labels[u].replace((x, i)).is_some() {
            return Err(parse_err(path, line, format!("user {u} listed twice")));
        }
    }
    let mut cluster_of = Vec::with_capacity(labels.len());
    let mut group_of = Vec::with_capacity(labels.len());
    for (u, l) in labels.into_iter().enumerate() {
        let (x, i) = l.ok_or_else(|| parse_err(path, 0, format!("user {u} missing")))?;
        cluster_of.push(x);
        group_of.push(i);
    }
    Partition::new(clusters, groups, cluster_of, group_of)
}

pub fn read_partition(path: &Path, clusters: usize, groups: usize) -> Result<Partition> {
    parse_partition(&read_text(path)?, clusters, groups, path)
}

pub fn format_kv(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// Run record written next to every output so the run can be repeated.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub command: String,
    pub seed: u64,
    pub spec: T,
}

impl<T: Serialize> Manifest<T> {
    pub fn new(command: impl Into<String>, seed: u64, spec: T) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            rng: RNG_NAME,
            command: command.into(),
            seed,
            spec,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_text(path, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t.txt")
    }

    #[test]
    fn edge_list_round_trip_is_canonical() {
        let g = parse_edge_list("# header\n3 1\n\n0 2\n", 4, p()).unwrap();
        assert_eq!(format_edge_list(&g), "0 2\n1 3\n");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_edge_list("0 1\n1 x\n", 3, p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("t.txt:2"));
        let err = parse_edge_list("0 1\n1 0\n", 3, p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_triplets("0 0 1\n0 1 2\n", 2, 2, p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_triplets("# c\n5 0 1\n", 2, 2, p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn triplets_and_matrix_round_trip() {
        let obs = parse_triplets("1 0 1\n0 1 0\n", 2, 2, p()).unwrap();
        assert_eq!(format_triplets(&obs), "0 1 0\n1 0 1\n");
        let x = parse_binary_matrix("0110\n1001\n", p()).unwrap();
        assert_eq!(format_binary_matrix(&x), "0110\n1001\n");
        assert!(parse_binary_matrix("01\n011\n", p()).is_err());
        let g = parse_real_triplets("1 1 2.5\n0 0 -1\n", 2, 2, p()).unwrap();
        assert_eq!(g.entries, vec![(0, 0, -1.0), (1, 1, 2.5)]);
    }

    #[test]
    fn partition_round_trip() {
        let part = Partition::from_slots(2, 3, &[0, 4, 2, 5]).unwrap();
        let text = format_partition(&part);
        assert_eq!(text, "0 0 0\n1 1 1\n2 0 2\n3 1 2\n");
        assert_eq!(parse_partition(&text, 2, 3, p()).unwrap(), part);
        assert!(parse_partition("0 0 0\n2 0 0\n", 2, 3, p()).is_err());
    }
}
