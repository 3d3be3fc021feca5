//! Graph file formats.
//!
//! MIVIA ARG binary: every integer is an unsigned 16-bit little-endian word.
//! The stream is the node count `n`, then for each node in order its edge
//! count followed by that many target ids. Graphs are undirected; writing
//! lists targets ascending and each edge from both endpoints, which makes
//! load-then-write the identity on canonical files.
//!
//! Text: a header `n [directed] [labeled]`, then for labeled graphs one
//! `v label` line per vertex, then one `u v [code]` line per edge. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use mcsplit_core::{Edge, EdgeCode, Graph, GraphError, GraphKind, Label};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("stream ends inside a word at byte {0}")]
    OddLength(usize),
    #[error("stream truncated: expected {expected} more words at word {at}")]
    Truncated { at: usize, expected: usize },
    #[error("target {target} of node {node} is not below n = {n}")]
    TargetOutOfRange { node: usize, target: usize, n: usize },
    #[error("{0} trailing words after the last node")]
    TrailingBytes(usize),
    #[error("MIVIA files hold undirected graphs only")]
    Directed,
    #[error("MIVIA files hold unlabeled graphs only")]
    Labeled,
    #[error("{field} = {value} does not fit a 16-bit word")]
    TooLarge { field: &'static str, value: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Mivia,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "mivia" => Ok(Format::Mivia),
            "text" | "txt" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected mivia or text)")),
        }
    }
}

pub fn load_mivia(bytes: &[u8]) -> Result<Graph, FormatError> {
    if !bytes.len().is_multiple_of(2) {
        return Err(FormatError::OddLength(bytes.len()));
    }
    let words: Vec<usize> = bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as usize).collect();
    let mut at = 0;
    let mut take = |count: usize| -> Result<&[usize], FormatError> {
        let slice = words.get(at..at + count).ok_or(FormatError::Truncated { at, expected: count })?;
        at += count;
        Ok(slice)
    };
    let n = take(1)?[0];
    let mut edges = Vec::new();
    for node in 0..n {
        let k = take(1)?[0];
        for &target in take(k)? {
            if target >= n {
                return Err(FormatError::TargetOutOfRange { node, target, n });
            }
            edges.push(Edge::new(node, target));
        }
    }
    if at != words.len() {
        return Err(FormatError::TrailingBytes(words.len() - at));
    }
    Ok(Graph::from_edges(n, GraphKind::Undirected, edges, None)?)
}

pub fn write_mivia(g: &Graph) -> Result<Vec<u8>, FormatError> {
    if g.is_directed() {
        return Err(FormatError::Directed);
    }
    if g.is_labeled() {
        return Err(FormatError::Labeled);
    }
    let word = |field, value: usize| u16::try_from(value).map_err(|_| FormatError::TooLarge { field, value });
    let mut out = Vec::with_capacity(2 + 4 * g.n());
    out.extend(word("n", g.n())?.to_le_bytes());
    for v in 0..g.n() {
        let targets: Vec<usize> = g.neighbours(v).collect();
        out.extend(word("edge count", targets.len())?.to_le_bytes());
        for t in targets {
            out.extend((t as u16).to_le_bytes());
        }
    }
    Ok(out)
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

fn number<T: FromStr>(line: usize, token: &str) -> Result<T, FormatError> {
    token.parse().map_err(|_| syntax(line, format!("expected a number, found `{token}`")))
}

pub fn load_text(text: &str) -> Result<Graph, FormatError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
    let mut tokens = header.split_whitespace();
    let n: usize = number(hl, tokens.next().unwrap_or_default())?;
    let (mut kind, mut labeled) = (GraphKind::Undirected, false);
    for t in tokens {
        match t {
            "directed" => kind = GraphKind::Directed,
            "undirected" => kind = GraphKind::Undirected,
            "labeled" | "labelled" => labeled = true,
            other => return Err(syntax(hl, format!("unknown header flag `{other}`"))),
        }
    }
    let labels = if labeled {
        let mut labels: Vec<Option<Label>> = vec![None; n];
        for _ in 0..n {
            let (ln, l) = lines.next().ok_or_else(|| syntax(hl, format!("expected {n} label lines")))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 2 {
                return Err(syntax(ln, "label lines are `v label`"));
            }
            let v: usize = number(ln, t[0])?;
            let slot = labels.get_mut(v).ok_or_else(|| syntax(ln, format!("vertex {v} out of range")))?;
            if slot.replace(number(ln, t[1])?).is_some() {
                return Err(syntax(ln, format!("vertex {v} labeled twice")));
            }
        }
        Some(labels.into_iter().map(|l| l.expect("n distinct labeled vertices")).collect())
    } else {
        None
    };
    let mut edges = Vec::new();
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        let edge = match t.as_slice() {
            [u, v] => Edge::new(number(ln, u)?, number(ln, v)?),
            [u, v, c] => {
                let code = EdgeCode::from_u8(number(ln, c)?).ok_or_else(|| syntax(ln, "edge code must be 0..=3"))?;
                Edge::with_code(number(ln, u)?, number(ln, v)?, code)
            }
            _ => return Err(syntax(ln, "edge lines are `u v [code]`")),
        };
        edges.push(edge);
    }
    Ok(Graph::from_edges(n, kind, edges, labels)?)
}

pub fn write_text(g: &Graph) -> String {
    let mut out = g.n().to_string();
    if g.is_directed() {
        out.push_str(" directed");
    }
    if g.is_labeled() {
        out.push_str(" labeled");
    }
    out.push('\n');
    if let Some(labels) = g.labels() {
        for (v, l) in labels.iter().enumerate() {
            let _ = writeln!(out, "{v} {l}");
        }
    }
    for e in g.edges() {
        match e.code {
            Some(c) => {
                let _ = writeln!(out, "{} {} {}", e.u, e.v, c as u8);
            }
            None => {
                let _ = writeln!(out, "{} {}", e.u, e.v);
            }
        }
    }
    out
}

pub fn parse_graph(bytes: &[u8], format: Format) -> Result<Graph, FormatError> {
    match format {
        Format::Mivia => load_mivia(bytes),
        Format::Text => {
            let text = std::str::from_utf8(bytes).map_err(|e| syntax(0, e.to_string()))?;
            load_text(text)
        }
    }
}

pub fn encode_graph(g: &Graph, format: Format) -> Result<Vec<u8>, FormatError> {
    match format {
        Format::Mivia => write_mivia(g),
        Format::Text => Ok(write_text(g).into_bytes()),
    }
}

pub fn read_graph(path: &Path, format: Format) -> Result<Graph, FormatError> {
    parse_graph(&std::fs::read(path)?, format)
}

pub fn write_graph(path: &Path, g: &Graph, format: Format) -> Result<(), FormatError> {
    std::fs::write(path, encode_graph(g, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = load_mivia(&[2, 0, 1, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(g.n(), 2);
        assert!(g.adjacent(0, 1));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn singleton() {
        let g = load_mivia(&[1, 0, 0, 0]).unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
        assert_eq!(write_mivia(&g).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn malformed_streams() {
        assert!(matches!(
            load_mivia(&[2, 0, 1, 0, 5, 0, 0, 0]),
            Err(FormatError::TargetOutOfRange { target: 5, n: 2, .. })
        ));
        assert!(matches!(load_mivia(&[2, 0, 1, 0]), Err(FormatError::Truncated { .. })));
        assert!(matches!(load_mivia(&[1, 0, 0, 0, 9, 9]), Err(FormatError::TrailingBytes(1))));
        assert!(matches!(load_mivia(&[1, 0, 0]), Err(FormatError::OddLength(3))));
        assert!(matches!(load_mivia(&[]), Err(FormatError::Truncated { .. })));
    }

    #[test]
    fn one_sided_listing_is_symmetrised() {
        // edge listed only from node 0
        let g = load_mivia(&[2, 0, 1, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(write_mivia(&g).unwrap(), vec![2, 0, 1, 0, 1, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::random_directed(9, 0.4, 3).with_random_labels(3, 4);
        assert_eq!(load_text(&write_text(&g)).unwrap(), g);
        let u = Graph::random(7, 0.5, 1);
        assert_eq!(load_text(&write_text(&u)).unwrap(), u);
    }

    #[test]
    fn text_comments_and_errors() {
        let g = load_text("# path\n3\n0 1\n\n1 2\n").unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert!(load_text("3 sideways\n").is_err());
        assert!(load_text("2 labeled\n0 1\n").is_err());
        assert!(load_text("2\n0 0\n").is_err());
    }

    #[test]
    fn mivia_rejects_directed() {
        assert!(matches!(write_mivia(&Graph::random_directed(3, 1.0, 0)), Err(FormatError::Directed)));
    }
}
