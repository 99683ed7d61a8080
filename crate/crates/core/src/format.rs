//! Graph text formats: graph6, edge lists, DOT export.
//!
//! graph6 reference: the 6-bit printable encoding with the upper triangle of
//! the adjacency matrix in column order, header `chr(n + 63)` for `n <= 62`
//! and `'~'` plus three 6-bit groups for larger `n`.

use crate::{Error, Graph, Result};

/// Input/output format tags accepted by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Graph6,
    EdgeList,
}

impl Format {
    pub fn parse_tag(tag: &str) -> Result<Format> {
        match tag {
            "g6" | "graph6" => Ok(Format::Graph6),
            "edges" | "edge-list" => Ok(Format::EdgeList),
            other => Err(Error::UnsupportedFormat(format!("unknown format tag '{other}'"))),
        }
    }
}

pub fn parse_graph(text: &str, format: Format) -> Result<Graph> {
    match format {
        Format::Graph6 => parse_graph6(text),
        Format::EdgeList => parse_edge_list(text),
    }
}

pub fn serialize_graph(graph: &Graph, format: Format) -> Result<String> {
    match format {
        Format::Graph6 => to_graph6(graph),
        Format::EdgeList => Ok(to_edge_list(graph)),
    }
}

fn parse_err(line: usize, byte: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, byte, reason: reason.into() }
}

/// Decodes one graph6 line (leading `>>graph6<<` header allowed).
pub fn parse_graph6(text: &str) -> Result<Graph> {
    let mut s = text.trim();
    if let Some(rest) = s.strip_prefix(">>graph6<<") {
        s = rest;
    }
    if s.is_empty() {
        return Err(parse_err(1, 0, "empty graph6 text"));
    }
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(parse_err(1, i, format!("byte {b} outside graph6 alphabet")));
        }
    }
    let vals: Vec<u32> = bytes.iter().map(|&b| (b - 63) as u32).collect();
    let (n, header_len) = if vals[0] != 63 {
        (vals[0] as usize, 1)
    } else if vals.len() >= 4 && vals[1] != 63 {
        (((vals[1] as usize) << 12) + ((vals[2] as usize) << 6) + vals[3] as usize, 4)
    } else if vals.len() >= 8 {
        let mut n = 0usize;
        for &v in &vals[2..8] {
            n = (n << 6) + v as usize;
        }
        (n, 8)
    } else {
        return Err(parse_err(1, 0, "truncated graph6 size header"));
    };
    let bits_needed = n * n.saturating_sub(1) / 2;
    let groups = bits_needed.div_ceil(6);
    if vals.len() - header_len < groups {
        return Err(parse_err(1, bytes.len(), "truncated graph6 body"));
    }
    let mut edges = Vec::new();
    let mut pos = 0usize;
    for col in 1..n {
        for row in 0..col {
            let group = vals[header_len + pos / 6];
            let bit = (group >> (5 - pos % 6)) & 1;
            if bit == 1 {
                edges.push((row, col));
            }
            pos += 1;
        }
    }
    Graph::new(n, &edges)
}

/// Encodes a simple graph as one graph6 line.
pub fn to_graph6(graph: &Graph) -> Result<String> {
    if !graph.is_simple() {
        return Err(Error::UnsupportedFormat(
            "graph6 cannot encode parallel edges".into(),
        ));
    }
    let n = graph.n();
    let mut out: Vec<u8> = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        out.push(((n >> 12) & 63) as u8 + 63);
        out.push(((n >> 6) & 63) as u8 + 63);
        out.push((n & 63) as u8 + 63);
    } else {
        return Err(Error::UnsupportedFormat("graph too large for this writer".into()));
    }
    let bits = n * n.saturating_sub(1) / 2;
    let mut groups = vec![0u8; bits.div_ceil(6)];
    let mut pos = 0usize;
    for col in 1..n {
        for row in 0..col {
            if graph.has_edge(row, col) {
                groups[pos / 6] |= 1 << (5 - pos % 6);
            }
            pos += 1;
        }
    }
    for g in groups {
        out.push(g + 63);
    }
    Ok(String::from_utf8(out).expect("graph6 output is ASCII"))
}

/// Parses the edge-list format: one `u v` pair per line, 0-based ids,
/// `#` starts a comment, blank lines ignored. The vertex count is the
/// largest id plus one; repeated lines give parallel edges.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    let mut offset = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let mut fields = body.split_whitespace();
        if let Some(a) = fields.next() {
            let b = fields.next().ok_or_else(|| {
                parse_err(lineno + 1, offset, "expected two vertex ids per line")
            })?;
            if fields.next().is_some() {
                return Err(parse_err(lineno + 1, offset, "trailing tokens after edge"));
            }
            let u: usize = a
                .parse()
                .map_err(|_| parse_err(lineno + 1, offset, format!("bad vertex id '{a}'")))?;
            let v: usize = b
                .parse()
                .map_err(|_| parse_err(lineno + 1, offset, format!("bad vertex id '{b}'")))?;
            if u == v {
                return Err(parse_err(lineno + 1, offset, format!("loop edge {u} {v}")));
            }
            max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u).max(v)));
            edges.push((u, v));
        }
        offset += line.len() + 1;
    }
    let n = max_id.map_or(0, |m| m + 1);
    Graph::new(n, &edges)
}

pub fn to_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    for &(u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// DOT export; `tour` optionally annotates walk edges with traversal order.
pub fn to_dot(graph: &Graph, tour: Option<&[usize]>) -> String {
    let mut out = String::from("graph g {\n");
    for v in 0..graph.n() {
        out.push_str(&format!("  {v};\n"));
    }
    let mut walk_labels: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
        std::collections::BTreeMap::new();
    if let Some(walk) = tour {
        for (i, w) in walk.windows(2).enumerate() {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            walk_labels.entry(key).or_default().push(i + 1);
        }
    }
    for er in graph.edge_refs() {
        let key = (er.u, er.v);
        match walk_labels.get(&key) {
            Some(steps) if er.slot < steps.len() => {
                out.push_str(&format!(
                    "  {} -- {} [color=red, label=\"{}\"];\n",
                    er.u, er.v, steps[er.slot]
                ));
            }
            _ => out.push_str(&format!("  {} -- {};\n", er.u, er.v)),
        }
    }
    out.push_str("}\n");
    out
}
