//! Tab-separated edge lists.
//!
//! One row `i<TAB>j<TAB>v` per nonzero edge variable `y_ij = v`, with 0-based
//! node ids. Any run of spaces or tabs is accepted as a separator on input.
//! Lines starting with `#` carry metadata: `#n=<nodes>` and `#directed=<0|1>`
//! are understood and anything else is ignored.
//!
//! For directed networks the rows `(i, j, v)` and `(j, i, w)` make up the
//! dyad `(v, w)`, and a missing direction is the zero label. Undirected files
//! may list a pair in one or both orientations, as long as the values agree.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::io::{BufRead, Write};

use blockmix_core::{DyadAlphabet, EdgeAlphabet, SparseNetwork};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Header {
    pub n: Option<usize>,
    pub directed: Option<bool>,
}

fn parse_header(line: &str, header: &mut Header, name: &str, line_no: usize) -> Result<()> {
    let body = line[1..].trim();
    let Some((key, value)) = body.split_once('=') else {
        return Ok(());
    };
    let bad = |what: &str| Error::Parse {
        source_name: name.into(),
        line: line_no,
        message: format!("bad {what} header {value:?}"),
    };
    match key.trim() {
        "n" => header.n = Some(value.trim().parse().map_err(|_| bad("#n="))?),
        "directed" => {
            header.directed = Some(match value.trim() {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(bad("#directed=")),
            })
        }
        _ => {}
    }
    Ok(())
}

/// Reads the metadata lines only, stopping at the first data row.
pub fn read_header<R: BufRead>(reader: R, name: &str) -> Result<Header> {
    let mut header = Header::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::data(name, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !line.starts_with('#') {
            break;
        }
        parse_header(line, &mut header, name, idx + 1)?;
    }
    Ok(header)
}

/// Parses an edge list.
///
/// `directed` overrides the `#directed=` header; without either the network
/// is taken as directed.
pub fn read_edge_list<R: BufRead>(
    reader: R,
    name: &str,
    edge: &EdgeAlphabet,
    directed: Option<bool>,
) -> Result<SparseNetwork> {
    let mut header = Header::default();
    // Directed edge (i, j) -> (value, line).
    let mut rows: HashMap<(usize, usize), (i32, usize)> = HashMap::new();
    let mut max_id: Option<usize> = None;
    let zero = edge.zero_label();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::data(name, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            parse_header(line, &mut header, name, line_no)?;
            continue;
        }
        let err = |message: String| Error::Parse { source_name: name.into(), line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let i: usize = fields[0].parse().map_err(|_| err(format!("bad node id {:?}", fields[0])))?;
        let j: usize = fields[1].parse().map_err(|_| err(format!("bad node id {:?}", fields[1])))?;
        let v: i32 = fields[2].parse().map_err(|_| err(format!("bad edge value {:?}", fields[2])))?;
        if edge.index_of(v).is_none() {
            return Err(err(format!("edge value {v} is not in {:?}", edge.values())));
        }
        if let Some(n) = header.n {
            if i.max(j) >= n {
                return Err(err(format!("node {} is out of range for #n={n}", i.max(j))));
            }
        }
        if i == j {
            if v != zero {
                return Err(err(format!("self-loop at node {i} with value {v}")));
            }
            continue;
        }
        max_id = Some(max_id.map_or(i.max(j), |m| m.max(i).max(j)));
        match rows.entry((i, j)) {
            Entry::Occupied(e) => {
                return Err(err(format!("duplicate row for ({i}, {j}), first given on line {}", e.get().1)));
            }
            Entry::Vacant(e) => {
                e.insert((v, line_no));
            }
        }
    }

    let directed = directed.or(header.directed).unwrap_or(true);
    let n = match (header.n, max_id) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    let alphabet = DyadAlphabet::new(edge.clone(), directed);
    let mut triples = Vec::with_capacity(rows.len());
    for (&(i, j), &(v, line)) in &rows {
        let back = rows.get(&(j, i));
        if directed {
            if i > j && back.is_some() {
                continue;
            }
            let w = back.map_or(zero, |b| b.0);
            triples.push((i, j, alphabet.from_labels(v, w)?));
        } else {
            if let Some(&(w, other)) = back {
                if w != v {
                    return Err(Error::Parse {
                        source_name: name.into(),
                        line: line.max(other),
                        message: format!("undirected pair ({i}, {j}) given values {v} and {w}"),
                    });
                }
                if i > j {
                    continue;
                }
            }
            triples.push((i, j, alphabet.from_labels(v, v)?));
        }
    }
    Ok(SparseNetwork::from_dyads(n, alphabet, triples)?)
}

/// Writes `#n=`, then `#directed=0` for undirected networks, then one row per
/// nonzero edge sorted by `(i, j)`. Undirected pairs appear once with `i < j`.
pub fn write_edge_list<W: Write>(network: &SparseNetwork, mut out: W) -> std::io::Result<()> {
    writeln!(out, "#n={}", network.n())?;
    if !network.alphabet().is_directed() {
        writeln!(out, "#directed=0")?;
    }
    for (i, j, v) in network.edges() {
        writeln!(out, "{i}\t{j}\t{v}")?;
    }
    out.flush()
}
