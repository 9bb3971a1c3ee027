use std::io::{BufRead, Write};

use super::{GraphError, RegularGraph};

/// Writes the header line `n d` followed by one `u v` line per edge (`u < v`).
pub fn write_edge_list<W: Write>(g: &RegularGraph, mut out: W) -> Result<(), GraphError> {
    writeln!(out, "{} {}", g.n(), g.d())?;
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<RegularGraph, GraphError> {
    let mut header = None;
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let pair = parse_pair(text, lineno)?;
        if header.is_none() {
            header = Some(pair);
        } else {
            if pair.0 >= pair.1 {
                return Err(GraphError::Parse {
                    line: lineno,
                    msg: format!("edge must satisfy u < v, got {text:?}"),
                });
            }
            edges.push(pair);
        }
    }
    let (n, d) = header.ok_or(GraphError::Parse {
        line: 1,
        msg: "missing \"n d\" header".into(),
    })?;
    RegularGraph::from_edges(n, d, &edges)
}

fn parse_pair(text: &str, line: usize) -> Result<(usize, usize), GraphError> {
    let mut it = text.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(GraphError::Parse {
            line,
            msg: format!("expected two non-negative integers, got {text:?}"),
        }),
    }
}
