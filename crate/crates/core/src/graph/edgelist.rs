//! Edge-list text format: a `# n=<count>` header followed by one `i<TAB>j`
//! line per directed edge with 1-based node indices.

use std::io::{BufRead, Write};

use super::DirectedGraph;
use crate::error::{Result, SrgmError};

pub fn write_edge_list<W: Write>(g: &DirectedGraph, mut w: W) -> Result<()> {
    writeln!(w, "# n={}", g.n())?;
    for (i, j) in g.edges() {
        writeln!(w, "{}\t{}", i + 1, j + 1)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn parse_header_field(text: &str, key: &str, line: usize) -> Result<usize> {
    let prefix = format!("{key}=");
    text.split_whitespace()
        .find_map(|tok| tok.strip_prefix(prefix.as_str()))
        .ok_or_else(|| SrgmError::parse(line, format!("header is missing `{key}=`")))?
        .parse()
        .map_err(|e| SrgmError::parse(line, format!("bad `{key}` value: {e}")))
}

pub(crate) fn parse_node(tok: Option<&str>, n: usize, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| SrgmError::parse(line, "expected two node indices"))?;
    let v: usize = tok
        .parse()
        .map_err(|_| SrgmError::parse(line, format!("`{tok}` is not a node index")))?;
    if v == 0 || v > n {
        return Err(SrgmError::parse(
            line,
            format!("node {v} outside 1..={n}"),
        ));
    }
    Ok(v - 1)
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<DirectedGraph> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| SrgmError::parse(1, "empty file, expected `# n=<count>` header"))??;
    let header = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| SrgmError::parse(1, "expected `# n=<count>` header"))?;
    let n = parse_header_field(header, "n", 1)?;
    if n == 0 {
        return Err(SrgmError::parse(1, "n must be positive"));
    }
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut toks = text.split('\t');
        let i = parse_node(toks.next(), n, lineno)?;
        let j = parse_node(toks.next(), n, lineno)?;
        if toks.next().is_some() {
            return Err(SrgmError::parse(lineno, "trailing fields after edge"));
        }
        if i == j {
            return Err(SrgmError::parse(lineno, format!("self-loop at node {}", i + 1)));
        }
        rows[i].push(j);
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.sort_unstable();
        if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
            return Err(SrgmError::InvalidInput(format!(
                "repeated edge {}\t{}",
                i + 1,
                w[0] + 1
            )));
        }
    }
    Ok(DirectedGraph::from_sorted_rows(n, rows))
}
