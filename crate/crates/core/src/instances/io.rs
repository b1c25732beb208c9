//! Line-based text formats for both instance kinds.
//!
//! ```text
//! DBDST 1                      DBGST 1
//! n m k                        n k
//! root <id>                    root <id>
//! vertex <id> <d>        x n   vertex <id> <parent|-1> <cost> <d>   x n
//! edge <u> <v> <cost>    x m   group <t> <size> <ids...>            x k
//! terminal <id>          x k
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{DirectedInstance, Edge, GroupTreeInstance, InstanceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; 0 for whole-file problems.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("id out of range: {id} (n = {n})")]
    IdOutOfRange { id: usize, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("unexpected end of file, expected {0}")]
    UnexpectedEof(&'static str),
    #[error("invalid instance: {0}")]
    Invalid(InstanceError),
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }

    /// Next significant line as (1-based line number, tokens).
    fn next(&mut self, expected: &'static str) -> Result<(usize, Vec<&'a str>), ParseError> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok((i + 1, line.split_whitespace().collect()));
        }
        Err(ParseError { line: 0, kind: ParseErrorKind::UnexpectedEof(expected) })
    }

    fn finish(mut self) -> Result<(), ParseError> {
        match self.next("") {
            Ok((line, toks)) => Err(malformed(line, format!("trailing content `{}`", toks.join(" ")))),
            Err(_) => Ok(()),
        }
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, kind: ParseErrorKind::Malformed(msg.into()) }
}

fn expect_keyword(line: usize, toks: &[&str], kw: &str, arity: usize) -> Result<(), ParseError> {
    if toks.first() != Some(&kw) {
        return Err(malformed(line, format!("expected `{kw}`")));
    }
    if arity != usize::MAX && toks.len() != arity + 1 {
        return Err(malformed(line, format!("`{kw}` takes {arity} fields, found {}", toks.len() - 1)));
    }
    Ok(())
}

fn num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| malformed(line, format!("not a number: `{tok}`")))
}

fn id(line: usize, tok: &str, n: usize) -> Result<usize, ParseError> {
    let v: usize = num(line, tok)?;
    if v >= n {
        return Err(ParseError { line, kind: ParseErrorKind::IdOutOfRange { id: v, n } });
    }
    Ok(v)
}

fn header(lines: &mut Lines<'_>, magic: &str) -> Result<(), ParseError> {
    let (line, toks) = lines.next("header")?;
    if toks != [magic, "1"] {
        return Err(malformed(line, format!("expected header `{magic} 1`")));
    }
    Ok(())
}

/// Reads the vertex block, enforcing each id exactly once; returns the
/// per-id token slices after the id.
fn vertex_block<'a>(
    lines: &mut Lines<'a>,
    n: usize,
    fields: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>, ParseError> {
    let mut rows: Vec<Option<(usize, Vec<&'a str>)>> = vec![None; n];
    for _ in 0..n {
        let (line, toks) = lines.next("vertex line")?;
        expect_keyword(line, &toks, "vertex", fields + 1)?;
        let v = id(line, toks[1], n)?;
        if rows[v].is_some() {
            return Err(malformed(line, format!("vertex {v} listed twice")));
        }
        rows[v] = Some((line, toks[2..].to_vec()));
    }
    Ok(rows.into_iter().map(|r| r.expect("all n distinct ids seen")).collect())
}

pub fn parse_dst(text: &str) -> Result<DirectedInstance, ParseError> {
    let mut lines = Lines::new(text);
    header(&mut lines, "DBDST")?;
    let (line, toks) = lines.next("size line")?;
    if toks.len() != 3 {
        return Err(malformed(line, "expected `n m k`"));
    }
    let (n, m, k): (usize, usize, usize) = (num(line, toks[0])?, num(line, toks[1])?, num(line, toks[2])?);
    if n == 0 {
        return Err(malformed(line, "n must be positive"));
    }
    let (line, toks) = lines.next("root line")?;
    expect_keyword(line, &toks, "root", 1)?;
    let root = id(line, toks[1], n)?;

    let mut degree_bound = vec![0u32; n];
    for (v, (line, rest)) in vertex_block(&mut lines, n, 1)?.into_iter().enumerate() {
        degree_bound[v] = num(line, rest[0])?;
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::new();
    for _ in 0..m {
        let (line, toks) = lines.next("edge line")?;
        expect_keyword(line, &toks, "edge", 3)?;
        let (u, v) = (id(line, toks[1], n)?, id(line, toks[2], n)?);
        let cost = num(line, toks[3])?;
        if !seen.insert((u, v)) {
            return Err(ParseError { line, kind: ParseErrorKind::DuplicateEdge(u, v) });
        }
        edges.push(Edge { from: u, to: v, cost });
    }

    let mut terminals = Vec::with_capacity(k);
    for _ in 0..k {
        let (line, toks) = lines.next("terminal line")?;
        expect_keyword(line, &toks, "terminal", 1)?;
        terminals.push(id(line, toks[1], n)?);
    }
    lines.finish()?;

    let inst = DirectedInstance { vertex_count: n, edges, root, terminals, degree_bound };
    inst.validate().map_err(|e| ParseError { line: 0, kind: ParseErrorKind::Invalid(e) })?;
    Ok(inst)
}

pub fn serialize_dst(inst: &DirectedInstance) -> String {
    let mut s = String::new();
    writeln!(s, "DBDST 1").unwrap();
    writeln!(s, "{} {} {}", inst.vertex_count, inst.edges.len(), inst.terminals.len()).unwrap();
    writeln!(s, "root {}", inst.root).unwrap();
    for (v, d) in inst.degree_bound.iter().enumerate() {
        writeln!(s, "vertex {v} {d}").unwrap();
    }
    for e in &inst.edges {
        writeln!(s, "edge {} {} {}", e.from, e.to, e.cost).unwrap();
    }
    for t in &inst.terminals {
        writeln!(s, "terminal {t}").unwrap();
    }
    s
}

/// Parses a group instance. Members may be internal or shared; run
/// [`super::preprocess_gst`] before solving.
pub fn parse_gst(text: &str) -> Result<GroupTreeInstance, ParseError> {
    let mut lines = Lines::new(text);
    header(&mut lines, "DBGST")?;
    let (line, toks) = lines.next("size line")?;
    if toks.len() != 2 {
        return Err(malformed(line, "expected `n k`"));
    }
    let (n, k): (usize, usize) = (num(line, toks[0])?, num(line, toks[1])?);
    if n == 0 {
        return Err(malformed(line, "n must be positive"));
    }
    let (line, toks) = lines.next("root line")?;
    expect_keyword(line, &toks, "root", 1)?;
    let root = id(line, toks[1], n)?;

    let mut parent = vec![None; n];
    let mut cost = vec![0u64; n];
    let mut degree_bound = vec![0u32; n];
    for (v, (line, rest)) in vertex_block(&mut lines, n, 3)?.into_iter().enumerate() {
        parent[v] = match rest[0] {
            "-1" => None,
            tok => Some(id(line, tok, n)?),
        };
        if (parent[v].is_none()) != (v == root) {
            return Err(malformed(line, "exactly the root has parent -1"));
        }
        cost[v] = num(line, rest[1])?;
        degree_bound[v] = num(line, rest[2])?;
    }

    let mut groups = vec![None; k];
    for _ in 0..k {
        let (line, toks) = lines.next("group line")?;
        expect_keyword(line, &toks, "group", usize::MAX)?;
        if toks.len() < 3 {
            return Err(malformed(line, "expected `group <t> <size> <ids...>`"));
        }
        let t = id(line, toks[1], k)?;
        let size: usize = num(line, toks[2])?;
        if toks.len() != 3 + size {
            return Err(malformed(line, format!("group declares {size} members, lists {}", toks.len() - 3)));
        }
        if groups[t].is_some() {
            return Err(malformed(line, format!("group {t} listed twice")));
        }
        groups[t] = Some(toks[3..].iter().map(|tok| id(line, tok, n)).collect::<Result<Vec<_>, _>>()?);
    }
    lines.finish()?;

    let inst = GroupTreeInstance {
        parent,
        cost,
        groups: groups.into_iter().map(|g| g.expect("all k distinct ids seen")).collect(),
        degree_bound,
        synthetic_leaf: vec![false; n],
    };
    inst.tree().map_err(|e| ParseError { line: 0, kind: ParseErrorKind::Invalid(e) })?;
    if let Some(v) = inst.degree_bound.iter().position(|&d| d == 0) {
        return Err(ParseError { line: 0, kind: ParseErrorKind::Invalid(InstanceError::ZeroDegreeBound(v)) });
    }
    Ok(inst)
}

pub fn serialize_gst(inst: &GroupTreeInstance) -> String {
    let mut s = String::new();
    let root = inst.parent.iter().position(|p| p.is_none()).unwrap_or(0);
    writeln!(s, "DBGST 1").unwrap();
    writeln!(s, "{} {}", inst.vertex_count(), inst.k()).unwrap();
    writeln!(s, "root {root}").unwrap();
    for v in 0..inst.vertex_count() {
        let p = inst.parent[v].map_or("-1".to_string(), |p| p.to_string());
        writeln!(s, "vertex {v} {p} {} {}", inst.cost[v], inst.degree_bound[v]).unwrap();
    }
    for (t, g) in inst.groups.iter().enumerate() {
        write!(s, "group {t} {}", g.len()).unwrap();
        for v in g {
            write!(s, " {v}").unwrap();
        }
        writeln!(s).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "DBDST 1\n2 1 1\nroot 0\nvertex 0 1\nvertex 1 1\nedge 0 1 5\nterminal 1\n";

    #[test]
    fn minimal_dst_file() {
        let inst = parse_dst(MINIMAL).unwrap();
        assert_eq!(inst.edges, vec![Edge { from: 0, to: 1, cost: 5 }]);
        assert_eq!(inst.terminals, vec![1]);
        assert_eq!(serialize_dst(&inst), MINIMAL);
    }

    #[test]
    fn whitespace_and_comments_canonicalize() {
        let messy = "# sample\nDBDST   1\n\n2 1 1\nroot 0\n  vertex 1 1\nvertex 0   1\nedge 0 1 5   \nterminal 1";
        assert_eq!(serialize_dst(&parse_dst(messy).unwrap()), MINIMAL);
    }

    #[test]
    fn terminal_equal_to_n_is_out_of_range() {
        let bad = MINIMAL.replace("terminal 1", "terminal 2");
        let err = parse_dst(&bad).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::IdOutOfRange { id: 2, n: 2 });
        assert_eq!(err.line, 7);
        assert!(err.to_string().contains("id out of range"));
    }

    #[test]
    fn duplicate_edge_is_reported() {
        let bad = "DBDST 1\n2 2 1\nroot 0\nvertex 0 1\nvertex 1 1\nedge 0 1 5\nedge 0 1 6\nterminal 1\n";
        let err = parse_dst(bad).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateEdge(0, 1));
        assert_eq!(err.line, 7);
    }

    #[test]
    fn malformed_lines_are_reported() {
        assert!(matches!(parse_dst("DBDST 2\n").unwrap_err().kind, ParseErrorKind::Malformed(_)));
        let bad = MINIMAL.replace("edge 0 1 5", "edge 0 1");
        assert_eq!(parse_dst(&bad).unwrap_err().line, 6);
        let truncated = "DBDST 1\n2 1 1\nroot 0\nvertex 0 1\n";
        assert!(matches!(parse_dst(truncated).unwrap_err().kind, ParseErrorKind::UnexpectedEof(_)));
    }

    #[test]
    fn gst_round_trip() {
        let text = "DBGST 1\n3 2\nroot 0\nvertex 0 -1 0 2\nvertex 1 0 3 1\nvertex 2 0 5 1\ngroup 0 1 1\ngroup 1 1 2\n";
        let inst = parse_gst(text).unwrap();
        assert_eq!(inst.parent, vec![None, Some(0), Some(0)]);
        assert_eq!(inst.groups, vec![vec![1], vec![2]]);
        assert_eq!(serialize_gst(&inst), text);
    }

    #[test]
    fn gst_group_size_mismatch() {
        let text = "DBGST 1\n2 1\nroot 0\nvertex 0 -1 0 1\nvertex 1 0 1 1\ngroup 0 2 1\n";
        assert!(matches!(parse_gst(text).unwrap_err().kind, ParseErrorKind::Malformed(_)));
    }
}
