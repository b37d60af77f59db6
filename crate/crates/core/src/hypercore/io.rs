//! Plain-text formats.
//!
//! Edge list: header `r n`, then one sorted edge per line.
//! Clique list: one sorted clique per line.
//! Signed vector: `±mult: v1 v2 …` per line.
//! Blank lines and lines starting with `#` are ignored everywhere.

use super::{is_sorted_set, RGraph, SparseVec, VSet};
use crate::error::{Error, Result};
use std::fmt::Write;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_set(line: usize, s: &str) -> Result<VSet> {
    let mut out = VSet::new();
    for tok in s.split_whitespace() {
        let v: u32 = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("not a vertex id: {tok:?}"),
        })?;
        out.push(v);
    }
    if !is_sorted_set(&out) {
        return Err(Error::Parse {
            line,
            msg: "vertices must be strictly increasing".into(),
        });
    }
    Ok(out)
}

pub fn write_graph(g: &RGraph) -> String {
    let mut s = format!("{} {}\n", g.r, g.n);
    for e in g.edges() {
        write_set(&mut s, e);
    }
    s
}

fn write_set(s: &mut String, e: &[u32]) {
    for (i, v) in e.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s.push('\n');
}

pub fn parse_graph(text: &str) -> Result<RGraph> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header `r n`".into(),
    })?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    if nums.len() != 2 {
        return Err(Error::Parse {
            line: hl,
            msg: "header must be `r n`".into(),
        });
    }
    let r: usize = nums[0].parse().map_err(|_| Error::Parse {
        line: hl,
        msg: "bad r".into(),
    })?;
    let n: u32 = nums[1].parse().map_err(|_| Error::Parse {
        line: hl,
        msg: "bad n".into(),
    })?;
    if r == 0 {
        return Err(Error::Parse {
            line: hl,
            msg: "r must be positive".into(),
        });
    }
    let mut g = RGraph::new(n, r);
    for (ln, l) in lines {
        let e = parse_set(ln, l)?;
        if e.len() != r {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {r} vertices, found {}", e.len()),
            });
        }
        g.insert(e).map_err(|err| Error::Parse {
            line: ln,
            msg: err.to_string(),
        })?;
    }
    Ok(g)
}

pub fn write_cliques(cs: &[VSet]) -> String {
    let mut s = String::new();
    for c in cs {
        write_set(&mut s, c);
    }
    s
}

/// Parses a clique list; every line must have `q` vertices when `q` is given,
/// otherwise all lines must agree in length.
pub fn parse_cliques(text: &str, q: Option<usize>) -> Result<Vec<VSet>> {
    let mut out = Vec::new();
    let mut want = q;
    for (ln, l) in content_lines(text) {
        let c = parse_set(ln, l)?;
        match want {
            Some(w) if w != c.len() => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {w} vertices, found {}", c.len()),
                })
            }
            None => want = Some(c.len()),
            _ => {}
        }
        out.push(c);
    }
    Ok(out)
}

pub fn write_signed(v: &SparseVec) -> String {
    let mut s = String::new();
    for (k, x) in v.iter() {
        write!(s, "{}{}: ", if x < 0 { '-' } else { '+' }, x.abs()).unwrap();
        write_set(&mut s, k);
    }
    s
}

pub fn parse_signed(text: &str) -> Result<SparseVec> {
    let mut v = SparseVec::new();
    for (ln, l) in content_lines(text) {
        let (head, rest) = l.split_once(':').ok_or(Error::Parse {
            line: ln,
            msg: "expected `±mult: v1 …`".into(),
        })?;
        let head = head.trim();
        let (sign, mult) = match head.chars().next() {
            Some('+') => (1, &head[1..]),
            Some('-') => (-1, &head[1..]),
            _ => {
                return Err(Error::Parse {
                    line: ln,
                    msg: "multiplicity must start with + or -".into(),
                })
            }
        };
        let m: i64 = mult.trim().parse().map_err(|_| Error::Parse {
            line: ln,
            msg: format!("bad multiplicity {mult:?}"),
        })?;
        let k = parse_set(ln, rest)?;
        if k.is_empty() {
            return Err(Error::Parse {
                line: ln,
                msg: "empty vertex set".into(),
            });
        }
        v.add(k, sign * m);
    }
    Ok(v)
}
