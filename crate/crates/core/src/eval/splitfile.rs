//! Text form of an [`EvalSplit`]:
//!
//! ```text
//! # multisage split v1
//! nodes 11867
//! seed 42
//! marked 3 17 25 …
//! train intra 0 5 1
//! test inter 3 812 1
//! test intra 17 25 0
//! ```
//!
//! Each record is `<train|test> <intra|inter> u v <1|0>`, with `1` for an
//! existing link and `0` for a negative pair. Records of each list keep their
//! order, so a read-back split is identical to the written one.

use std::io::{BufRead, Write};

use super::split::Labeled;
use super::{EvalError, EvalSplit};
use crate::graph::MultiplexGraph;

const HEADER: &str = "# multisage split v1";

pub fn write_split<W: Write>(
    mut w: W,
    split: &EvalSplit,
    g: &MultiplexGraph,
) -> Result<(), EvalError> {
    writeln!(w, "{HEADER}")?;
    writeln!(w, "nodes {}", g.node_count())?;
    writeln!(w, "seed {}", split.seed)?;
    write!(w, "marked")?;
    for m in &split.marked_nodes {
        write!(w, " {m}")?;
    }
    writeln!(w)?;
    let kind = |u: usize, v: usize| {
        if g.layer_of(u) == g.layer_of(v) {
            "intra"
        } else {
            "inter"
        }
    };
    let lists: [Labeled<'_, u8>; 7] = [
        ("train", &split.train_pos_intra, 1),
        ("train", &split.train_pos_inter, 1),
        ("test", &split.test_pos_intra, 1),
        ("test", &split.test_pos_inter, 1),
        ("train", &split.train_neg, 0),
        ("test", &split.test_neg_intra, 0),
        ("test", &split.test_neg_inter, 0),
    ];
    for (set, pairs, label) in lists {
        for &(u, v) in pairs {
            writeln!(w, "{set} {} {u} {v} {label}", kind(u, v))?;
        }
    }
    Ok(())
}

/// Reads a split written by [`write_split`] and checks it against `g`.
pub fn read_split<R: BufRead>(r: R, g: &MultiplexGraph) -> Result<EvalSplit, EvalError> {
    let mut split = EvalSplit {
        marked_nodes: Vec::new(),
        train_pos_intra: Vec::new(),
        train_pos_inter: Vec::new(),
        test_pos_intra: Vec::new(),
        test_pos_inter: Vec::new(),
        train_neg: Vec::new(),
        test_neg_intra: Vec::new(),
        test_neg_inter: Vec::new(),
        seed: 0,
    };
    let mut last_line = 0;
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = line?;
        let err = |message: String| EvalError::SplitFile {
            line: line_no,
            message,
        };
        if line_no == 1 {
            if line.trim() != HEADER {
                return Err(err(format!("expected {HEADER:?}")));
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<u64>().map_err(|e| err(format!("{s:?}: {e}")));
        match fields.as_slice() {
            [] => {}
            [c, ..] if c.starts_with('#') => {}
            ["nodes", n] => {
                if num(n)? as usize != g.node_count() {
                    return Err(err(format!(
                        "split is for {n} replicas, graph has {}",
                        g.node_count()
                    )));
                }
            }
            ["seed", s] => split.seed = num(s)?,
            ["marked", rest @ ..] => {
                for m in rest {
                    split.marked_nodes.push(num(m)? as usize);
                }
            }
            [set, kind, u, v, label] => {
                let pair = (num(u)? as usize, num(v)? as usize);
                if pair.0 >= g.node_count() || pair.1 >= g.node_count() {
                    return Err(err(format!("replica out of range in {pair:?}")));
                }
                let list = match (*set, *kind, *label) {
                    ("train", "intra", "1") => &mut split.train_pos_intra,
                    ("train", "inter", "1") => &mut split.train_pos_inter,
                    ("test", "intra", "1") => &mut split.test_pos_intra,
                    ("test", "inter", "1") => &mut split.test_pos_inter,
                    ("train", "intra" | "inter", "0") => &mut split.train_neg,
                    ("test", "intra", "0") => &mut split.test_neg_intra,
                    ("test", "inter", "0") => &mut split.test_neg_inter,
                    _ => return Err(err(format!("unknown record {line:?}"))),
                };
                if (g.layer_of(pair.0) == g.layer_of(pair.1)) != (*kind == "intra") {
                    return Err(err(format!("{pair:?} is not an {kind}-layer pair")));
                }
                list.push(pair);
            }
            _ => return Err(err(format!("cannot parse {line:?}"))),
        }
    }
    if last_line == 0 {
        return Err(EvalError::SplitFile {
            line: 0,
            message: "empty split file".into(),
        });
    }
    split.validate(g).map_err(|message| EvalError::SplitFile {
        line: last_line,
        message,
    })?;
    Ok(split)
}
