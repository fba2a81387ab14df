//! Plain-text instance and weight files.
//!
//! ```text
//! uniform <n> <k>
//!
//! partition <n>
//! block <capacity> <ids...>
//!
//! graphic <n_vertices>
//! edge <id> <u> <v>
//!
//! laminar <n>
//! set <capacity> <ids...>
//!
//! transversal <n>
//! left <ids...>
//! ```
//!
//! Blank lines and `#` comments are ignored. Weight files hold one
//! `<element_id> <weight>` pair per line.

use std::fmt::Write as _;
use std::path::Path;

use super::{ElementId, LaminarSet, MatroidInstance, WeightedGroundSet};
use crate::error::{Error, Result};

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found '{token}'")))
}

fn id_list(line: usize, tokens: &[&str]) -> Result<Vec<ElementId>> {
    tokens
        .iter()
        .map(|t| number(line, t, "element id").map(ElementId))
        .collect()
}

fn arity(line: usize, tokens: &[&str], want: usize, form: &str) -> Result<()> {
    if tokens.len() == want {
        Ok(())
    } else {
        Err(Error::parse(line, format!("expected '{form}'")))
    }
}

pub fn parse_instance(text: &str) -> Result<MatroidInstance> {
    let mut recs = records(text);
    let (hline, header) = recs.next().ok_or_else(|| Error::parse(1, "empty instance file"))?;
    let body: Vec<(usize, Vec<&str>)> = recs.collect();
    let expect_body = |keyword: &str| -> Result<()> {
        match body.iter().find(|(_, t)| t[0] != keyword) {
            Some((line, t)) => Err(Error::parse(
                *line,
                format!("unexpected record '{}', expected '{keyword}'", t[0]),
            )),
            None => Ok(()),
        }
    };
    let wrap = |err: Error| match err {
        Error::Parse { .. } => err,
        other => Error::parse(hline, other.to_string()),
    };

    match header[0] {
        "uniform" => {
            arity(hline, &header, 3, "uniform <n> <k>")?;
            if let Some((line, _)) = body.first() {
                return Err(Error::parse(*line, "uniform instances take no body"));
            }
            MatroidInstance::uniform(
                number(hline, header[1], "n")?,
                number(hline, header[2], "k")?,
            )
        }
        "partition" => {
            arity(hline, &header, 2, "partition <n>")?;
            expect_body("block")?;
            let mut blocks = Vec::new();
            for (line, t) in &body {
                if t.len() < 2 {
                    return Err(Error::parse(*line, "expected 'block <capacity> <ids...>'"));
                }
                blocks.push((number(*line, t[1], "capacity")?, id_list(*line, &t[2..])?));
            }
            MatroidInstance::partition(number(hline, header[1], "n")?, blocks).map_err(wrap)
        }
        "graphic" => {
            arity(hline, &header, 2, "graphic <n_vertices>")?;
            expect_body("edge")?;
            let mut edges: Vec<Option<(usize, usize)>> = vec![None; body.len()];
            for (line, t) in &body {
                arity(*line, t, 4, "edge <id> <u> <v>")?;
                let id: usize = number(*line, t[1], "edge id")?;
                let slot = edges.get_mut(id).ok_or_else(|| {
                    Error::parse(*line, format!("edge id {id} out of range 0..{}", body.len()))
                })?;
                if slot.is_some() {
                    return Err(Error::parse(*line, format!("duplicate edge id {id}")));
                }
                *slot = Some((number(*line, t[2], "vertex")?, number(*line, t[3], "vertex")?));
            }
            let edges = edges.into_iter().map(|e| e.expect("ids 0..m each seen once")).collect();
            MatroidInstance::graphic(number(hline, header[1], "vertex count")?, edges)
                .map_err(wrap)
        }
        "laminar" => {
            arity(hline, &header, 2, "laminar <n>")?;
            expect_body("set")?;
            let mut sets = Vec::new();
            for (line, t) in &body {
                if t.len() < 2 {
                    return Err(Error::parse(*line, "expected 'set <capacity> <ids...>'"));
                }
                sets.push(LaminarSet {
                    capacity: number(*line, t[1], "capacity")?,
                    members: id_list(*line, &t[2..])?,
                });
            }
            MatroidInstance::laminar(number(hline, header[1], "n")?, sets).map_err(wrap)
        }
        "transversal" => {
            arity(hline, &header, 2, "transversal <n>")?;
            expect_body("left")?;
            let left = body
                .iter()
                .map(|(line, t)| id_list(*line, &t[1..]))
                .collect::<Result<Vec<_>>>()?;
            MatroidInstance::transversal(number(hline, header[1], "n")?, left).map_err(wrap)
        }
        other => Err(Error::parse(hline, format!("unknown matroid family '{other}'"))),
    }
}

fn join(ids: &[ElementId]) -> String {
    ids.iter().map(|e| format!(" {e}")).collect()
}

pub fn format_instance(m: &MatroidInstance) -> String {
    let mut out = String::new();
    match m {
        MatroidInstance::Uniform(u) => {
            let _ = writeln!(out, "uniform {} {}", super::Matroid::ground_size(u), u.k());
        }
        MatroidInstance::Partition(p) => {
            let _ = writeln!(out, "partition {}", super::Matroid::ground_size(p));
            for (cap, members) in p.blocks() {
                let _ = writeln!(out, "block {cap}{}", join(&members));
            }
        }
        MatroidInstance::Graphic(g) => {
            let _ = writeln!(out, "graphic {}", g.vertices());
            for (i, (u, v)) in g.edges().iter().enumerate() {
                let _ = writeln!(out, "edge {i} {u} {v}");
            }
        }
        MatroidInstance::Laminar(l) => {
            let _ = writeln!(out, "laminar {}", super::Matroid::ground_size(l));
            for s in l.sets() {
                let _ = writeln!(out, "set {}{}", s.capacity, join(&s.members));
            }
        }
        MatroidInstance::Transversal(t) => {
            let _ = writeln!(out, "transversal {}", super::Matroid::ground_size(t));
            for right in t.left() {
                let _ = writeln!(out, "left{}", join(right));
            }
        }
    }
    out
}

/// Parses `<element_id> <weight>` lines. Ids must be exactly `0..n`.
pub fn parse_weights(text: &str) -> Result<WeightedGroundSet> {
    let mut pairs = Vec::new();
    for (line, t) in records(text) {
        arity(line, &t, 2, "<element_id> <weight>")?;
        let id: usize = number(line, t[0], "element id")?;
        let w: f64 = number(line, t[1], "weight")?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::parse(line, format!("weight must be positive, got {w}")));
        }
        pairs.push((line, id, w));
    }
    if pairs.is_empty() {
        return Err(Error::NoElements);
    }
    let n = pairs.len();
    let mut weights = vec![None; n];
    for (line, id, w) in pairs {
        let slot = weights.get_mut(id).ok_or_else(|| {
            Error::parse(line, format!("element id {id} out of range for {n} weights"))
        })?;
        if slot.replace(w).is_some() {
            return Err(Error::parse(line, format!("duplicate weight for element {id}")));
        }
    }
    WeightedGroundSet::new(weights.into_iter().map(|w| w.expect("all ids seen")).collect())
}

pub fn format_weights(w: &WeightedGroundSet) -> String {
    w.weights()
        .iter()
        .enumerate()
        .map(|(i, x)| format!("{i} {x}\n"))
        .collect()
}

pub fn read_instance(path: &Path) -> Result<MatroidInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn read_weights(path: &Path) -> Result<WeightedGroundSet> {
    parse_weights(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{ids, Matroid};

    #[test]
    fn parses_every_family() {
        let u = parse_instance("uniform 4 2\n").unwrap();
        assert_eq!(u.full_rank(), 2);

        let p = parse_instance("partition 4\nblock 1 0 1\nblock 1 2 3\n").unwrap();
        assert_eq!(p.rank(&ids(&[0, 1, 2])).unwrap(), 2);

        let g = parse_instance("# triangle\ngraphic 3\nedge 0 0 1\nedge 2 0 2\nedge 1 1 2\n")
            .unwrap();
        assert_eq!(g.full_rank(), 2);

        let l = parse_instance("laminar 4\nset 2 0 1 2 3\nset 1 0 1\n").unwrap();
        assert_eq!(l.rank(&ids(&[0, 1, 2])).unwrap(), 2);

        let t = parse_instance("transversal 2\nleft 0 1\nleft 0\n").unwrap();
        assert!(t.is_independent(&ids(&[0, 1])).unwrap());
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_instance("partition 3\nblock 1 0 1\nblock x 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_instance("graphic 2\nedge 0 0 1\nedge 0 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_instance("matrix 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn weights_file() {
        let w = parse_weights("1 7\n0 10\n2 5\n3 1\n").unwrap();
        assert_eq!(w.weights(), &[10.0, 7.0, 5.0, 1.0]);
        assert!(matches!(parse_weights("# nothing\n\n"), Err(Error::NoElements)));
        assert!(matches!(
            parse_weights("0 1\n0 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_weights("0 -1\n").is_err());
    }
}
