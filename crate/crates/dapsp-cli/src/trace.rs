//! Deletion trace files.
//!
//! Line one is "n m". The next m lines list the initial edges, one
//! "E u v" per line. Everything after that is the event stream: "D u v"
//! deletes an edge, "Q u v" asks for one distance, "QA" asks for the
//! full matrix. Vertex ids are 0-based decimal. Blank lines and lines
//! starting with '#' are skipped on input and never written on output,
//! so serializing a parsed canonical file reproduces it byte for byte.

use std::collections::HashSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Delete(u32, u32),
    Query(u32, u32),
    QueryAll,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletionTrace {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
    pub events: Vec<TraceEvent>,
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("{0}")]
    Invalid(String),
}

/// Split one significant line into its fields, enforcing arity.
fn fields(lineno: usize, line: &str, want: usize) -> Result<Vec<&str>, TraceError> {
    let parts: Vec<&str> = line.split_ascii_whitespace().collect();
    if parts.len() != want {
        return Err(TraceError::Malformed(
            lineno,
            format!("expected {want} fields, found {}", parts.len()),
        ));
    }
    Ok(parts)
}

fn number(lineno: usize, tok: &str) -> Result<u32, TraceError> {
    tok.parse::<u32>()
        .map_err(|_| TraceError::Malformed(lineno, format!("bad number {tok:?}")))
}

impl DeletionTrace {
    /// Parse and validate a trace document.
    pub fn parse(text: &str) -> Result<DeletionTrace, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (lineno, header) = lines
            .next()
            .ok_or_else(|| TraceError::Invalid("empty trace".into()))?;
        let head = fields(lineno, header, 2)?;
        let n = number(lineno, head[0])?;
        let m = number(lineno, head[1])? as usize;

        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (lineno, line) = lines.next().ok_or_else(|| {
                TraceError::Invalid(format!("header promises {m} edges, file ends early"))
            })?;
            let f = fields(lineno, line, 3)?;
            if f[0] != "E" {
                return Err(TraceError::Malformed(
                    lineno,
                    format!("expected an E line, found {:?}", f[0]),
                ));
            }
            edges.push((number(lineno, f[1])?, number(lineno, f[2])?));
        }

        let mut events = Vec::new();
        for (lineno, line) in lines {
            let tag = line.split_ascii_whitespace().next().unwrap();
            let ev = match tag {
                "D" => {
                    let f = fields(lineno, line, 3)?;
                    TraceEvent::Delete(number(lineno, f[1])?, number(lineno, f[2])?)
                }
                "Q" => {
                    let f = fields(lineno, line, 3)?;
                    TraceEvent::Query(number(lineno, f[1])?, number(lineno, f[2])?)
                }
                "QA" => {
                    fields(lineno, line, 1)?;
                    TraceEvent::QueryAll
                }
                "E" => {
                    return Err(TraceError::Malformed(
                        lineno,
                        "edge line after the event stream began".into(),
                    ))
                }
                other => {
                    return Err(TraceError::Malformed(
                        lineno,
                        format!("unknown event tag {other:?}"),
                    ))
                }
            };
            events.push(ev);
        }

        let t = DeletionTrace { n, edges, events };
        t.validate()?;
        Ok(t)
    }

    /// Check the structural invariants: ids in range, no self loops, no
    /// duplicate edges, and every deletion naming a then-present edge.
    pub fn validate(&self) -> Result<(), TraceError> {
        let n = self.n;
        let check = |u: u32, v: u32, what: &str| -> Result<(), TraceError> {
            if u >= n || v >= n {
                return Err(TraceError::Invalid(format!(
                    "{what} ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(TraceError::Invalid(format!("{what} ({u}, {v}) is a self loop")));
            }
            Ok(())
        };

        let mut present: HashSet<(u32, u32)> = HashSet::with_capacity(self.edges.len());
        for &(u, v) in &self.edges {
            check(u, v, "edge")?;
            if !present.insert((u, v)) {
                return Err(TraceError::Invalid(format!("duplicate edge ({u}, {v})")));
            }
        }
        for ev in &self.events {
            match *ev {
                TraceEvent::Delete(u, v) => {
                    check(u, v, "deletion")?;
                    if !present.remove(&(u, v)) {
                        return Err(TraceError::Invalid(format!(
                            "deletion ({u}, {v}) names an edge that is not present"
                        )));
                    }
                }
                TraceEvent::Query(u, v) => {
                    if u >= n || v >= n {
                        return Err(TraceError::Invalid(format!(
                            "query ({u}, {v}) out of range for n = {n}"
                        )));
                    }
                }
                TraceEvent::QueryAll => {}
            }
        }
        Ok(())
    }

    /// Render the canonical text form.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.edges.len()).unwrap();
        for &(u, v) in &self.edges {
            writeln!(out, "E {u} {v}").unwrap();
        }
        for ev in &self.events {
            match *ev {
                TraceEvent::Delete(u, v) => writeln!(out, "D {u} {v}").unwrap(),
                TraceEvent::Query(u, v) => writeln!(out, "Q {u} {v}").unwrap(),
                TraceEvent::QueryAll => writeln!(out, "QA").unwrap(),
            }
        }
        out
    }

    pub fn deletions(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Delete(..)))
            .count()
    }
}
