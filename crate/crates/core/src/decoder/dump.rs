//! Line-oriented text dump of one decoded instance.
//!
//! ```text
//! # square-planar N=6
//! ERRORS: 12 40
//! PARITY: 15 16 17
//! DEFECTS: 7 8 12
//! MATCHING: 7-8 12-B
//! INFERRED: 12 40
//! RESIDUAL:
//! ```
//!
//! `PARITY` lists the sites reporting -1, or `n/a` on lattices without
//! per-site outputs. `MATCHING` pairs are `a-b` for two defects and `a-B`
//! for a defect matched to the boundary. Every other section lists indices
//! in ascending order.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Decoded, Partner};
use crate::lattice::{EdgeSet, LatticeSpec};

pub const SECTIONS: [&str; 6] = ["ERRORS", "PARITY", "DEFECTS", "MATCHING", "INFERRED", "RESIDUAL"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeDump {
    pub errors: Vec<usize>,
    pub parity: Option<Vec<usize>>,
    pub defects: Vec<u32>,
    pub matching: Vec<(u32, Option<u32>)>,
    pub inferred: Vec<usize>,
    pub residual: Vec<usize>,
}

impl DecodeDump {
    pub fn new(errors: &EdgeSet, decoded: &Decoded) -> Self {
        DecodeDump {
            errors: errors.iter().collect(),
            parity: decoded.syndrome.parity_outputs.as_ref().map(|out| {
                out.iter().enumerate().filter(|(_, &o)| o < 0).map(|(s, _)| s).collect()
            }),
            defects: decoded.syndrome.defects.clone(),
            matching: decoded
                .matching
                .pairs
                .iter()
                .map(|p| match p.b {
                    Partner::Defect(b) => (p.a, Some(b)),
                    Partner::Boundary => (p.a, None),
                })
                .collect(),
            inferred: decoded.inferred.iter().collect(),
            residual: decoded.residual.edges.iter().collect(),
        }
    }

    pub fn render(&self, spec: LatticeSpec) -> String {
        fn list<T: ToString>(items: &[T]) -> String {
            items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
        }
        let mut out = String::new();
        let _ = writeln!(out, "# {} N={}", spec.kind, spec.size);
        let parity = match &self.parity {
            Some(sites) => list(sites),
            None => "n/a".to_string(),
        };
        let matching: Vec<String> = self
            .matching
            .iter()
            .map(|(a, b)| match b {
                Some(b) => format!("{a}-{b}"),
                None => format!("{a}-B"),
            })
            .collect();
        let bodies = [
            list(&self.errors),
            parity,
            list(&self.defects),
            matching.join(" "),
            list(&self.inferred),
            list(&self.residual),
        ];
        for (name, body) in SECTIONS.iter().zip(bodies) {
            if body.is_empty() {
                let _ = writeln!(out, "{name}:");
            } else {
                let _ = writeln!(out, "{name}: {body}");
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed dump line {line}: {reason}")]
pub struct DumpParseError {
    pub line: usize,
    pub reason: String,
}

impl FromStr for DecodeDump {
    type Err = DumpParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut sections: Vec<Option<&str>> = vec![None; SECTIONS.len()];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| DumpParseError { line: idx + 1, reason: reason.to_string() };
            let (name, body) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let slot = SECTIONS.iter().position(|s| *s == name).ok_or_else(|| bad("unknown section"))?;
            if sections[slot].is_some() {
                return Err(bad("repeated section"));
            }
            sections[slot] = Some(body.trim());
        }
        let missing = |name: &str| DumpParseError { line: 0, reason: format!("missing section {name}") };
        let get = |i: usize| sections[i].ok_or_else(|| missing(SECTIONS[i]));
        fn numbers<T: FromStr>(body: &str, section: &str) -> Result<Vec<T>, DumpParseError> {
            body.split_whitespace()
                .map(|t| {
                    t.parse().map_err(|_| DumpParseError {
                        line: 0,
                        reason: format!("bad index `{t}` in {section}"),
                    })
                })
                .collect()
        }
        let parity_body = get(1)?;
        let parity = if parity_body == "n/a" { None } else { Some(numbers(parity_body, "PARITY")?) };
        let mut matching = Vec::new();
        for token in get(3)?.split_whitespace() {
            let bad = || DumpParseError { line: 0, reason: format!("bad pair `{token}`") };
            let (a, b) = token.split_once('-').ok_or_else(bad)?;
            let a = a.parse().map_err(|_| bad())?;
            let b = if b == "B" { None } else { Some(b.parse().map_err(|_| bad())?) };
            matching.push((a, b));
        }
        Ok(DecodeDump {
            errors: numbers(get(0)?, "ERRORS")?,
            parity,
            defects: numbers(get(2)?, "DEFECTS")?,
            matching,
            inferred: numbers(get(4)?, "INFERRED")?,
            residual: numbers(get(5)?, "RESIDUAL")?,
        })
    }
}
