//! Syndrome decoding: parity checks, defect matching, correction inference
//! and residual scoring.

pub mod blossom;
pub mod dump;
pub mod matching;
pub mod residual;
pub mod syndrome;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::lattice::{EdgeSet, Lattice, LatticeError};

pub use dump::DecodeDump;
pub use matching::{brute_force_matching, match_defect_list, MatchMode, Matching, Pair, Partner};
pub use residual::{
    agreement_probability, enclosed_sites, expected_wrong_sites, pair_agreement, residual, Residual,
};
pub use syndrome::{parity_pattern, plaquette_syndrome, syndrome_of, Syndrome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("odd number of defects ({0}) on a closed lattice")]
    OddDefectCount(usize),
    #[error("{count} defects exceed the exhaustive-search cap of {cap}")]
    TooManyDefects { count: usize, cap: usize },
    #[error("correction and errors have different syndromes")]
    SyndromeMismatch,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Minimum-weight perfect matching of the defects of `syndrome`.
pub fn match_defects(
    lattice: &Lattice,
    syndrome: &Syndrome,
    mode: MatchMode,
) -> Result<Matching, DecodeError> {
    match_defect_list(lattice, &syndrome.defects, mode)
}

/// Edges of the straight minimal path for every matched pair, summed mod 2.
pub fn infer_errors(lattice: &Lattice, matching: &Matching) -> EdgeSet {
    let mut inferred = EdgeSet::empty(lattice.edge_count());
    let mut path = Vec::new();
    toggle_correction(lattice, matching, &mut inferred, &mut path);
    inferred
}

fn toggle_correction(lattice: &Lattice, matching: &Matching, target: &mut EdgeSet, path: &mut Vec<u32>) {
    for pair in &matching.pairs {
        path.clear();
        match pair.b {
            Partner::Defect(b) => lattice.staircase_edges(pair.a, b, path),
            Partner::Boundary => lattice
                .boundary_edges(pair.a, path)
                .expect("boundary pairs only arise on the planar lattice"),
        }
        for &e in path.iter() {
            target.toggle(e as usize);
        }
    }
}

/// Every intermediate product of decoding one error configuration.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub syndrome: Syndrome,
    pub matching: Matching,
    pub inferred: EdgeSet,
    pub residual: Residual,
}

/// Full pipeline for one instance with perfect parity checks.
pub fn decode(lattice: &Lattice, errors: &EdgeSet, mode: MatchMode) -> Result<Decoded, DecodeError> {
    let checks = FixedBitSet::with_capacity(lattice.site_count());
    let syndrome = syndrome_of(lattice, errors, &checks)?;
    let matching = match_defects(lattice, &syndrome, mode)?;
    let inferred = infer_errors(lattice, &matching);
    let residual = residual(lattice, errors, &inferred)?;
    Ok(Decoded { syndrome, matching, inferred, residual })
}

/// Reusable buffers for scoring many instances on one lattice.
#[derive(Debug)]
pub struct Scratch {
    pub(crate) errors: EdgeSet,
    checks: FixedBitSet,
    labels: FixedBitSet,
    path: Vec<u32>,
}

impl Scratch {
    pub fn new(lattice: &Lattice) -> Self {
        Scratch {
            errors: EdgeSet::empty(lattice.edge_count()),
            checks: FixedBitSet::with_capacity(lattice.site_count()),
            labels: FixedBitSet::with_capacity(lattice.site_count()),
            path: Vec::new(),
        }
    }
}

/// Decodes the configuration held in `scratch.errors` and returns the
/// probability that two random sites agree afterwards.
pub(crate) fn score_in_place(
    lattice: &Lattice,
    scratch: &mut Scratch,
    mode: MatchMode,
) -> Result<f64, DecodeError> {
    let syndrome = syndrome_of(lattice, &scratch.errors, &scratch.checks)?;
    let matching = match_defects(lattice, &syndrome, mode)?;
    toggle_correction(lattice, &matching, &mut scratch.errors, &mut scratch.path);
    debug_assert!(lattice.dual_boundary(&scratch.errors).is_clear());
    lattice.site_labels_into(&scratch.errors, &mut scratch.labels);
    Ok(residual::agreement_from_labels(&scratch.labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeKind, LatticeSpec, Orientation};

    #[test]
    fn adjacent_defects_infer_the_shared_edge() {
        for kind in LatticeKind::ALL {
            let l = Lattice::new(LatticeSpec::new(kind, 6)).unwrap();
            let e = l.edge_index(Orientation::Vertical, 3, 2);
            let errors = EdgeSet::from_indices(l.edge_count(), [e]);
            let d = decode(&l, &errors, MatchMode::Exact).unwrap();
            assert_eq!(d.inferred, errors, "{kind}");
            assert!(d.residual.edges.is_empty());
        }
    }

    #[test]
    fn two_by_one_pair_infers_right_up_right() {
        let l = Lattice::new(LatticeSpec::new(LatticeKind::SquareTorus, 8)).unwrap();
        let (p, q) = (l.plaquette_at(2, 2), l.plaquette_at(4, 3));
        let m = match_defect_list(&l, &[p, q], MatchMode::Exact).unwrap();
        let inferred = infer_errors(&l, &m);
        let expect = EdgeSet::from_indices(
            l.edge_count(),
            [
                l.edge_index(Orientation::Vertical, 3, 2),
                l.edge_index(Orientation::Horizontal, 3, 3),
                l.edge_index(Orientation::Vertical, 4, 3),
            ],
        );
        assert_eq!(inferred, expect);
        assert!(infer_errors(&l, &Matching::default()).is_empty());
    }
}
