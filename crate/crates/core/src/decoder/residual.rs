//! Residual errors after correction and their effect on the sites.

use fixedbitset::FixedBitSet;
use num_rational::Ratio;

use super::DecodeError;
use crate::lattice::{EdgeSet, Lattice, LatticeKind};

/// `true_errors` symmetric-difference the inferred correction, with the
/// relative correction parity of every site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub edges: EdgeSet,
    /// Bit per site; the site at the origin is always 0.
    pub site_labels: FixedBitSet,
}

impl Residual {
    pub fn label(&self, site: u32) -> bool {
        self.site_labels.contains(site as usize)
    }

    pub fn site_count(&self) -> usize {
        self.site_labels.len()
    }
}

/// Residual of a correction. Fails if the two sets have different syndromes.
pub fn residual(
    lattice: &Lattice,
    true_errors: &EdgeSet,
    inferred: &EdgeSet,
) -> Result<Residual, DecodeError> {
    let edges = true_errors.symmetric_difference(inferred);
    if !lattice.dual_boundary(&edges).is_clear() {
        return Err(DecodeError::SyndromeMismatch);
    }
    let site_labels = lattice.site_labels(&edges);
    Ok(Residual { edges, site_labels })
}

/// Probability that two independently chosen sites hold the same label.
pub fn agreement_probability(residual: &Residual) -> f64 {
    agreement_from_labels(&residual.site_labels)
}

pub(crate) fn agreement_from_labels(labels: &FixedBitSet) -> f64 {
    let total = labels.len() as f64;
    let p1 = labels.count_ones(..) as f64 / total;
    let p0 = 1.0 - p1;
    p0 * p0 + p1 * p1
}

/// Whether sites `a` and `b` end up with the same correction.
pub fn pair_agreement(residual: &Residual, a: u32, b: u32) -> bool {
    residual.label(a) == residual.label(b)
}

/// Sites cut off by the residual: on the plane those separated from the
/// origin corner, on a torus the smaller label class.
pub fn enclosed_sites(lattice: &Lattice, labels: &FixedBitSet) -> Vec<u32> {
    let ones = labels.count_ones(..);
    let take_ones = match lattice.kind() {
        LatticeKind::SquarePlanar => true,
        _ => ones <= labels.len() - ones,
    };
    (0..labels.len())
        .filter(|&s| labels.contains(s) == take_ones)
        .map(|s| s as u32)
        .collect()
}

/// Mean number of wrongly corrected sites when `candidate` is used for the
/// pair `p`, `q` and the true chain is a uniformly random minimal path.
pub fn expected_wrong_sites(
    lattice: &Lattice,
    p: u32,
    q: u32,
    candidate: &EdgeSet,
    cap: usize,
) -> Result<Ratio<u64>, DecodeError> {
    let paths = lattice.enumerate_minimal_paths(p, q, cap)?;
    let mut wrong = 0u64;
    for path in &paths {
        let labels = lattice.site_labels(&candidate.symmetric_difference(path));
        wrong += enclosed_sites(lattice, &labels).len() as u64;
    }
    Ok(Ratio::new(wrong, paths.len() as u64))
}
