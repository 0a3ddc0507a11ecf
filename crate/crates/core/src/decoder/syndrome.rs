//! Parity-check outputs and plaquette syndromes.
//!
//! On the planar lattice the bit entering at the corner site travels along
//! rows from the left column and along columns from the bottom row. Every
//! inner site compares its two incoming copies; sites on the left column or
//! bottom row receive a single copy and report +1. Tori have no such
//! propagation order, so their syndrome is read directly off the faces.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::DecodeError;
use crate::lattice::{EdgeSet, Lattice, LatticeKind, Orientation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome {
    /// Per-site outputs (+1 or -1); only defined on the planar lattice.
    pub parity_outputs: Option<Vec<i8>>,
    /// Plaquettes whose value is -1, ascending.
    pub defects: Vec<u32>,
}

/// Parity-check outputs of every site of a planar lattice.
pub fn parity_pattern(
    lattice: &Lattice,
    errors: &EdgeSet,
    check_errors: &FixedBitSet,
) -> Result<Vec<i8>, DecodeError> {
    if lattice.kind() != LatticeKind::SquarePlanar {
        return Err(DecodeError::Unsupported(
            "per-site parity outputs are only defined on the planar lattice",
        ));
    }
    let n = lattice.size();
    // bit carried along the bottom row and up the left column
    let mut bottom = vec![false; n];
    let mut left = vec![false; n];
    for x in 1..n {
        bottom[x] = bottom[x - 1] ^ errors.contains(lattice.edge_index(Orientation::Horizontal, x - 1, 0));
    }
    for y in 1..n {
        left[y] = left[y - 1] ^ errors.contains(lattice.edge_index(Orientation::Vertical, 0, y - 1));
    }
    let mut outputs = vec![1i8; n * n];
    // column copy arriving at (x, y) from below
    let mut column = bottom.clone();
    for y in 1..n {
        let mut row = left[y];
        for x in 0..n {
            column[x] ^= errors.contains(lattice.edge_index(Orientation::Vertical, x, y - 1));
            if x > 0 {
                row ^= errors.contains(lattice.edge_index(Orientation::Horizontal, x - 1, y));
                if row != column[x] {
                    outputs[y * n + x] = -1;
                }
            }
        }
    }
    for s in check_errors.ones() {
        outputs[s] = -outputs[s];
    }
    Ok(outputs)
}

/// Plaquette values as products of corner outputs.
pub fn plaquette_syndrome(lattice: &Lattice, outputs: &[i8]) -> Result<Syndrome, DecodeError> {
    if outputs.len() != lattice.site_count() {
        return Err(DecodeError::Unsupported("parity outputs must cover every site"));
    }
    let defects = (0..lattice.plaquette_count() as u32)
        .filter(|&p| {
            lattice
                .plaquette_corners(p)
                .iter()
                .map(|&s| outputs[s as usize])
                .product::<i8>()
                == -1
        })
        .collect();
    Ok(Syndrome { parity_outputs: Some(outputs.to_vec()), defects })
}

/// Syndrome of an error configuration on any lattice. Check errors flip
/// every plaquette touching the faulty site.
pub fn syndrome_of(
    lattice: &Lattice,
    errors: &EdgeSet,
    check_errors: &FixedBitSet,
) -> Result<Syndrome, DecodeError> {
    match lattice.kind() {
        LatticeKind::SquarePlanar => {
            let outputs = parity_pattern(lattice, errors, check_errors)?;
            plaquette_syndrome(lattice, &outputs)
        }
        kind => {
            if kind == LatticeKind::TriangularTorus && !check_errors.is_clear() {
                return Err(DecodeError::Unsupported(
                    "check errors are not modelled on the triangular lattice",
                ));
            }
            let mut faces = lattice.dual_boundary(errors);
            for s in check_errors.ones() {
                for &p in lattice.site_plaquettes(s as u32) {
                    faces.toggle(p as usize);
                }
            }
            Ok(Syndrome { parity_outputs: None, defects: faces.ones().map(|p| p as u32).collect() })
        }
    }
}
