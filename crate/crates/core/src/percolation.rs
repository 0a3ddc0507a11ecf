//! Pure-state links: twirling into a flip channel, and how far the
//! decoding protocol and bond percolation each reach in `phi0`.

use petgraph::unionfind::UnionFind;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::montecarlo::mean_and_stderr;
use crate::parallel::Executor;
use crate::stream::{labelled_key, trial_rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error("phi0 = {0} is outside [0.5, 1]")]
    BadLink(f64),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
}

/// `sqrt(phi0)|00> + sqrt(phi1)|11>` with `phi0 >= phi1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureLinkState {
    phi0: f64,
}

impl PureLinkState {
    pub fn new(phi0: f64) -> Result<Self, PercolationError> {
        if !(0.5..=1.0).contains(&phi0) {
            return Err(PercolationError::BadLink(phi0));
        }
        Ok(PureLinkState { phi0 })
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn phi1(&self) -> f64 {
        1.0 - self.phi0
    }

    /// Weights of the twirled mixture on `Phi+` and `Phi-`.
    pub fn twirled_weights(&self) -> (f64, f64) {
        let (a, b) = (self.phi0.sqrt(), self.phi1().sqrt());
        ((a + b).powi(2) / 2.0, (a - b).powi(2) / 2.0)
    }
}

/// Flip probability of the twirled link, `(sqrt(phi0) - sqrt(phi1))^2 / 2`.
pub fn twirl_to_flip_rate(link: PureLinkState) -> f64 {
    link.twirled_weights().1
}

pub const SQUARE_BOND_THRESHOLD: f64 = 0.5;

/// Largest `phi0` for which conversion to a Bell pair (success `2 phi1`)
/// still percolates on the square lattice.
pub fn percolation_bound() -> f64 {
    percolation_bound_for(SQUARE_BOND_THRESHOLD).expect("constant threshold is valid")
}

pub fn percolation_bound_for(p_star: f64) -> Result<f64, PercolationError> {
    if !(0.0..=1.0).contains(&p_star) {
        return Err(PercolationError::OutOfRange { name: "p_star", value: p_star, range: "[0, 1]" });
    }
    Ok(1.0 - p_star / 2.0)
}

/// The `phi0` whose twirled flip rate equals `eps_star`.
pub fn decoding_bound(eps_star: f64) -> Result<f64, PercolationError> {
    if !(0.0..=0.5).contains(&eps_star) {
        return Err(PercolationError::OutOfRange { name: "eps_star", value: eps_star, range: "[0, 0.5]" });
    }
    let rate = |phi0: f64| twirl_to_flip_rate(PureLinkState { phi0 });
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) < eps_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    pub crossing_probability: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Fraction of `N x N` site grids whose open bonds connect the left column
/// to the right column.
pub fn simulate_bond_percolation(
    n: usize,
    p: f64,
    trials: usize,
    seed: u64,
    executor: &Executor,
) -> Result<CrossingEstimate, PercolationError> {
    if n < 2 {
        return Err(PercolationError::OutOfRange { name: "N", value: n as f64, range: ">= 2" });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(PercolationError::OutOfRange { name: "p", value: p, range: "[0, 1]" });
    }
    let key = labelled_key(seed, &format!("bond-percolation/{n}/{}", p.to_bits()));
    let outcomes = executor.map_indexed(trials, || (), |_, t| {
        let mut rng = trial_rng(key, t as u64);
        let (left, right) = (n * n, n * n + 1);
        let mut uf = UnionFind::<usize>::new(n * n + 2);
        for y in 0..n {
            uf.union(left, y * n);
            uf.union(right, y * n + n - 1);
            for x in 0..n {
                let s = y * n + x;
                if x + 1 < n && rng.random_bool(p) {
                    uf.union(s, s + 1);
                }
                if y + 1 < n && rng.random_bool(p) {
                    uf.union(s, s + n);
                }
            }
        }
        if uf.equiv(left, right) { 1.0 } else { 0.0 }
    });
    let (mean, stderr) = if trials == 0 { (0.0, 0.0) } else { mean_and_stderr(&outcomes) };
    Ok(CrossingEstimate { n, p, trials, crossing_probability: mean, stderr, seed })
}
