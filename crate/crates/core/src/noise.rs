//! Scalar error algebra and random error sampling.

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{EdgeSet, Lattice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("probability {0} is outside [0, 1]")]
    NotAProbability(f64),
    #[error("need 0 < bits <= channels, got bits = {bits}, channels = {channels}")]
    BadEntropyTarget { bits: f64, channels: u32 },
    #[error("repetition count m must be odd and positive, got {0}")]
    BadRepetitions(u32),
    #[error("mu = {mu} disagrees with gamma * T0 = {product}")]
    InconsistentMemory { mu: f64, product: f64 },
}

fn check_probability(p: f64) -> Result<f64, NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(NoiseError::NotAProbability(p))
    }
}

/// `H2(p)` in bits; callers guarantee `p` in `[0, 1]`.
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64, NoiseError> {
    check_probability(p).map(h2)
}

/// The `x` in `(0, 1/2]` with `channels * H2(x) = bits`, found by bisection.
pub fn solve_entropy_threshold(bits: f64, channels: u32) -> Result<f64, NoiseError> {
    let c = channels as f64;
    if !(bits > 0.0 && channels > 0 && bits <= c) {
        return Err(NoiseError::BadEntropyTarget { bits, channels });
    }
    if bits == c {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (1e-12_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if c * h2(mid) < bits {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bit-flip threshold when each parity check reports the wrong value with
/// probability `eps_c`: the root of `2 H2(x) = 1 - H2(eps_c)`.
pub fn threshold_with_measurement_error(eps_c: f64) -> Result<f64, NoiseError> {
    check_probability(eps_c)?;
    if eps_c >= 0.5 {
        return Ok(0.0);
    }
    let bits = 1.0 - h2(eps_c);
    if bits <= 0.0 {
        return Ok(0.0);
    }
    solve_entropy_threshold(bits, 2)
}

/// Channel flip probability after folding in check errors, `eps_b + 3 eps_c`
/// capped at 1.
pub fn effective_flip_probability(eps_b: f64, eps_c: f64) -> Result<f64, NoiseError> {
    check_probability(eps_b)?;
    check_probability(eps_c)?;
    Ok((eps_b + 3.0 * eps_c).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub eps_b: f64,
    pub eps_c: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
    pub gamma: Option<f64>,
    pub t0: Option<f64>,
    pub m: u32,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            eps_b: 0.0,
            eps_c: 0.0,
            beta: 0.0,
            delta: 0.0,
            mu: 0.0,
            gamma: None,
            t0: None,
            m: 3,
        }
    }
}

impl NoiseParams {
    /// Gate, measurement and memory errors only, as used by the budget.
    pub fn hardware(beta: f64, delta: f64, mu: f64, m: u32) -> Self {
        NoiseParams { beta, delta, mu, m, ..Default::default() }
    }

    /// Sets `mu = gamma * T0`.
    pub fn with_memory_decay(mut self, gamma: f64, t0: f64) -> Self {
        self.gamma = Some(gamma);
        self.t0 = Some(t0);
        self.mu = gamma * t0;
        self
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for p in [self.eps_b, self.eps_c, self.beta, self.delta, self.mu] {
            check_probability(p)?;
        }
        if self.m.is_multiple_of(2) {
            return Err(NoiseError::BadRepetitions(self.m));
        }
        if let (Some(g), Some(t)) = (self.gamma, self.t0) {
            let product = g * t;
            if (product - self.mu).abs() > 1e-12 * product.abs().max(1.0) {
                return Err(NoiseError::InconsistentMemory { mu: self.mu, product });
            }
        }
        Ok(())
    }
}

/// One labelled term of the physical error budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetTerm {
    pub label: String,
    pub formula: String,
    pub value: f64,
    /// Parameters this term is proportional to.
    pub depends_on: Vec<String>,
    /// False when the accounting rule was only derived for a different `m`.
    pub calibrated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub eps_b_phys: f64,
    pub eps_p_phys: f64,
    #[serde(rename = "F0_pumped")]
    pub f0_pumped: f64,
    /// Terms whose plain sum is both `eps_b_phys` and `eps_p_phys`
    /// (before clamping to 1).
    pub components: Vec<BudgetTerm>,
}

/// Weight of the `(beta + delta)` measurement residual in the accumulated
/// bit-flip and phase error. With `beta = delta = mu` this closes the sum at
/// `8.5 beta` for three check rounds.
pub const MEASUREMENT_RESIDUAL_WEIGHT: f64 = 0.25;

/// Accumulated physical error per qubit from gates, measurements and memory.
pub fn error_budget(params: &NoiseParams) -> Result<ErrorBudget, NoiseError> {
    params.validate()?;
    let NoiseParams { beta, delta, mu, m, .. } = *params;
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let components = vec![
        BudgetTerm {
            label: "base:gates".into(),
            formula: "4*beta".into(),
            value: 4.0 * beta,
            depends_on: names(&["beta"]),
            calibrated: true,
        },
        BudgetTerm {
            label: "base:measurement".into(),
            formula: "2*delta".into(),
            value: 2.0 * delta,
            depends_on: names(&["delta"]),
            calibrated: true,
        },
        BudgetTerm {
            label: "base:memory".into(),
            formula: "mu/2".into(),
            value: 0.5 * mu,
            depends_on: names(&["mu"]),
            calibrated: true,
        },
        BudgetTerm {
            label: "repeated-checks".into(),
            formula: "m*beta/2".into(),
            value: m as f64 * beta / 2.0,
            depends_on: names(&["beta"]),
            calibrated: true,
        },
        BudgetTerm {
            label: "measurement-residual:gates".into(),
            formula: format!("{MEASUREMENT_RESIDUAL_WEIGHT}*beta"),
            value: MEASUREMENT_RESIDUAL_WEIGHT * beta,
            depends_on: names(&["beta"]),
            calibrated: m == 3,
        },
        BudgetTerm {
            label: "measurement-residual:measurement".into(),
            formula: format!("{MEASUREMENT_RESIDUAL_WEIGHT}*delta"),
            value: MEASUREMENT_RESIDUAL_WEIGHT * delta,
            depends_on: names(&["delta"]),
            calibrated: m == 3,
        },
    ];
    let total: f64 = components.iter().map(|c| c.value).sum();
    let eps = total.min(1.0);
    Ok(ErrorBudget {
        eps_b_phys: eps,
        eps_p_phys: eps,
        f0_pumped: (1.0 - 1.25 * beta - 0.75 * mu).max(0.0),
        components,
    })
}

/// Each edge flips independently with probability `eps_b`.
pub fn sample_edge_errors<R: Rng + ?Sized>(
    lattice: &Lattice,
    eps_b: f64,
    rng: &mut R,
) -> Result<EdgeSet, NoiseError> {
    check_probability(eps_b)?;
    let mut set = EdgeSet::empty(lattice.edge_count());
    fill_edge_errors(&mut set, eps_b, rng);
    Ok(set)
}

/// Resamples `set` in place; `eps_b` must already be a probability.
pub fn fill_edge_errors<R: Rng + ?Sized>(set: &mut EdgeSet, eps_b: f64, rng: &mut R) {
    set.clear();
    if eps_b <= 0.0 {
        return;
    }
    for e in 0..set.universe() {
        if rng.random_bool(eps_b) {
            set.insert(e);
        }
    }
}

/// Each parity-check site reports the wrong value with probability `eps_c`.
pub fn sample_check_errors<R: Rng + ?Sized>(
    lattice: &Lattice,
    eps_c: f64,
    rng: &mut R,
) -> Result<FixedBitSet, NoiseError> {
    check_probability(eps_c)?;
    let mut sites = FixedBitSet::with_capacity(lattice.site_count());
    if eps_c > 0.0 {
        for s in 0..lattice.site_count() {
            if rng.random_bool(eps_c) {
                sites.insert(s);
            }
        }
    }
    Ok(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeKind, LatticeSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.11).unwrap() - 0.499_916).abs() < 1e-5);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            assert!((h2(p) - h2(1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_thresholds() {
        let sq = solve_entropy_threshold(1.0, 2).unwrap();
        assert!((sq - 0.110).abs() < 5e-4, "{sq}");
        assert!((2.0 * h2(sq) - 1.0).abs() < 1e-8);
        let tri = solve_entropy_threshold(2.0, 3).unwrap();
        assert!((tri - 0.1735).abs() < 1e-3, "{tri}");
        assert_eq!(solve_entropy_threshold(2.0, 2).unwrap(), 0.5);
        assert!(solve_entropy_threshold(3.0, 2).is_err());
        assert!(solve_entropy_threshold(0.0, 2).is_err());
    }

    #[test]
    fn measurement_error_threshold() {
        assert_eq!(
            threshold_with_measurement_error(0.0).unwrap(),
            solve_entropy_threshold(1.0, 2).unwrap()
        );
        let x = threshold_with_measurement_error(0.11).unwrap();
        assert!((x - 0.041_702).abs() < 1e-5, "{x}");
        assert_eq!(threshold_with_measurement_error(0.5).unwrap(), 0.0);
        let mut last = 1.0;
        for k in 0..50 {
            let t = threshold_with_measurement_error(k as f64 / 100.0).unwrap();
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn effective_flip() {
        assert_eq!(effective_flip_probability(0.05, 0.0).unwrap(), 0.05);
        assert!((effective_flip_probability(0.05, 0.01).unwrap() - 0.08).abs() < 1e-15);
        assert_eq!(effective_flip_probability(0.9, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn budget_examples() {
        let b = 0.001;
        let budget = error_budget(&NoiseParams::hardware(b, b, b, 3)).unwrap();
        assert!(budget.eps_b_phys / b <= 8.5 + 1e-12);
        let sum: f64 = budget.components.iter().map(|c| c.value).sum();
        assert!((sum - budget.eps_b_phys).abs() < 1e-12);
        let zero = error_budget(&NoiseParams::hardware(0.0, 0.0, 0.0, 3)).unwrap();
        assert_eq!((zero.eps_b_phys, zero.eps_p_phys, zero.f0_pumped), (0.0, 0.0, 1.0));
        let f = error_budget(&NoiseParams::hardware(0.01, 0.0, 0.01, 3)).unwrap();
        assert!((f.f0_pumped - 0.98).abs() < 1e-12);
        assert!(error_budget(&NoiseParams::hardware(0.01, 0.0, 0.01, 2)).is_err());
        let m5 = error_budget(&NoiseParams::hardware(0.01, 0.0, 0.01, 5)).unwrap();
        assert!(m5.components.iter().any(|c| !c.calibrated));
    }

    #[test]
    fn zeroing_a_parameter_removes_its_terms() {
        let full = error_budget(&NoiseParams::hardware(0.003, 0.002, 0.001, 3)).unwrap();
        for (name, params) in [
            ("beta", NoiseParams::hardware(0.0, 0.002, 0.001, 3)),
            ("delta", NoiseParams::hardware(0.003, 0.0, 0.001, 3)),
            ("mu", NoiseParams::hardware(0.003, 0.002, 0.0, 3)),
        ] {
            let cut = error_budget(&params).unwrap();
            for (a, b) in full.components.iter().zip(&cut.components) {
                if a.depends_on.iter().any(|d| d == name) {
                    assert_eq!(b.value, 0.0);
                } else {
                    assert_eq!(a.value, b.value);
                }
            }
        }
    }

    #[test]
    fn memory_decay_sets_mu() {
        let p = NoiseParams::hardware(0.0, 0.0, 0.0, 3).with_memory_decay(0.5, 0.01);
        assert!((p.mu - 0.005).abs() < 1e-15);
        p.validate().unwrap();
        let mut bad = p;
        bad.mu = 0.2;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sampling_extremes_and_frequency() {
        let l = Lattice::new(LatticeSpec::new(LatticeKind::SquareTorus, 4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(sample_edge_errors(&l, 0.0, &mut rng).unwrap().is_empty());
        assert_eq!(sample_edge_errors(&l, 1.0, &mut rng).unwrap().count(), l.edge_count());
        assert!(sample_check_errors(&l, 0.0, &mut rng).unwrap().is_clear());
        assert_eq!(sample_check_errors(&l, 1.0, &mut rng).unwrap().count_ones(..), 16);
        let trials = 20_000;
        let p = 0.1;
        let mut hits = vec![0u32; l.edge_count()];
        for _ in 0..trials {
            for e in sample_edge_errors(&l, p, &mut rng).unwrap().iter() {
                hits[e] += 1;
            }
        }
        let band = 4.0 * (p * (1.0 - p) / trials as f64).sqrt();
        for h in hits {
            assert!((h as f64 / trials as f64 - p).abs() < band);
        }
    }
}
