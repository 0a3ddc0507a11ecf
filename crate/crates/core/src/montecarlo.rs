//! Monte Carlo estimation of decoding fidelity, its large-size limit, the
//! small-error law and the threshold crossing.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{score_in_place, DecodeError, MatchMode, Scratch};
use crate::lattice::{Lattice, LatticeError, LatticeKind, LatticeSpec};
use crate::noise::fill_edge_errors;
use crate::parallel::Executor;
use crate::stream::{point_key, trial_rng};

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("eps = {eps}: need at least {need} lattice sizes, found {found}")]
    InsufficientSizes { eps: f64, need: usize, found: usize },
    #[error("need curves for at least {need} lattice sizes, found {found}")]
    TooFewCurves { need: usize, found: usize },
    #[error("need at least {need} knots with 0 < eps <= {eps_max}, found {found}")]
    InsufficientKnots { need: usize, found: usize, eps_max: f64 },
    #[error("P_inf model is not defined at eps = {0}")]
    OutOfDomain(f64),
    #[error("no crossing of consecutive-size curves in the grid")]
    NoCrossing,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub spec: LatticeSpec,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub mode: MatchMode,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.trials == 0 {
            return Err(McError::Config("trials must be positive".into()));
        }
        if self.eps_grid.is_empty() {
            return Err(McError::Config("empty eps grid".into()));
        }
        if self.eps_grid.iter().any(|e| !(0.0..=0.5).contains(e)) {
            return Err(McError::Config("eps values must lie in [0, 0.5]".into()));
        }
        if self.eps_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(McError::Config("eps grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// One estimated point `P_N(eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub kind: LatticeKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub eps_b: f64,
    pub trials: usize,
    pub p_agree: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Runs `trials` independent decoding instances at one error rate.
pub fn run_point(
    lattice: &Lattice,
    eps_b: f64,
    trials: usize,
    seed: u64,
    executor: &Executor,
    mode: MatchMode,
) -> Result<PointEstimate, McError> {
    if trials == 0 {
        return Err(McError::Config("trials must be positive".into()));
    }
    if !(0.0..=1.0).contains(&eps_b) {
        return Err(McError::Config(format!("eps {eps_b} is not a probability")));
    }
    let key = point_key(seed, lattice.spec(), eps_b);
    let scores = executor.map_indexed(
        trials,
        || Scratch::new(lattice),
        |scratch, t| {
            let mut rng = trial_rng(key, t as u64);
            fill_edge_errors(&mut scratch.errors, eps_b, &mut rng);
            score_in_place(lattice, scratch, mode)
        },
    );
    let scores = scores.into_iter().collect::<Result<Vec<f64>, _>>()?;
    let (mean, stderr) = mean_and_stderr(&scores);
    Ok(PointEstimate {
        kind: lattice.kind(),
        n: lattice.size(),
        eps_b,
        trials,
        p_agree: mean,
        stderr,
        seed,
    })
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`),
/// summed in input order.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<PointEstimate>, McError> {
    config.validate()?;
    let lattice = Lattice::new(config.spec)?;
    let executor = Executor::new(config.workers);
    config
        .eps_grid
        .iter()
        .map(|&eps| run_point(&lattice, eps, config.trials, config.master_seed, &executor, config.mode))
        .collect()
}

/// Parses `start:stop:step` (inclusive stop) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, McError> {
    let bad = || McError::Config(format!("bad grid `{text}`"));
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest.split_once(':').ok_or_else(bad)?;
        let (start, stop, step): (f64, f64, f64) = (
            start.trim().parse().map_err(|_| bad())?,
            stop.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // round to the grid's decimal resolution so values print cleanly
        Ok((0..=count).map(|i| round_grid(start + i as f64 * step)).collect())
    } else {
        text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
    }
}

fn round_grid(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

/// Sorted union of grids without duplicates.
pub fn merge_grids(grids: &[Vec<f64>]) -> Vec<f64> {
    let mut all: Vec<f64> = grids.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    all
}

pub const CSV_HEADER: [&str; 7] = ["kind", "N", "eps_b", "trials", "p_agree", "stderr", "seed"];

pub fn write_csv<W: Write>(out: W, points: &[PointEstimate]) -> Result<(), McError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.kind.as_str().to_string(),
            p.n.to_string(),
            p.eps_b.to_string(),
            p.trials.to_string(),
            p.p_agree.to_string(),
            p.stderr.to_string(),
            p.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<PointEstimate>, McError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(McError::Config(format!("unexpected sweep header {header:?}")));
    }
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Large-size fidelity `P_inf(eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PinfModel {
    /// `1 - c eps^2`, only for `eps <= 0.05`.
    QuadraticSmallEps { coefficient: f64 },
    /// Linear interpolation between knots. Below the first knot the
    /// quadratic law with `fallback_coefficient` is used when given,
    /// otherwise a straight line from `(0, 1)`.
    TableInterpolated {
        knots: Vec<PinfKnot>,
        fallback_coefficient: Option<f64>,
        fit_form: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinfKnot {
    pub eps: f64,
    pub pinf: f64,
    /// Finite-size slope `a` of `P_N = P_inf + a / N`.
    pub slope: f64,
    pub sizes: usize,
}

pub const QUADRATIC_DOMAIN: f64 = 0.05;

impl PinfModel {
    pub fn evaluate(&self, eps: f64) -> Result<f64, McError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(McError::OutOfDomain(eps));
        }
        match self {
            PinfModel::QuadraticSmallEps { coefficient } => {
                if eps > QUADRATIC_DOMAIN {
                    return Err(McError::OutOfDomain(eps));
                }
                Ok(1.0 - coefficient * eps * eps)
            }
            PinfModel::TableInterpolated { knots, fallback_coefficient, .. } => {
                let first = knots.first().ok_or(McError::OutOfDomain(eps))?;
                let last = knots.last().unwrap();
                if eps > last.eps {
                    return Err(McError::OutOfDomain(eps));
                }
                if eps < first.eps {
                    return Ok(match fallback_coefficient {
                        Some(c) => 1.0 - c * eps * eps,
                        None => 1.0 - (1.0 - first.pinf) * eps / first.eps,
                    });
                }
                let i = knots.partition_point(|k| k.eps <= eps).saturating_sub(1);
                if i + 1 >= knots.len() {
                    return Ok(knots[i].pinf);
                }
                let (a, b) = (knots[i], knots[i + 1]);
                let t = (eps - a.eps) / (b.eps - a.eps);
                Ok(a.pinf + t * (b.pinf - a.pinf))
            }
        }
    }

    /// Parses `quadratic:C`.
    pub fn parse_quadratic(text: &str) -> Option<PinfModel> {
        let c = text.strip_prefix("quadratic:")?.parse().ok()?;
        Some(PinfModel::QuadraticSmallEps { coefficient: c })
    }
}

const MIN_SIZES: usize = 3;

/// Least-squares fit of `P_N = P_inf + a / N` at every error rate.
/// `P_inf` is clamped to `[1/2, 1]`, the range of an agreement probability.
pub fn extrapolate_pinf(estimates: &[PointEstimate]) -> Result<PinfModel, McError> {
    let mut by_eps: BTreeMap<u64, Vec<&PointEstimate>> = BTreeMap::new();
    for e in estimates {
        by_eps.entry(round_grid(e.eps_b).to_bits()).or_default().push(e);
    }
    let mut knots = Vec::new();
    for (bits, group) in by_eps {
        let eps = f64::from_bits(bits);
        let mut sizes: Vec<usize> = group.iter().map(|e| e.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.len() < MIN_SIZES {
            return Err(McError::InsufficientSizes { eps, need: MIN_SIZES, found: sizes.len() });
        }
        let xs: Vec<f64> = group.iter().map(|e| 1.0 / e.n as f64).collect();
        let ys: Vec<f64> = group.iter().map(|e| e.p_agree).collect();
        let (intercept, slope) = linear_fit(&xs, &ys);
        knots.push(PinfKnot { eps, pinf: intercept.clamp(0.5, 1.0), slope, sizes: sizes.len() });
    }
    knots.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    Ok(PinfModel::TableInterpolated {
        knots,
        fallback_coefficient: None,
        fit_form: "P_N = P_inf + a/N".into(),
    })
}

/// Ordinary least squares `y = a + b x`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallEpsFit {
    pub coefficient: f64,
    pub eps_max: f64,
    pub knots_used: usize,
    /// Residual norm relative to the norm of `1 - P_inf`.
    pub relative_residual: f64,
    pub poor_fit: bool,
}

pub const POOR_FIT_RESIDUAL: f64 = 0.1;

/// Least-squares `c` in `P_inf = 1 - c eps^2` over knots with
/// `0 < eps <= eps_max`.
pub fn fit_small_eps_coefficient(model: &PinfModel, eps_max: f64) -> Result<SmallEpsFit, McError> {
    let knots: Vec<(f64, f64)> = match model {
        PinfModel::TableInterpolated { knots, .. } => knots
            .iter()
            .filter(|k| k.eps > 0.0 && k.eps <= eps_max + 1e-12)
            .map(|k| (k.eps, k.pinf))
            .collect(),
        PinfModel::QuadraticSmallEps { .. } => Vec::new(),
    };
    if knots.len() < 4 {
        return Err(McError::InsufficientKnots { need: 4, found: knots.len(), eps_max });
    }
    let sxx: f64 = knots.iter().map(|(x, _)| x.powi(4)).sum();
    let sxy: f64 = knots.iter().map(|(x, p)| x * x * (1.0 - p)).sum();
    let c = sxy / sxx;
    let resid: f64 = knots.iter().map(|(x, p)| (1.0 - p - c * x * x).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = knots.iter().map(|(_, p)| (1.0 - p).powi(2)).sum::<f64>().sqrt();
    let relative = if norm > 0.0 { resid / norm } else { 0.0 };
    Ok(SmallEpsFit {
        coefficient: c,
        eps_max,
        knots_used: knots.len(),
        relative_residual: relative,
        poor_fit: relative > POOR_FIT_RESIDUAL,
    })
}

/// Crossing of one pair of consecutive sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub n_small: usize,
    pub n_large: usize,
    pub eps: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub eps_star: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub crossings: Vec<Crossing>,
}

/// Mean crossing of consecutive-size curves `P_N(eps)`.
///
/// For each pair the difference `D = P_large - P_small` is taken on the
/// shared grid. Among the grid intervals where `D` turns from non-negative
/// to negative, the one that best separates positive from negative `D`
/// (each point weighted by its inverse standard error) is kept, and the
/// crossing is found by linear interpolation. The interval runs from the
/// smallest to the largest crossing, widened by each crossing's own
/// uncertainty `sigma_D / |slope|`.
pub fn estimate_threshold(points: &[PointEstimate]) -> Result<ThresholdEstimate, McError> {
    let mut curves: BTreeMap<usize, BTreeMap<u64, &PointEstimate>> = BTreeMap::new();
    for p in points {
        curves.entry(p.n).or_default().insert(round_grid(p.eps_b).to_bits(), p);
    }
    if curves.len() < MIN_SIZES {
        return Err(McError::TooFewCurves { need: MIN_SIZES, found: curves.len() });
    }
    let sizes: Vec<usize> = curves.keys().copied().collect();
    let mut crossings = Vec::new();
    for pair in sizes.windows(2) {
        let (small, large) = (&curves[&pair[0]], &curves[&pair[1]]);
        let shared: Vec<(f64, f64, f64)> = small
            .iter()
            .filter_map(|(bits, a)| {
                large.get(bits).map(|b| {
                    let sigma = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
                    (f64::from_bits(*bits), b.p_agree - a.p_agree, sigma)
                })
            })
            .collect();
        if let Some(c) = pair_crossing(&shared) {
            crossings.push(Crossing { n_small: pair[0], n_large: pair[1], eps: c.0, sigma: c.1 });
        }
    }
    if crossings.is_empty() {
        return Err(McError::NoCrossing);
    }
    let eps_star = crossings.iter().map(|c| c.eps).sum::<f64>() / crossings.len() as f64;
    let ci_low = crossings.iter().map(|c| c.eps - c.sigma).fold(f64::INFINITY, f64::min);
    let ci_high = crossings.iter().map(|c| c.eps + c.sigma).fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdEstimate { eps_star, ci_low, ci_high, crossings })
}

fn pair_crossing(d: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let weight = |s: f64| if s > 0.0 { 1.0 / s } else { 1.0 };
    let mut best: Option<(f64, usize)> = None;
    for i in 0..d.len().saturating_sub(1) {
        if !(d[i].1 >= 0.0 && d[i + 1].1 < 0.0) {
            continue;
        }
        let cost: f64 = d[..=i].iter().map(|&(_, v, s)| (-v).max(0.0) * weight(s)).sum::<f64>()
            + d[i + 1..].iter().map(|&(_, v, s)| v.max(0.0) * weight(s)).sum::<f64>();
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, i));
        }
    }
    let (_, i) = best?;
    let ((x0, d0, s0), (x1, d1, s1)) = (d[i], d[i + 1]);
    let slope = (d1 - d0) / (x1 - x0);
    let eps = x0 + d0 * (x1 - x0) / (d0 - d1);
    let sigma = 0.5 * (s0 + s1) / slope.abs();
    Some((eps, sigma))
}

/// The threshold and small-error fit as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub eps_star: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub coefficient: Option<f64>,
    pub fit_eps_max: Option<f64>,
    pub method: String,
    pub seed: Option<u64>,
}

pub const THRESHOLD_METHOD: &str = "consecutive-size crossing of linearly interpolated P_N; P_inf from P_N = P_inf + a/N";

#[cfg(test)]
mod tests {
    use super::*;

    fn point(n: usize, eps: f64, p: f64) -> PointEstimate {
        PointEstimate { kind: LatticeKind::SquareTorus, n, eps_b: eps, trials: 100, p_agree: p, stderr: 0.001, seed: 1 }
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.0:0.0:0.01").unwrap(), vec![0.0]);
        let g = parse_grid("0.06:0.16:0.005").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 0.16);
        assert_eq!(parse_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("0.1:0.2").is_err());
        let merged = merge_grids(&[g, parse_grid("0.09:0.12:0.0025").unwrap()]);
        assert_eq!(merged.len(), 21 + 6);
    }

    #[test]
    fn stderr_formula() {
        let (m, s) = mean_and_stderr(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(m, 0.5);
        assert!((s - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn extrapolation_of_constant_and_sloped_curves() {
        let mut pts = Vec::new();
        for n in [8, 16, 32] {
            pts.push(point(n, 0.0, 1.0));
            pts.push(point(n, 0.02, 0.997));
            pts.push(point(n, 0.05, 0.98 - 0.08 / n as f64));
        }
        let model = extrapolate_pinf(&pts).unwrap();
        assert_eq!(model.evaluate(0.0).unwrap(), 1.0);
        assert!((model.evaluate(0.02).unwrap() - 0.997).abs() < 1e-12);
        assert!((model.evaluate(0.05).unwrap() - 0.98).abs() < 1e-12);
        assert!(model.evaluate(0.06).is_err());
        pts.retain(|p| p.n != 32);
        assert!(matches!(extrapolate_pinf(&pts), Err(McError::InsufficientSizes { .. })));
    }

    fn table(f: impl Fn(f64) -> f64) -> PinfModel {
        PinfModel::TableInterpolated {
            knots: [0.005, 0.01, 0.02, 0.03, 0.04]
                .iter()
                .map(|&e| PinfKnot { eps: e, pinf: f(e), slope: 0.0, sizes: 3 })
                .collect(),
            fallback_coefficient: None,
            fit_form: String::new(),
        }
    }

    #[test]
    fn small_eps_fit() {
        let fit = fit_small_eps_coefficient(&table(|e| 1.0 - 6.0 * e * e), 0.04).unwrap();
        assert!((fit.coefficient - 6.0).abs() < 1e-6);
        assert!(!fit.poor_fit);
        let linear = fit_small_eps_coefficient(&table(|e| 1.0 - e), 0.04).unwrap();
        assert!(linear.poor_fit, "{linear:?}");
        assert!(fit_small_eps_coefficient(&table(|e| 1.0 - e), 0.01).is_err());
    }

    #[test]
    fn synthetic_crossing() {
        let mut pts = Vec::new();
        for (k, n) in [8usize, 16, 32].iter().enumerate() {
            for i in 0..=10 {
                let eps = 0.05 + 0.01 * i as f64;
                let slope = 1.0 + k as f64;
                pts.push(point(*n, round_grid(eps), 0.8 - slope * (eps - 0.10)));
            }
        }
        let t = estimate_threshold(&pts).unwrap();
        assert!((t.eps_star - 0.10).abs() < 1e-12, "{t:?}");
        assert!(t.ci_low <= 0.10 && t.ci_high >= 0.10);
    }

    #[test]
    fn crossing_ignores_noise_far_from_threshold() {
        // a spurious sign change deep in the disordered phase
        let d = vec![
            (0.08, 0.02, 0.001),
            (0.09, 0.01, 0.001),
            (0.10, -0.01, 0.001),
            (0.11, -0.02, 0.001),
            (0.15, 0.0005, 0.001),
            (0.16, -0.0005, 0.001),
        ];
        let (eps, _) = pair_crossing(&d).unwrap();
        assert!((eps - 0.095).abs() < 1e-12);
    }

    #[test]
    fn quadratic_model_domain() {
        let q = PinfModel::parse_quadratic("quadratic:6").unwrap();
        assert!((q.evaluate(0.069).is_err()));
        assert!((q.evaluate(0.04).unwrap() - (1.0 - 6.0 * 0.0016)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let pts = vec![point(8, 0.1, 0.75), point(16, 0.105, 0.7)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("kind,N,eps_b,trials,p_agree,stderr,seed\nsquare-torus,8,0.1,100,0.75,0.001,1\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), pts);
    }
}
