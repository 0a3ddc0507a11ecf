//! Repetition-encoded links: logical error rates of a `2t+1` qubit block,
//! their growth across an `N x N` network, the resulting two-station state
//! and a planner for the encoding size and tolerable elementary error.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::montecarlo::{McError, PinfModel};
use crate::noise::binary_entropy;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error(transparent)]
    Pinf(#[from] McError),
    #[error("no encoding with t <= {t_max} reaches E = {target} at N = {n}")]
    Infeasible { target: f64, n: usize, t_max: u32 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Block of `n = 2t + 1` qubits correcting up to `t` phase errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub t: u32,
}

impl CodeParams {
    pub fn new(t: u32) -> Self {
        CodeParams { t }
    }

    pub fn n(&self) -> u32 {
        2 * self.t + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMode {
    /// Both sums evaluated term by term, without survival factors.
    ExactSum,
    /// `C(n, t+1) eps^(t+1)` and `n eps`.
    LeadingOrder,
    /// The binomial sums with `(1 - eps)^(n - j)` factors included.
    WithSurvival,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalRates {
    pub eps_p_tilde: f64,
    pub eps_b_tilde: f64,
    pub mode: RateMode,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn logical_rates(eps: f64, code: CodeParams, mode: RateMode) -> Result<LogicalRates, EncoderError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(EncoderError::OutOfRange { name: "eps", value: eps, range: "[0, 1]" });
    }
    let (n, t) = (code.n(), code.t);
    let survival = |j: u32| match mode {
        RateMode::WithSurvival => (1.0 - eps).powi((n - j) as i32),
        _ => 1.0,
    };
    let (p, b) = match mode {
        RateMode::LeadingOrder => (binomial(n, t + 1) * eps.powi((t + 1) as i32), n as f64 * eps),
        RateMode::ExactSum | RateMode::WithSurvival => {
            let p = (t + 1..=n).map(|j| binomial(n, j) * eps.powi(j as i32) * survival(j)).sum::<f64>();
            let b = (0..=t)
                .map(|j| {
                    let k = 2 * j + 1;
                    binomial(n, k) * eps.powi(k as i32) * survival(k)
                })
                .sum::<f64>();
            (p, b)
        }
    };
    Ok(LogicalRates { eps_p_tilde: p.clamp(0.0, 1.0), eps_b_tilde: b.clamp(0.0, 1.0), mode })
}

/// Links crossed by a network-wide phase error count: `2 N (N - 1)`.
pub fn link_count(n: usize) -> f64 {
    2.0 * n as f64 * (n as f64 - 1.0)
}

/// `(eps_p_net, eps_b_net)` for an `N x N` network.
pub fn network_rates(logical: &LogicalRates, n: usize, pinf: &PinfModel) -> Result<(f64, f64), EncoderError> {
    if n < 2 {
        return Err(EncoderError::OutOfRange { name: "N", value: n as f64, range: ">= 2" });
    }
    let eps_p = -(link_count(n) * (-logical.eps_p_tilde).ln_1p()).exp_m1();
    let eps_b = 1.0 - pinf.evaluate(logical.eps_b_tilde)?;
    Ok((eps_p, eps_b))
}

/// Bell-diagonal weights in the order `Phi+`, `Psi+`, `Phi-`, `Psi-`.
pub fn final_state(eps_b_net: f64, eps_p_net: f64) -> [f64; 4] {
    let (b, p) = (eps_b_net, eps_p_net);
    [(1.0 - b) * (1.0 - p), b * (1.0 - p), (1.0 - b) * p, b * p]
}

/// `1 - H2(eps_b) - H2(eps_p)`; negative values are kept.
pub fn distillable_entanglement(eps_b_net: f64, eps_p_net: f64) -> Result<f64, EncoderError> {
    let h = |x: f64, name| {
        binary_entropy(x).map_err(|_| EncoderError::OutOfRange { name, value: x, range: "[0, 1]" })
    };
    Ok(1.0 - h(eps_b_net, "eps_b_net")? - h(eps_p_net, "eps_p_net")?)
}

/// Rate `1 - H2(F)` of a two-state Bell mixture with fidelity `F`.
pub fn two_state_rate(fidelity: f64) -> Result<f64, EncoderError> {
    distillable_entanglement(fidelity, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkEstimate {
    pub e_target: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: u32,
    pub eps_phys: f64,
    pub eps_p_tilde: f64,
    pub eps_b_tilde: f64,
    pub eps_p_net: f64,
    pub eps_b_net: f64,
    pub state_coeffs: [f64; 4],
    pub e_achieved: f64,
    pub qubits_per_station: u32,
}

/// Everything derived from one `(t, eps)` choice, or `None` when the rates
/// leave the region where the entropy formula is monotone (either network
/// rate above 1/2) or the fidelity model is undefined there.
pub fn evaluate_plan(eps: f64, code: CodeParams, n: usize, pinf: &PinfModel) -> Option<NetworkEstimate> {
    let logical = logical_rates(eps, code, RateMode::ExactSum).ok()?;
    let (eps_p_net, eps_b_net) = network_rates(&logical, n, pinf).ok()?;
    if eps_p_net > 0.5 || eps_b_net > 0.5 {
        return None;
    }
    let e = distillable_entanglement(eps_b_net, eps_p_net).ok()?;
    Some(NetworkEstimate {
        e_target: f64::NAN,
        n,
        t: code.t,
        eps_phys: eps,
        eps_p_tilde: logical.eps_p_tilde,
        eps_b_tilde: logical.eps_b_tilde,
        eps_p_net,
        eps_b_net,
        state_coeffs: final_state(eps_b_net, eps_p_net),
        e_achieved: e,
        qubits_per_station: 5 * code.n(),
    })
}

const SCAN_STEP: f64 = 1e-4;
/// Plans that tolerate less elementary error than this are reported as
/// infeasible: the target is then only met in the noiseless limit.
pub const MIN_TOLERABLE_EPS: f64 = 1e-3;
const EPS_TOLERANCE: f64 = 1e-10;

/// Largest `eps` reachable from 0 with every intermediate point meeting
/// the target, resolved by a scan of step `1e-4` and then bisection.
fn tolerable_eps(target: f64, code: CodeParams, n: usize, pinf: &PinfModel) -> Option<f64> {
    let ok = |eps: f64| evaluate_plan(eps, code, n, pinf).is_some_and(|p| p.e_achieved >= target);
    let mut lo = 0.0;
    let mut hi = SCAN_STEP;
    while hi <= 0.5 && ok(hi) {
        lo = hi;
        hi += SCAN_STEP;
    }
    let hi = hi.min(0.5);
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > EPS_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo >= MIN_TOLERABLE_EPS).then_some(lo)
}

pub const DEFAULT_T_MAX: u32 = 12;

/// The encoding `t in 1..=t_max` tolerating the largest elementary error
/// while still delivering `e_target` bits (ties go to the smaller `t`).
pub fn plan_resources(e_target: f64, n: usize, pinf: &PinfModel, t_max: u32) -> Result<NetworkEstimate, EncoderError> {
    if !(e_target > 0.0 && e_target < 1.0) {
        return Err(EncoderError::OutOfRange { name: "E_target", value: e_target, range: "(0, 1)" });
    }
    if n < 2 {
        return Err(EncoderError::OutOfRange { name: "N", value: n as f64, range: ">= 2" });
    }
    let mut best: Option<(u32, f64)> = None;
    for t in 1..=t_max {
        if let Some(eps) = tolerable_eps(e_target, CodeParams::new(t), n, pinf) {
            if best.is_none_or(|(_, e)| eps > e) {
                best = Some((t, eps));
            }
        }
    }
    let (t, eps) = best.ok_or(EncoderError::Infeasible { target: e_target, n, t_max })?;
    let mut plan = evaluate_plan(eps, CodeParams::new(t), n, pinf).expect("the chosen point is feasible");
    plan.e_target = e_target;
    Ok(plan)
}

/// Qubits held by one station.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitBudget {
    pub links: u32,
    pub check: u32,
    pub ancilla: u32,
    pub total: u32,
}

/// Without encoding a station holds four link qubits, one check qubit and
/// two ancillas. With a block of `n > 1` qubits the total is taken as `5n`
/// (four link blocks and one check block), ancillas included.
pub fn station_qubit_budget(code: CodeParams) -> QubitBudget {
    let n = code.n();
    if n == 1 {
        QubitBudget { links: 4, check: 1, ancilla: 2, total: 7 }
    } else {
        QubitBudget { links: 4 * n, check: n, ancilla: 0, total: 5 * n }
    }
}

pub const RESOURCE_CSV_HEADER: [&str; 8] =
    ["E_target", "N", "t", "eps_percent", "eps_b_net", "eps_p_net", "E_achieved", "qubits_per_station"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    #[serde(rename = "E_target")]
    pub e_target: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: u32,
    pub eps_percent: f64,
    pub eps_b_net: f64,
    pub eps_p_net: f64,
    #[serde(rename = "E_achieved")]
    pub e_achieved: f64,
    pub qubits_per_station: u32,
}

impl From<&NetworkEstimate> for ResourceRow {
    fn from(p: &NetworkEstimate) -> Self {
        ResourceRow {
            e_target: p.e_target,
            n: p.n,
            t: p.t,
            eps_percent: 100.0 * p.eps_phys,
            eps_b_net: p.eps_b_net,
            eps_p_net: p.eps_p_net,
            e_achieved: p.e_achieved,
            qubits_per_station: p.qubits_per_station,
        }
    }
}

pub fn write_resource_csv<W: Write>(out: W, rows: &[ResourceRow]) -> Result<(), EncoderError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(RESOURCE_CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_resource_csv<R: Read>(input: R) -> Result<Vec<ResourceRow>, EncoderError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(EncoderError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unencoded_rates() {
        let r = logical_rates(0.03, CodeParams::new(0), RateMode::ExactSum).unwrap();
        assert!((r.eps_b_tilde - 0.03).abs() < 1e-15);
        assert!((r.eps_p_tilde - 0.03).abs() < 1e-15);
    }

    #[test]
    fn rate_examples() {
        let code = CodeParams::new(2);
        let lead = logical_rates(0.0138, code, RateMode::LeadingOrder).unwrap();
        assert!((lead.eps_b_tilde - 0.069).abs() < 1e-12);
        assert!((lead.eps_p_tilde - 10.0 * 0.0138f64.powi(3)).abs() < 1e-15);
        let exact = logical_rates(0.0138, code, RateMode::ExactSum).unwrap();
        let e: f64 = 0.0138;
        assert!((exact.eps_b_tilde - (5.0 * e + 10.0 * e.powi(3) + e.powi(5))).abs() < 1e-15);
        assert!((exact.eps_b_tilde - 0.06903).abs() < 1e-5);
        let surv = logical_rates(0.0138, code, RateMode::WithSurvival).unwrap();
        assert!((surv.eps_b_tilde - (1.0 - (1.0 - 2.0 * e).powi(5)) / 2.0).abs() < 1e-15);
        assert!(surv.eps_p_tilde < exact.eps_p_tilde);
    }

    #[test]
    fn leading_order_is_close_for_small_eps() {
        for t in 0..=6 {
            for i in 1..=20 {
                let eps = 0.001 * i as f64;
                let a = logical_rates(eps, CodeParams::new(t), RateMode::ExactSum).unwrap();
                let b = logical_rates(eps, CodeParams::new(t), RateMode::LeadingOrder).unwrap();
                assert!((a.eps_b_tilde / b.eps_b_tilde - 1.0).abs() <= 0.05, "t={t} eps={eps}");
                assert!((a.eps_p_tilde / b.eps_p_tilde - 1.0).abs() <= 0.05, "t={t} eps={eps}");
            }
        }
    }

    #[test]
    fn network_and_state() {
        let quad = PinfModel::QuadraticSmallEps { coefficient: 6.0 };
        let logical = LogicalRates { eps_p_tilde: 2.63e-5, eps_b_tilde: 0.03, mode: RateMode::LeadingOrder };
        let (p, b) = network_rates(&logical, 10, &quad).unwrap();
        assert!((p - (1.0 - (1.0f64 - 2.63e-5).powi(180))).abs() < 1e-12);
        assert!((p - 4.7e-3).abs() < 1e-4);
        assert!((b - 6.0 * 0.0009).abs() < 1e-12);
        let zero = LogicalRates { eps_p_tilde: 0.0, ..logical };
        assert_eq!(network_rates(&zero, 10, &quad).unwrap().0, 0.0);
        let out_of_domain = LogicalRates { eps_b_tilde: 0.069, ..logical };
        assert!(network_rates(&out_of_domain, 10, &quad).is_err());

        assert_eq!(final_state(0.0, 0.0), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(final_state(0.5, 0.5), [0.25; 4]);
        let s = final_state(0.0286, 0.0047);
        let expect = [0.9668, 0.0285, 0.0046, 0.0001];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);

        assert_eq!(distillable_entanglement(0.0, 0.0).unwrap(), 1.0);
        assert!((distillable_entanglement(0.0286, 0.0047).unwrap() - 0.77).abs() < 0.01);
        assert!(two_state_rate(0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn qubit_budget() {
        assert_eq!(station_qubit_budget(CodeParams::new(0)).total, 7);
        assert_eq!(station_qubit_budget(CodeParams::new(3)).total, 35);
        assert_eq!(station_qubit_budget(CodeParams::new(6)).total, 65);
    }

    #[test]
    fn planner_limits() {
        let quad = PinfModel::QuadraticSmallEps { coefficient: 6.0 };
        assert!(matches!(plan_resources(0.999, 10, &quad, 12), Err(EncoderError::Infeasible { .. })));
        assert!(plan_resources(1.0, 10, &quad, 12).is_err());
        let plan = plan_resources(0.75, 10, &quad, 12).unwrap();
        assert!(plan.e_achieved >= 0.75);
        let worse = evaluate_plan(plan.eps_phys * 1.01, CodeParams::new(plan.t), 10, &quad);
        assert!(worse.is_none_or(|w| w.e_achieved < 0.75));
    }
}
