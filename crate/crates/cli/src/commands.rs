use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lmn_core::decoder::{decode, DecodeDump};
use lmn_core::encoder::{plan_resources, write_resource_csv, EncoderError, ResourceRow};
use lmn_core::montecarlo::{
    estimate_threshold, extrapolate_pinf, fit_small_eps_coefficient, merge_grids, parse_grid, read_csv,
    run_point, write_csv, PinfModel, PointEstimate, SmallEpsFit, SweepConfig, ThresholdReport, THRESHOLD_METHOD,
};
use lmn_core::noise::{error_budget, fill_edge_errors, NoiseParams};
use lmn_core::parallel::Executor;
use lmn_core::percolation::{
    decoding_bound, percolation_bound, simulate_bond_percolation, twirl_to_flip_rate, CrossingEstimate,
    PureLinkState,
};
use lmn_core::stream::{point_key, trial_rng};
use lmn_core::{EdgeSet, Lattice, LatticeKind, LatticeSpec};
use serde::Serialize;

use crate::args::*;

/// Problems with the flags themselves rather than with the run.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

#[derive(Clone, Copy, Debug)]
pub struct RunContext {
    pub seed: u64,
    pub workers: usize,
}

/// Bytes of the command's data output, and a failure message when the run
/// completed but must exit nonzero.
pub struct Produced {
    pub data: Vec<u8>,
    pub failure: Option<String>,
}

impl Produced {
    fn ok(data: Vec<u8>) -> Self {
        Produced { data, failure: None }
    }
}

pub fn execute(command: &Command, ctx: RunContext) -> Result<Produced> {
    match command {
        Command::Sweep(a) => sweep(a, ctx),
        Command::Threshold(a) => threshold(a, ctx),
        Command::Extrapolate(a) => extrapolate(a),
        Command::Resources(a) => resources(a),
        Command::Budget(a) => budget(a),
        Command::Percolation(a) => percolation(a, ctx),
        Command::DecodeOne(a) => decode_one(a, ctx),
        Command::Replay(_) => Err(usage("replay cannot be nested")),
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut data = serde_json::to_vec_pretty(value)?;
    data.push(b'\n');
    Ok(data)
}

fn eps_grid(eps: &str, refine: Option<&str>) -> Result<Vec<f64>> {
    let mut grids = vec![parse_grid(eps).map_err(usage)?];
    if let Some(r) = refine {
        grids.push(parse_grid(r).map_err(usage)?);
    }
    Ok(merge_grids(&grids))
}

#[allow(clippy::too_many_arguments)]
fn run_grid(
    kind: LatticeKind,
    sizes: &[usize],
    eps: &str,
    refine: Option<&str>,
    trials: usize,
    mode: &str,
    ctx: RunContext,
) -> Result<Vec<PointEstimate>> {
    let eps_grid = eps_grid(eps, refine)?;
    let mode = parse_mode(mode).map_err(usage)?;
    if sizes.is_empty() {
        return Err(usage("--sizes is empty"));
    }
    let executor = Executor::new(ctx.workers);
    let mut points = Vec::with_capacity(sizes.len() * eps_grid.len());
    for &n in sizes {
        let config = SweepConfig {
            spec: LatticeSpec::new(kind, n),
            eps_grid: eps_grid.clone(),
            trials,
            master_seed: ctx.seed,
            workers: ctx.workers,
            mode,
        };
        config.validate().map_err(usage)?;
        let lattice = Lattice::new(config.spec).map_err(usage)?;
        for &eps in &config.eps_grid {
            let p = run_point(&lattice, eps, trials, ctx.seed, &executor, mode)?;
            eprintln!("{kind} N={n} eps={eps}: P={:.6} +- {:.6}", p.p_agree, p.stderr);
            points.push(p);
        }
    }
    Ok(points)
}

fn sweep(a: &SweepArgs, ctx: RunContext) -> Result<Produced> {
    let g = &a.grid;
    let points = run_grid(g.lattice, &g.sizes, &g.eps, g.refine.as_deref(), g.trials, &g.mode, ctx)?;
    let mut data = Vec::new();
    write_csv(&mut data, &points)?;
    Ok(Produced::ok(data))
}

pub fn read_sweeps(paths: &[impl AsRef<Path>]) -> Result<Vec<PointEstimate>> {
    let mut points = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        points.extend(read_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?);
    }
    let kinds: BTreeSet<LatticeKind> = points.iter().map(|p| p.kind).collect();
    if kinds.len() > 1 {
        bail!("input files mix lattice kinds: {kinds:?}");
    }
    Ok(points)
}

/// Drops error rates sampled at fewer than three sizes.
fn extrapolatable(points: &[PointEstimate]) -> Vec<PointEstimate> {
    let mut sizes: BTreeMap<u64, BTreeSet<usize>> = BTreeMap::new();
    for p in points {
        sizes.entry(p.eps_b.to_bits()).or_default().insert(p.n);
    }
    points.iter().filter(|p| sizes[&p.eps_b.to_bits()].len() >= 3).cloned().collect()
}

fn small_eps_fit(points: &[PointEstimate], eps_max: f64) -> Result<SmallEpsFit> {
    let low: Vec<PointEstimate> = points.iter().filter(|p| p.eps_b <= eps_max + 1e-12).cloned().collect();
    let model = extrapolate_pinf(&extrapolatable(&low))?;
    let fit = fit_small_eps_coefficient(&model, eps_max)?;
    if fit.poor_fit {
        eprintln!(
            "warning: 1 - c eps^2 fits poorly below eps = {eps_max} (relative residual {:.3})",
            fit.relative_residual
        );
    }
    Ok(fit)
}

fn common_seed(points: &[PointEstimate]) -> Option<u64> {
    let seeds: BTreeSet<u64> = points.iter().map(|p| p.seed).collect();
    (seeds.len() == 1).then(|| *seeds.first().unwrap())
}

fn threshold(a: &ThresholdArgs, ctx: RunContext) -> Result<Produced> {
    let points = if !a.input.is_empty() {
        read_sweeps(&a.input)?
    } else if let Some(kind) = a.lattice {
        let eps = a.eps.as_deref().ok_or_else(|| usage("inline threshold runs need --eps"))?;
        run_grid(kind, &a.sizes, eps, a.refine.as_deref(), a.trials, &a.mode, ctx)?
    } else {
        return Err(usage("give sweep data with --in or run inline with --lattice"));
    };
    let estimate = estimate_threshold(&points)?;
    for c in &estimate.crossings {
        eprintln!("crossing N={} / N={}: eps = {:.5} +- {:.5}", c.n_small, c.n_large, c.eps, c.sigma);
    }
    let mut fit_points = points.clone();
    fit_points.extend(read_sweeps(&a.small_eps)?);
    let fit = match small_eps_fit(&fit_points, a.fit_eps_max) {
        Ok(fit) => Some(fit),
        Err(e) => {
            eprintln!("note: no small-eps coefficient ({e})");
            None
        }
    };
    let report = ThresholdReport {
        eps_star: estimate.eps_star,
        ci_low: estimate.ci_low,
        ci_high: estimate.ci_high,
        coefficient: fit.as_ref().map(|f| f.coefficient),
        fit_eps_max: fit.as_ref().map(|f| f.eps_max),
        method: THRESHOLD_METHOD.to_string(),
        seed: common_seed(&points),
    };
    Ok(Produced::ok(json_bytes(&report)?))
}

fn extrapolate(a: &ExtrapolateArgs) -> Result<Produced> {
    let points = read_sweeps(&a.input)?;
    let mut model = extrapolate_pinf(&points)?;
    let fitted = small_eps_fit(&points, a.fit_eps_max);
    if let PinfModel::TableInterpolated { fallback_coefficient, .. } = &mut model {
        match fitted {
            Ok(fit) => {
                eprintln!("small-eps coefficient c = {:.4} from {} knots", fit.coefficient, fit.knots_used);
                *fallback_coefficient = Some(fit.coefficient);
            }
            Err(e) => eprintln!("note: no small-eps coefficient, interpolating linearly to (0, 1) ({e})"),
        }
    }
    Ok(Produced::ok(json_bytes(&model)?))
}

pub fn load_pinf(text: &str) -> Result<PinfModel> {
    match PinfSource::parse(text) {
        PinfSource::Quadratic(c) => Ok(PinfModel::QuadraticSmallEps { coefficient: c }),
        PinfSource::File(path) => {
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
        }
    }
}

fn resources(a: &ResourcesArgs) -> Result<Produced> {
    let pinf = load_pinf(&a.pinf)?;
    let mut rows = Vec::new();
    let mut infeasible = Vec::new();
    for &e in &a.e {
        for &n in &a.n {
            match plan_resources(e, n, &pinf, a.t_max) {
                Ok(plan) => rows.push(ResourceRow::from(&plan)),
                Err(err @ EncoderError::Infeasible { .. }) => infeasible.push(format!("E={e}, N={n}: {err}")),
                Err(err @ EncoderError::OutOfRange { .. }) => return Err(usage(err)),
                Err(err) => return Err(err.into()),
            }
        }
    }
    let mut data = Vec::new();
    write_resource_csv(&mut data, &rows)?;
    let failure = (!infeasible.is_empty()).then(|| format!("infeasible cells:\n  {}", infeasible.join("\n  ")));
    Ok(Produced { data, failure })
}

fn budget(a: &BudgetArgs) -> Result<Produced> {
    let mut params = NoiseParams::hardware(a.beta, a.delta, a.mu.unwrap_or(0.0), a.m);
    match (a.gamma, a.t0, a.mu) {
        (Some(gamma), Some(t0), mu) => {
            params = params.with_memory_decay(gamma, t0);
            if let Some(mu) = mu {
                if (mu - params.mu).abs() > 1e-12 * mu.abs().max(1.0) {
                    return Err(usage(format!("--mu {mu} disagrees with gamma * T0 = {}", params.mu)));
                }
            }
        }
        (_, _, None) => return Err(usage("give --mu or both --gamma and --t0")),
        _ => {}
    }
    let budget = error_budget(&params).map_err(usage)?;
    for term in budget.components.iter().filter(|t| !t.calibrated) {
        eprintln!("warning: term `{}` was only calibrated for m = 3", term.label);
    }
    Ok(Produced::ok(json_bytes(&budget)?))
}

#[derive(Serialize)]
struct CurveKnot {
    phi0: f64,
    flip_rate: f64,
}

#[derive(Serialize)]
struct PercolationReport {
    eps_star: f64,
    percolation_bound: f64,
    decoding_bound: f64,
    flip_rate_curve: Vec<CurveKnot>,
    crossing: Option<CrossingEstimate>,
}

fn percolation(a: &PercolationArgs, ctx: RunContext) -> Result<Produced> {
    let flip_rate_curve = (0..=20)
        .map(|i| {
            let phi0 = 0.5 + 0.025 * i as f64;
            let link = PureLinkState::new(phi0).expect("phi0 lies in [0.5, 1]");
            CurveKnot { phi0, flip_rate: twirl_to_flip_rate(link) }
        })
        .collect();
    let crossing = match &a.simulate {
        Some(text) => {
            let (n, p, trials) = parse_simulate(text).map_err(usage)?;
            Some(simulate_bond_percolation(n, p, trials, ctx.seed, &Executor::new(ctx.workers))?)
        }
        None => None,
    };
    let report = PercolationReport {
        eps_star: a.eps_star,
        percolation_bound: percolation_bound(),
        decoding_bound: decoding_bound(a.eps_star).map_err(usage)?,
        flip_rate_curve,
        crossing,
    };
    Ok(Produced::ok(json_bytes(&report)?))
}

fn decode_one(a: &DecodeOneArgs, ctx: RunContext) -> Result<Produced> {
    let spec = LatticeSpec::new(a.lattice, a.n);
    let lattice = Lattice::new(spec).map_err(usage)?;
    let mode = parse_mode(&a.mode).map_err(usage)?;
    let edges = lattice.edge_count();
    let errors = match (&a.errors, a.eps) {
        (Some(text), _) => {
            let list = parse_edge_list(text).map_err(usage)?;
            if let Some(bad) = list.iter().find(|&&e| e >= edges) {
                return Err(usage(format!("edge {bad} is out of range (lattice has {edges} edges)")));
            }
            EdgeSet::from_indices(edges, list.iter().copied())
        }
        (None, Some(eps)) => {
            if !(0.0..=1.0).contains(&eps) {
                return Err(usage(format!("--eps {eps} is not a probability")));
            }
            let mut rng = trial_rng(point_key(ctx.seed, spec, eps), a.trial);
            let mut set = EdgeSet::empty(edges);
            fill_edge_errors(&mut set, eps, &mut rng);
            set
        }
        (None, None) => return Err(usage("give --errors or --eps")),
    };
    let decoded = decode(&lattice, &errors, mode)?;
    Ok(Produced::ok(DecodeDump::new(&errors, &decoded).render(spec).into_bytes()))
}
