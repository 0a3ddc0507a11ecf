//! Checks shared by the property tests and the acceptance suite. Each one
//! returns a one-line summary on success or a counterexample on failure.

#![allow(dead_code)]

use fixedbitset::FixedBitSet;
use lmn_core::decoder::{
    agreement_probability, brute_force_matching, decode, expected_wrong_sites, match_defect_list,
    parity_pattern, plaquette_syndrome, syndrome_of, MatchMode,
};
use lmn_core::encoder::{distillable_entanglement, final_state};
use lmn_core::lattice::{Orientation, Traversal, NO_PLAQUETTE};
use lmn_core::montecarlo::{run_point, run_sweep, SweepConfig};
use lmn_core::parallel::Executor;
use lmn_core::{EdgeSet, Lattice, LatticeKind, LatticeSpec};
use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = Result<String, String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn lattice(kind: LatticeKind, n: usize) -> Lattice {
    Lattice::new(LatticeSpec::new(kind, n)).unwrap()
}

fn kinds() -> impl Strategy<Value = LatticeKind> {
    proptest::sample::select(LatticeKind::ALL.to_vec())
}

/// Plaquettes bordering an odd number of the given edges, in index order.
fn odd_plaquettes(l: &Lattice, errors: &EdgeSet) -> Vec<u32> {
    (0..l.plaquette_count() as u32)
        .filter(|&p| l.plaquette_edges(p).iter().filter(|&&e| errors.contains(e as usize)).count() % 2 == 1)
        .collect()
}

/// Every error set of at most three edges on planar lattices with `N <= 4`:
/// the plaquette values built from the site outputs are the mod-2 boundary
/// of the errors. The same holds for the direct syndrome on both tori.
pub fn syndrome_round_trip() -> Outcome {
    let mut checked = 0usize;
    for kind in LatticeKind::ALL {
        for n in 2..=4 {
            let l = lattice(kind, n);
            let m = l.edge_count();
            let no_checks = FixedBitSet::with_capacity(l.site_count());
            let mut subsets: Vec<Vec<usize>> = vec![vec![]];
            for i in 0..m {
                subsets.push(vec![i]);
                for j in i + 1..m {
                    subsets.push(vec![i, j]);
                    for k in j + 1..m {
                        subsets.push(vec![i, j, k]);
                    }
                }
            }
            for s in subsets {
                let errors = EdgeSet::from_indices(m, s.iter().copied());
                let got = if kind == LatticeKind::SquarePlanar {
                    let outputs = parity_pattern(&l, &errors, &no_checks).map_err(|e| e.to_string())?;
                    plaquette_syndrome(&l, &outputs).map_err(|e| e.to_string())?.defects
                } else {
                    syndrome_of(&l, &errors, &no_checks).map_err(|e| e.to_string())?.defects
                };
                let want = odd_plaquettes(&l, &errors);
                if got != want {
                    return Err(format!("{kind} N={n} errors {s:?}: defects {got:?}, boundary {want:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} error sets on all lattice kinds with N <= 4"))
}

/// Planar boundary edges at a corner plaquette can be explained equally well
/// by the other boundary edge of that corner.
fn ambiguous_boundary_edge(l: &Lattice, e: usize) -> bool {
    let [p, q] = l.edge_plaquettes(e);
    q == NO_PLAQUETTE && l.dual_neighbors(p).count() < 3
}

/// Random error sets whose edges are pairwise at least two dual steps apart,
/// so every matched pair is the two ends of one error edge. On the planar
/// lattice the gap is three: two boundary defects two steps apart could
/// otherwise be joined as cheaply as sent to the boundary.
fn isolated_errors(l: &Lattice, seed: u64, attempts: usize) -> EdgeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..l.edge_count()).collect();
    order.shuffle(&mut rng);
    let ends = |e: usize| l.edge_plaquettes(e).into_iter().filter(|&p| p != NO_PLAQUETTE);
    let gap = if l.kind().is_periodic() { 2 } else { 3 };
    for &e in order.iter().take(attempts) {
        if ambiguous_boundary_edge(l, e) {
            continue;
        }
        let far = chosen.iter().all(|&c| ends(e).all(|p| ends(c).all(|q| l.dual_distance(p, q) >= gap)));
        if far {
            chosen.push(e);
        }
    }
    EdgeSet::from_indices(l.edge_count(), chosen)
}

/// Isolated errors are recovered exactly and every pair of sites agrees.
pub fn isolated_error_exactness(cases: u32) -> Outcome {
    let mut r = runner(cases);
    r.run(&(kinds(), 4usize..=12, any::<u64>(), 1usize..12), |(kind, n, seed, attempts)| {
        let l = lattice(kind, n);
        let errors = isolated_errors(&l, seed, attempts);
        let d = decode(&l, &errors, MatchMode::Exact).unwrap();
        prop_assert_eq!(d.inferred.iter().collect::<Vec<_>>(), errors.iter().collect::<Vec<_>>());
        prop_assert_eq!(agreement_probability(&d.residual), 1.0);
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random isolated error sets"))
}

fn random_errors(l: &Lattice, eps: f64, seed: u64) -> EdgeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EdgeSet::from_indices(l.edge_count(), (0..l.edge_count()).filter(|_| rng.random_bool(eps)))
}

/// The residual of any decoding has even degree at every plaquette, and its
/// site labels do not depend on the spanning tree used to read them.
pub fn residual_closure(cases: u32) -> Outcome {
    let mut r = runner(cases);
    r.run(&(kinds(), 3usize..=12, 0.0f64..0.25, any::<u64>()), |(kind, n, eps, seed)| {
        let l = lattice(kind, n);
        let errors = random_errors(&l, eps, seed);
        let d = decode(&l, &errors, MatchMode::Exact).unwrap();
        prop_assert!(odd_plaquettes(&l, &d.residual.edges).is_empty());
        let bfs = l.site_labels_along(&l.spanning_tree(Traversal::BreadthFirst), &d.residual.edges);
        let dfs = l.site_labels_along(&l.spanning_tree(Traversal::DepthFirst), &d.residual.edges);
        prop_assert_eq!(&bfs, &dfs);
        prop_assert_eq!(&bfs, &d.residual.site_labels);
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random decodings"))
}

pub fn final_state_normalization(cases: u32) -> Outcome {
    let mut r = runner(cases);
    r.run(&(0.0f64..=1.0, 0.0f64..=1.0), |(b, p)| {
        let coeffs = final_state(b, p);
        prop_assert!(coeffs.iter().all(|c| (0.0..=1.0).contains(c)), "{:?}", coeffs);
        prop_assert!((coeffs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let e = distillable_entanglement(b, p).unwrap();
        prop_assert!((-1.0..=1.0).contains(&e));
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random (eps_b, eps_p)"))
}

/// Single points and whole sweeps give identical bytes for any worker count.
pub fn worker_determinism() -> Outcome {
    let mut compared = 0;
    for kind in LatticeKind::ALL {
        let l = lattice(kind, 8);
        let reference = run_point(&l, 0.12, 300, 99, &Executor::sequential(), MatchMode::Exact).unwrap();
        for workers in [1, 2, 3, 8] {
            let got = run_point(&l, 0.12, 300, 99, &Executor::new(workers), MatchMode::Exact).unwrap();
            if got != reference {
                return Err(format!("{kind}: workers={workers} gave {got:?}, sequential {reference:?}"));
            }
            compared += 1;
        }
    }
    let config = |workers| SweepConfig {
        spec: LatticeSpec::new(LatticeKind::SquareTorus, 6),
        eps_grid: vec![0.0, 0.05, 0.1],
        trials: 200,
        master_seed: 7,
        workers,
        mode: MatchMode::Exact,
    };
    let a = run_sweep(&config(1)).unwrap();
    let b = run_sweep(&config(4)).unwrap();
    if a != b {
        return Err("sweep differs between 1 and 4 workers".into());
    }
    Ok(format!("{} comparisons against the sequential executor", compared + 1))
}

/// Exact matching against exhaustive search over random defect sets.
pub fn oracle_equivalence(per_size: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut instances = 0;
    for n in [4usize, 6, 8] {
        for kind in LatticeKind::ALL {
            let l = lattice(kind, n);
            let all: Vec<u32> = (0..l.plaquette_count() as u32).collect();
            for _ in 0..per_size {
                let max = 10.min(all.len());
                let mut k = rng.random_range(0..=max);
                if kind.is_periodic() {
                    k -= k % 2;
                }
                let mut defects: Vec<u32> = all.choose_multiple(&mut rng, k).copied().collect();
                defects.sort_unstable();
                let fast = match_defect_list(&l, &defects, MatchMode::Exact).map_err(|e| e.to_string())?;
                let slow = brute_force_matching(&l, &defects, 10).map_err(|e| e.to_string())?;
                if fast.total_weight != slow.total_weight {
                    return Err(format!(
                        "{kind} N={n} defects {defects:?}: matching weight {}, exhaustive {}",
                        fast.total_weight, slow.total_weight
                    ));
                }
                instances += 1;
            }
        }
    }
    Ok(format!("{instances} instances, all weights equal"))
}

fn step_edge(l: &Lattice, a: usize, b: usize, step: char) -> usize {
    match step {
        'R' => l.edge_index(Orientation::Vertical, a + 1, b),
        'U' => l.edge_index(Orientation::Horizontal, a, b + 1),
        _ => unreachable!(),
    }
}

fn walk(l: &Lattice, start: (usize, usize), steps: &str) -> EdgeSet {
    let (mut a, mut b) = start;
    let mut edges = Vec::new();
    for s in steps.chars() {
        edges.push(step_edge(l, a, b, s));
        match s {
            'R' => a += 1,
            _ => b += 1,
        }
    }
    EdgeSet::from_indices(l.edge_count(), edges)
}

/// The (2,1) example: the straight path loses 2/3 of a site on average,
/// the two bent ones a whole site. Straight displacements lose nothing.
pub fn path_law() -> Outcome {
    for kind in [LatticeKind::SquarePlanar, LatticeKind::SquareTorus] {
        let l = lattice(kind, 8);
        let (p, q) = (l.plaquette_at(2, 2), l.plaquette_at(4, 3));
        let cases = [("RUR", Ratio::new(2, 3)), ("URR", Ratio::from(1)), ("RRU", Ratio::from(1))];
        for (steps, want) in cases {
            let got = expected_wrong_sites(&l, p, q, &walk(&l, (2, 2), steps), 20).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("{kind}: {steps} gives {got}, expected {want}"));
            }
        }
        if l.staircase_path(p, q).unwrap() != walk(&l, (2, 2), "RUR") {
            return Err(format!("{kind}: staircase for (2,1) is not right-up-right"));
        }
        let r = l.plaquette_at(5, 2);
        let straight = l.staircase_path(p, r).unwrap();
        let zero = expected_wrong_sites(&l, p, r, &straight, 20).map_err(|e| e.to_string())?;
        if zero != Ratio::from(0) {
            return Err(format!("{kind}: straight displacement loses {zero}"));
        }
    }
    Ok("n(RUR) = 2/3, n(URR) = n(RRU) = 1, n(straight) = 0".into())
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

/// For every displacement with at most 20 minimal paths, no minimal path
/// loses fewer sites on average than the staircase.
pub fn staircase_dominance() -> Outcome {
    let l = lattice(LatticeKind::SquarePlanar, 24);
    let side = 23i64;
    let mut displacements = 0;
    for dx in -(side - 1)..side {
        for dy in -(side - 1)..side {
            let count = binomial((dx.abs() + dy.abs()) as u64, dx.unsigned_abs());
            if (dx, dy) == (0, 0) || count > 20 {
                continue;
            }
            let a0 = if dx >= 0 { 0 } else { side - 1 };
            let b0 = if dy >= 0 { 0 } else { side - 1 };
            let p = l.plaquette_at(a0 as usize, b0 as usize);
            let q = l.plaquette_at((a0 + dx) as usize, (b0 + dy) as usize);
            let stair = l.staircase_path(p, q).unwrap();
            let best = expected_wrong_sites(&l, p, q, &stair, 20).map_err(|e| e.to_string())?;
            let paths = l.enumerate_minimal_paths(p, q, 20).map_err(|e| e.to_string())?;
            if !paths.contains(&stair) {
                return Err(format!("({dx},{dy}): staircase is not a minimal path"));
            }
            for path in &paths {
                let other = expected_wrong_sites(&l, p, q, path, 20).map_err(|e| e.to_string())?;
                if other < best {
                    return Err(format!("({dx},{dy}): a path loses {other} < staircase {best}"));
                }
            }
            displacements += 1;
        }
    }
    Ok(format!("{displacements} displacements"))
}
