//! Minimum-weight perfect matching of syndrome defects.
//!
//! The exact mode solves on a sparse nearest-neighbour graph and then
//! prices every absent pair against the final duals. Pairs with negative
//! reduced cost are added and the problem is solved again, so the result is
//! optimal over the complete defect graph. On the planar lattice every
//! defect gets a boundary partner; boundary partners pair among themselves
//! at zero cost.

use serde::{Deserialize, Serialize};

use super::blossom::{max_weight_matching, Solution};
use super::DecodeError;
use crate::lattice::{Lattice, LatticeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Partner {
    Defect(u32),
    Boundary,
}

/// One matched pair; `a` is a defect plaquette.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub a: u32,
    pub b: Partner,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<Pair>,
    pub total_weight: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatchMode {
    /// Optimal over the complete defect graph.
    #[default]
    Exact,
    /// Only the `k` nearest defects of each defect are considered. Fast, not
    /// guaranteed optimal.
    Pruned { k: usize },
}

const INITIAL_NEIGHBOURS: usize = 6;

/// Minimum-weight perfect matching of `defects` (plaquette ids).
pub fn match_defect_list(
    lattice: &Lattice,
    defects: &[u32],
    mode: MatchMode,
) -> Result<Matching, DecodeError> {
    let n = defects.len();
    let planar = lattice.kind() == LatticeKind::SquarePlanar;
    if !planar && n % 2 == 1 {
        return Err(DecodeError::OddDefectCount(n));
    }
    if n == 0 {
        return Ok(Matching::default());
    }
    let graph = DefectGraph::new(lattice, defects);
    let (mut k, pricing) = match mode {
        MatchMode::Exact => (INITIAL_NEIGHBOURS, true),
        MatchMode::Pruned { k } => (k.max(1), false),
    };
    let mut candidates = graph.nearest_neighbour_edges(k);
    loop {
        let weighted = graph.weighted(&candidates);
        let solution = max_weight_matching(graph.vertex_count(), &weighted, true);
        if !solution.is_perfect() {
            if k >= n {
                unreachable!("the complete defect graph always has a perfect matching");
            }
            k = (2 * k).min(n);
            let denser = graph.nearest_neighbour_edges(k);
            candidates = merge(candidates, denser);
            continue;
        }
        if pricing {
            let violations = graph.violations(&solution, &candidates);
            if !violations.is_empty() {
                candidates = merge(candidates, violations);
                continue;
            }
        }
        return Ok(graph.to_matching(&solution));
    }
}

fn merge(mut a: Vec<(u32, u32)>, b: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    a.extend(b);
    a.sort_unstable();
    a.dedup();
    a
}

/// Matching problem over defects and, on the plane, their boundary copies.
/// Vertex `i < n` is defect `i`; vertex `n + i` is the boundary copy of `i`.
struct DefectGraph<'a> {
    lattice: &'a Lattice,
    defects: &'a [u32],
    planar: bool,
    boundary: Vec<u32>,
    /// Defect index of each plaquette, or `u32::MAX`.
    slot: Vec<u32>,
    ceiling: i64,
}

impl<'a> DefectGraph<'a> {
    fn new(lattice: &'a Lattice, defects: &'a [u32]) -> Self {
        let planar = lattice.kind() == LatticeKind::SquarePlanar;
        let boundary = if planar {
            defects.iter().map(|&d| lattice.boundary_distance(d).unwrap()).collect()
        } else {
            Vec::new()
        };
        let mut slot = vec![u32::MAX; lattice.plaquette_count()];
        for (i, &d) in defects.iter().enumerate() {
            slot[d as usize] = i as u32;
        }
        // larger than any dual distance on these lattices
        let ceiling = 4 * lattice.size() as i64 + 4;
        DefectGraph { lattice, defects, planar, boundary, slot, ceiling }
    }

    fn n(&self) -> usize {
        self.defects.len()
    }

    fn vertex_count(&self) -> usize {
        if self.planar {
            2 * self.n()
        } else {
            self.n()
        }
    }

    /// Cost of pairing two vertices, or `None` if they may not pair.
    fn cost(&self, i: usize, j: usize) -> Option<u32> {
        let n = self.n();
        match (i < n, j < n) {
            (true, true) => Some(self.lattice.dual_distance(self.defects[i], self.defects[j])),
            (false, false) => Some(0),
            (true, false) => (j - n == i).then(|| self.boundary[i]),
            (false, true) => (i - n == j).then(|| self.boundary[j]),
        }
    }

    fn weight(&self, cost: u32) -> i64 {
        2 * (self.ceiling - cost as i64)
    }

    /// Pairs `(i, j)`, `i < j`, where one is among the `k` nearest of the
    /// other (equal distances resolved toward lower index), plus the
    /// boundary structure on the plane. Sorted.
    fn nearest_neighbour_edges(&self, k: usize) -> Vec<(u32, u32)> {
        let n = self.n();
        let take = k.min(n.saturating_sub(1));
        let mut edges = Vec::with_capacity(n * take);
        let mut found: Vec<(u32, u32)> = Vec::new();
        if take > 0 {
            for i in 0..n {
                found.clear();
                self.lattice.visit_by_distance(self.defects[i], u32::MAX, |q, d| {
                    if found.len() >= take && d > found[take - 1].0 {
                        return false;
                    }
                    let j = self.slot[q as usize];
                    if j != u32::MAX && j as usize != i {
                        found.push((d, j));
                    }
                    true
                });
                found.sort_unstable();
                for &(_, j) in &found[..take] {
                    edges.push(((i as u32).min(j), (i as u32).max(j)));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        if self.planar {
            let shift = n as u32;
            let copies: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (a + shift, b + shift)).collect();
            edges.extend((0..shift).map(|i| (i, i + shift)));
            edges.extend(copies);
            edges.sort_unstable();
        }
        edges
    }

    fn weighted(&self, candidates: &[(u32, u32)]) -> Vec<(u32, u32, i64)> {
        candidates
            .iter()
            .map(|&(i, j)| {
                let c = self.cost(i as usize, j as usize).expect("candidate pairs are allowed");
                (i, j, self.weight(c))
            })
            .collect()
    }

    /// Allowed pairs outside the sorted `candidates` whose reduced cost is
    /// negative.
    fn violations(&self, solution: &Solution, candidates: &[(u32, u32)]) -> Vec<(u32, u32)> {
        let n = self.n();
        let dual = &solution.dual;
        let mut out = Vec::new();
        let mut check = |i: usize, j: usize, cost: u32| {
            let w = self.weight(cost);
            // cheap bound first: blossom duals only raise the reduced cost
            if dual[i] + dual[j] - 2 * w < 0
                && candidates.binary_search(&(i as u32, j as u32)).is_err()
                && solution.reduced_cost(i, j, w) < 0
            {
                out.push((i as u32, j as u32));
            }
        };
        // a pair at distance c can only violate if
        // dual_i + dual_j < 4 (ceiling - c)
        let min_dual = dual[..n].iter().copied().min().unwrap_or(0);
        for (i, &dual_i) in dual[..n].iter().enumerate() {
            let limit = 4 * self.ceiling - dual_i - min_dual;
            if limit <= 0 {
                continue;
            }
            let radius = ((limit - 1) / 4).min(u32::MAX as i64) as u32;
            self.lattice.visit_by_distance(self.defects[i], radius, |q, d| {
                let j = self.slot[q as usize];
                if j != u32::MAX && (j as usize) > i {
                    check(i, j as usize, d);
                }
                true
            });
        }
        if self.planar {
            for i in n..2 * n {
                for j in i + 1..2 * n {
                    check(i, j, 0);
                }
            }
        }
        out
    }

    fn to_matching(&self, solution: &Solution) -> Matching {
        let n = self.n();
        let mut pairs = Vec::with_capacity(n);
        let mut total = 0u64;
        for i in 0..n {
            let m = solution.mate[i] as usize;
            if m < n {
                if i < m {
                    let (a, b) = (self.defects[i], self.defects[m]);
                    pairs.push(Pair { a: a.min(b), b: Partner::Defect(a.max(b)) });
                    total += self.cost(i, m).unwrap() as u64;
                }
            } else {
                debug_assert_eq!(m, n + i);
                pairs.push(Pair { a: self.defects[i], b: Partner::Boundary });
                total += self.boundary[i] as u64;
            }
        }
        pairs.sort_unstable();
        Matching { pairs, total_weight: total }
    }
}

/// Exhaustive minimum over all perfect pairings, with boundary options on
/// the plane. Intended as a test oracle for small defect sets.
pub fn brute_force_matching(
    lattice: &Lattice,
    defects: &[u32],
    cap: usize,
) -> Result<Matching, DecodeError> {
    let n = defects.len();
    if n > cap {
        return Err(DecodeError::TooManyDefects { count: n, cap });
    }
    let planar = lattice.kind() == LatticeKind::SquarePlanar;
    if !planar && n % 2 == 1 {
        return Err(DecodeError::OddDefectCount(n));
    }
    let mut partner = vec![usize::MAX; n];
    let mut best: Option<(u64, Vec<usize>)> = None;
    search(lattice, defects, planar, &mut partner, 0, &mut best);
    let (total, partner) = best.unwrap_or((0, Vec::new()));
    let mut pairs = Vec::new();
    for (i, &m) in partner.iter().enumerate() {
        if m == i {
            pairs.push(Pair { a: defects[i], b: Partner::Boundary });
        } else if i < m {
            let (a, b) = (defects[i], defects[m]);
            pairs.push(Pair { a: a.min(b), b: Partner::Defect(a.max(b)) });
        }
    }
    pairs.sort_unstable();
    Ok(Matching { pairs, total_weight: total })
}

fn search(
    lattice: &Lattice,
    defects: &[u32],
    planar: bool,
    partner: &mut Vec<usize>,
    cost: u64,
    best: &mut Option<(u64, Vec<usize>)>,
) {
    if best.as_ref().is_some_and(|(b, _)| cost >= *b) {
        return;
    }
    let Some(i) = partner.iter().position(|&m| m == usize::MAX) else {
        *best = Some((cost, partner.clone()));
        return;
    };
    if planar {
        partner[i] = i;
        let c = lattice.boundary_distance(defects[i]).unwrap() as u64;
        search(lattice, defects, planar, partner, cost + c, best);
        partner[i] = usize::MAX;
    }
    for j in i + 1..defects.len() {
        if partner[j] != usize::MAX {
            continue;
        }
        partner[i] = j;
        partner[j] = i;
        let c = lattice.dual_distance(defects[i], defects[j]) as u64;
        search(lattice, defects, planar, partner, cost + c, best);
        partner[i] = usize::MAX;
        partner[j] = usize::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat(kind: LatticeKind, n: usize) -> Lattice {
        Lattice::new(LatticeSpec::new(kind, n)).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let l = lat(LatticeKind::SquareTorus, 8);
        assert_eq!(match_defect_list(&l, &[], MatchMode::Exact).unwrap(), Matching::default());
        let (p, q) = (l.plaquette_at(1, 1), l.plaquette_at(4, 3));
        let m = match_defect_list(&l, &[p, q], MatchMode::Exact).unwrap();
        assert_eq!(m.total_weight, 5);
        assert_eq!(m.pairs, vec![Pair { a: p, b: Partner::Defect(q) }]);
        assert!(matches!(
            match_defect_list(&l, &[p], MatchMode::Exact),
            Err(DecodeError::OddDefectCount(1))
        ));
    }

    #[test]
    fn unit_square_of_defects() {
        let l = lat(LatticeKind::SquareTorus, 8);
        let d = [l.plaquette_at(0, 0), l.plaquette_at(1, 0), l.plaquette_at(0, 1), l.plaquette_at(1, 1)];
        assert_eq!(brute_force_matching(&l, &d, 10).unwrap().total_weight, 2);
        assert_eq!(match_defect_list(&l, &d, MatchMode::Exact).unwrap().total_weight, 2);
    }

    #[test]
    fn planar_defects_may_use_the_boundary() {
        let l = lat(LatticeKind::SquarePlanar, 8);
        let d = [l.plaquette_at(0, 3)];
        let m = match_defect_list(&l, &d, MatchMode::Exact).unwrap();
        assert_eq!(m.pairs, vec![Pair { a: d[0], b: Partner::Boundary }]);
        assert_eq!(m.total_weight, 1);
        let d = [l.plaquette_at(0, 3), l.plaquette_at(6, 3)];
        assert_eq!(match_defect_list(&l, &d, MatchMode::Exact).unwrap().total_weight, 2);
    }

    #[test]
    fn exact_mode_agrees_with_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in LatticeKind::ALL {
            for n in [4, 6, 8] {
                let l = lat(kind, n);
                for _ in 0..150 {
                    let mut count = rand::Rng::random_range(&mut rng, 0..=10usize).min(l.plaquette_count());
                    if kind.is_periodic() && count % 2 == 1 {
                        count -= 1;
                    }
                    let mut d: Vec<u32> =
                        sample(&mut rng, l.plaquette_count(), count).iter().map(|x| x as u32).collect();
                    d.sort_unstable();
                    let want = brute_force_matching(&l, &d, 10).unwrap().total_weight;
                    let got = match_defect_list(&l, &d, MatchMode::Exact).unwrap();
                    assert_eq!(got.total_weight, want, "{kind} N={n} {d:?}");
                    let covered: usize = got
                        .pairs
                        .iter()
                        .map(|p| if matches!(p.b, Partner::Boundary) { 1 } else { 2 })
                        .sum();
                    assert_eq!(covered, d.len());
                }
            }
        }
    }

    #[test]
    fn pruned_mode_is_never_better_than_exact() {
        let l = lat(LatticeKind::SquareTorus, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let d: Vec<u32> = {
                let mut v: Vec<u32> = sample(&mut rng, l.plaquette_count(), 40).iter().map(|x| x as u32).collect();
                v.sort_unstable();
                v
            };
            let exact = match_defect_list(&l, &d, MatchMode::Exact).unwrap().total_weight;
            let pruned = match_defect_list(&l, &d, MatchMode::Pruned { k: 6 }).unwrap().total_weight;
            assert!(pruned >= exact);
        }
    }
}
