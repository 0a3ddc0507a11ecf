//! Lattice geometries, incidence maps and the dual-lattice metric.
//!
//! Sites sit at integer coordinates `(x, y)` with `0 <= x, y < N` and are
//! indexed row-major (`y * N + x`). Edges are indexed by orientation block
//! (horizontal, vertical, then diagonal for the triangular lattice), each
//! block row-major in the edge's lower-left site. A square plaquette `(a, b)`
//! is the unit cell whose lower-left site is `(a, b)`; the triangular lattice
//! splits every cell along its up-right diagonal into a lower and an upper
//! triangle.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Marker for the missing side of a boundary edge.
pub const NO_PLAQUETTE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("lattice size {0} is too large")]
    TooLarge(usize),
    #[error("unknown lattice kind `{0}`")]
    UnknownKind(String),
    #[error("plaquette {0} is out of range")]
    BadPlaquette(u32),
    #[error("more than {cap} minimal paths")]
    PathOverflow { cap: usize },
    #[error("boundary paths only exist on the planar lattice")]
    NoBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    SquarePlanar,
    SquareTorus,
    TriangularTorus,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 3] = [
        LatticeKind::SquarePlanar,
        LatticeKind::SquareTorus,
        LatticeKind::TriangularTorus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LatticeKind::SquarePlanar => "square-planar",
            LatticeKind::SquareTorus => "square-torus",
            LatticeKind::TriangularTorus => "triangular-torus",
        }
    }

    pub fn is_periodic(self) -> bool {
        !matches!(self, LatticeKind::SquarePlanar)
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square-planar" => Ok(LatticeKind::SquarePlanar),
            "square-torus" => Ok(LatticeKind::SquareTorus),
            "triangular-torus" => Ok(LatticeKind::TriangularTorus),
            other => Err(LatticeError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    /// Sites per side.
    pub size: usize,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, size: usize) -> Self {
        LatticeSpec { kind, size }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
    Diagonal,
}

/// A subset of the edges of one lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSet(FixedBitSet);

impl EdgeSet {
    pub fn empty(edge_count: usize) -> Self {
        EdgeSet(FixedBitSet::with_capacity(edge_count))
    }

    pub fn full(edge_count: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(edge_count);
        bits.insert_range(..);
        EdgeSet(bits)
    }

    pub fn from_indices(edge_count: usize, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut set = EdgeSet::empty(edge_count);
        for e in edges {
            set.insert(e);
        }
        set
    }

    /// Number of edges of the underlying lattice.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.0.contains(edge)
    }

    pub fn insert(&mut self, edge: usize) {
        self.0.insert(edge);
    }

    pub fn toggle(&mut self, edge: usize) {
        self.0.toggle(edge);
    }

    pub fn clear(&mut self) {
        self.0.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    /// In-place symmetric difference.
    pub fn toggle_all(&mut self, other: &EdgeSet) {
        self.0.symmetric_difference_with(&other.0);
    }

    pub fn symmetric_difference(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = self.clone();
        out.toggle_all(other);
        out
    }

    pub fn as_bits(&self) -> &FixedBitSet {
        &self.0
    }
}

/// Order in which a spanning tree over the non-wrapping edges is grown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Traversal {
    BreadthFirst,
    DepthFirst,
}

/// One step of a spanning tree: `site` is reached from `parent` through `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeStep {
    pub site: u32,
    pub parent: u32,
    pub edge: u32,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    spec: LatticeSpec,
    edge_sites: Vec<[u32; 2]>,
    edge_plaquettes: Vec<[u32; 2]>,
    plaquette_edges: Vec<[u32; 4]>,
    plaquette_corners: Vec<[u32; 4]>,
    arity: usize,
    site_edge_offsets: Vec<u32>,
    site_edge_list: Vec<u32>,
    site_plaquette_offsets: Vec<u32>,
    site_plaquette_list: Vec<u32>,
    seam: FixedBitSet,
    tree: Vec<TreeStep>,
    // Triangular torus: distances from the lower and upper triangle of
    // cell (0, 0) to every plaquette.
    dual_table: Vec<u32>,
    // Relative plaquette offsets sorted by dual distance, one list per
    // triangle orientation (square lattices use only the first).
    shells: [Vec<ShellOffset>; 2],
}

#[derive(Clone, Copy, Debug)]
struct ShellOffset {
    da: i32,
    db: i32,
    upper: bool,
    dist: u32,
}

/// Builds the lattice with all incidence maps populated.
pub fn build_lattice(spec: LatticeSpec) -> Result<Lattice, LatticeError> {
    Lattice::new(spec)
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Result<Self, LatticeError> {
        let n = spec.size;
        if n < 2 {
            return Err(LatticeError::TooSmall(n));
        }
        if n > 4096 {
            return Err(LatticeError::TooLarge(n));
        }
        let mut lattice = Lattice {
            spec,
            edge_sites: Vec::new(),
            edge_plaquettes: Vec::new(),
            plaquette_edges: Vec::new(),
            plaquette_corners: Vec::new(),
            arity: if spec.kind == LatticeKind::TriangularTorus { 3 } else { 4 },
            site_edge_offsets: Vec::new(),
            site_edge_list: Vec::new(),
            site_plaquette_offsets: Vec::new(),
            site_plaquette_list: Vec::new(),
            seam: FixedBitSet::new(),
            tree: Vec::new(),
            dual_table: Vec::new(),
            shells: [Vec::new(), Vec::new()],
        };
        lattice.build_edges();
        lattice.build_plaquettes();
        lattice.build_site_maps();
        lattice.tree = lattice.spanning_tree(Traversal::BreadthFirst);
        if spec.kind == LatticeKind::TriangularTorus {
            lattice.build_dual_table();
        }
        lattice.build_shells();
        Ok(lattice)
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn kind(&self) -> LatticeKind {
        self.spec.kind
    }

    pub fn size(&self) -> usize {
        self.spec.size
    }

    pub fn site_count(&self) -> usize {
        self.spec.size * self.spec.size
    }

    pub fn edge_count(&self) -> usize {
        self.edge_sites.len()
    }

    pub fn plaquette_count(&self) -> usize {
        self.plaquette_edges.len()
    }

    pub fn site(&self, x: usize, y: usize) -> u32 {
        (y * self.spec.size + x) as u32
    }

    pub fn site_coords(&self, site: u32) -> (usize, usize) {
        let s = site as usize;
        (s % self.spec.size, s / self.spec.size)
    }

    pub fn edge_sites(&self, edge: usize) -> [u32; 2] {
        self.edge_sites[edge]
    }

    /// Plaquettes bordering `edge`; the second slot is [`NO_PLAQUETTE`] for
    /// planar boundary edges.
    pub fn edge_plaquettes(&self, edge: usize) -> [u32; 2] {
        self.edge_plaquettes[edge]
    }

    pub fn plaquette_edges(&self, plaquette: u32) -> &[u32] {
        &self.plaquette_edges[plaquette as usize][..self.arity]
    }

    /// Parity-check sites at the corners of `plaquette`.
    pub fn plaquette_corners(&self, plaquette: u32) -> &[u32] {
        &self.plaquette_corners[plaquette as usize][..self.arity]
    }

    pub fn site_edges(&self, site: u32) -> &[u32] {
        let s = site as usize;
        let (a, b) = (self.site_edge_offsets[s], self.site_edge_offsets[s + 1]);
        &self.site_edge_list[a as usize..b as usize]
    }

    /// Plaquettes having `site` as a corner.
    pub fn site_plaquettes(&self, site: u32) -> &[u32] {
        let s = site as usize;
        let (a, b) = (self.site_plaquette_offsets[s], self.site_plaquette_offsets[s + 1]);
        &self.site_plaquette_list[a as usize..b as usize]
    }

    /// Whether `edge` closes a periodic direction.
    pub fn is_seam_edge(&self, edge: usize) -> bool {
        self.seam.contains(edge)
    }

    pub fn edge_index(&self, orientation: Orientation, x: usize, y: usize) -> usize {
        let n = self.spec.size;
        match (self.spec.kind, orientation) {
            (LatticeKind::SquarePlanar, Orientation::Horizontal) => {
                debug_assert!(x + 1 < n && y < n);
                y * (n - 1) + x
            }
            (LatticeKind::SquarePlanar, Orientation::Vertical) => {
                debug_assert!(x < n && y + 1 < n);
                n * (n - 1) + y * n + x
            }
            (LatticeKind::SquarePlanar, Orientation::Diagonal) => {
                panic!("square lattices have no diagonal edges")
            }
            (LatticeKind::SquareTorus, Orientation::Diagonal) => {
                panic!("square lattices have no diagonal edges")
            }
            (_, o) => {
                let block = match o {
                    Orientation::Horizontal => 0,
                    Orientation::Vertical => 1,
                    Orientation::Diagonal => 2,
                };
                block * n * n + (y % n) * n + (x % n)
            }
        }
    }

    /// Orientation and lower-left site coordinates of `edge`.
    pub fn edge_coords(&self, edge: usize) -> (Orientation, usize, usize) {
        let n = self.spec.size;
        if self.spec.kind == LatticeKind::SquarePlanar {
            let h = n * (n - 1);
            if edge < h {
                (Orientation::Horizontal, edge % (n - 1), edge / (n - 1))
            } else {
                let e = edge - h;
                (Orientation::Vertical, e % n, e / n)
            }
        } else {
            let block = edge / (n * n);
            let e = edge % (n * n);
            let o = match block {
                0 => Orientation::Horizontal,
                1 => Orientation::Vertical,
                _ => Orientation::Diagonal,
            };
            (o, e % n, e / n)
        }
    }

    /// Number of plaquettes along each side of the dual lattice.
    fn dual_side(&self) -> usize {
        match self.spec.kind {
            LatticeKind::SquarePlanar => self.spec.size - 1,
            _ => self.spec.size,
        }
    }

    /// Square lattices: plaquette whose lower-left site is `(a, b)`.
    pub fn plaquette_at(&self, a: usize, b: usize) -> u32 {
        assert!(self.spec.kind != LatticeKind::TriangularTorus);
        let side = self.dual_side();
        ((b % side) * side + (a % side)) as u32
    }

    /// Triangular torus: lower (`upper == false`) or upper triangle of cell `(a, b)`.
    pub fn triangle_at(&self, a: usize, b: usize, upper: bool) -> u32 {
        assert_eq!(self.spec.kind, LatticeKind::TriangularTorus);
        let n = self.spec.size;
        (2 * ((b % n) * n + (a % n)) + upper as usize) as u32
    }

    /// Dual coordinates `(a, b, upper)` of a plaquette; `upper` is always
    /// false on square lattices.
    pub fn plaquette_coords(&self, plaquette: u32) -> (usize, usize, bool) {
        let p = plaquette as usize;
        match self.spec.kind {
            LatticeKind::TriangularTorus => {
                let cell = p / 2;
                let n = self.spec.size;
                (cell % n, cell / n, p % 2 == 1)
            }
            _ => {
                let side = self.dual_side();
                (p % side, p / side, false)
            }
        }
    }

    fn build_edges(&mut self) {
        let n = self.spec.size;
        let kind = self.spec.kind;
        let wrap = |v: usize| v % n;
        match kind {
            LatticeKind::SquarePlanar => {
                for y in 0..n {
                    for x in 0..n - 1 {
                        self.edge_sites.push([self.site(x, y), self.site(x + 1, y)]);
                    }
                }
                for y in 0..n - 1 {
                    for x in 0..n {
                        self.edge_sites.push([self.site(x, y), self.site(x, y + 1)]);
                    }
                }
                self.seam = FixedBitSet::with_capacity(self.edge_sites.len());
            }
            LatticeKind::SquareTorus | LatticeKind::TriangularTorus => {
                let blocks = if kind == LatticeKind::SquareTorus { 2 } else { 3 };
                self.seam = FixedBitSet::with_capacity(blocks * n * n);
                for block in 0..blocks {
                    for y in 0..n {
                        for x in 0..n {
                            let (tx, ty) = match block {
                                0 => (x + 1, y),
                                1 => (x, y + 1),
                                _ => (x + 1, y + 1),
                            };
                            let idx = self.edge_sites.len();
                            if tx >= n || ty >= n {
                                self.seam.insert(idx);
                            }
                            self.edge_sites.push([self.site(x, y), self.site(wrap(tx), wrap(ty))]);
                        }
                    }
                }
            }
        }
    }

    fn build_plaquettes(&mut self) {
        let n = self.spec.size;
        let none = [NO_PLAQUETTE; 4];
        match self.spec.kind {
            LatticeKind::SquarePlanar | LatticeKind::SquareTorus => {
                let side = self.dual_side();
                for b in 0..side {
                    for a in 0..side {
                        let edges = [
                            self.edge_index(Orientation::Horizontal, a, b),
                            self.edge_index(Orientation::Vertical, a + 1, b),
                            self.edge_index(Orientation::Horizontal, a, b + 1),
                            self.edge_index(Orientation::Vertical, a, b),
                        ];
                        let (a1, b1) = ((a + 1) % n, (b + 1) % n);
                        self.plaquette_edges.push(edges.map(|e| e as u32));
                        self.plaquette_corners.push([
                            self.site(a, b),
                            self.site(a1, b),
                            self.site(a1, b1),
                            self.site(a, b1),
                        ]);
                    }
                }
            }
            LatticeKind::TriangularTorus => {
                for b in 0..n {
                    for a in 0..n {
                        let (a1, b1) = ((a + 1) % n, (b + 1) % n);
                        let diag = self.edge_index(Orientation::Diagonal, a, b) as u32;
                        // lower triangle: bottom, right, diagonal
                        self.plaquette_edges.push([
                            self.edge_index(Orientation::Horizontal, a, b) as u32,
                            self.edge_index(Orientation::Vertical, a1, b) as u32,
                            diag,
                            NO_PLAQUETTE,
                        ]);
                        self.plaquette_corners.push([
                            self.site(a, b),
                            self.site(a1, b),
                            self.site(a1, b1),
                            NO_PLAQUETTE,
                        ]);
                        // upper triangle: left, top, diagonal
                        self.plaquette_edges.push([
                            self.edge_index(Orientation::Vertical, a, b) as u32,
                            self.edge_index(Orientation::Horizontal, a, b1) as u32,
                            diag,
                            NO_PLAQUETTE,
                        ]);
                        self.plaquette_corners.push([
                            self.site(a, b),
                            self.site(a1, b1),
                            self.site(a, b1),
                            NO_PLAQUETTE,
                        ]);
                    }
                }
            }
        }
        debug_assert!(self.plaquette_edges.iter().all(|p| p[..self.arity].iter().all(|&e| e != NO_PLAQUETTE)));
        let _ = none;
        self.edge_plaquettes = vec![[NO_PLAQUETTE; 2]; self.edge_sites.len()];
        for (p, edges) in self.plaquette_edges.iter().enumerate() {
            for &e in &edges[..self.arity] {
                let slot = &mut self.edge_plaquettes[e as usize];
                if slot[0] == NO_PLAQUETTE {
                    slot[0] = p as u32;
                } else {
                    debug_assert_eq!(slot[1], NO_PLAQUETTE);
                    slot[1] = p as u32;
                }
            }
        }
    }

    fn build_site_maps(&mut self) {
        let sites = self.site_count();
        let mut edges_of = vec![Vec::new(); sites];
        for (e, ends) in self.edge_sites.iter().enumerate() {
            edges_of[ends[0] as usize].push(e as u32);
            edges_of[ends[1] as usize].push(e as u32);
        }
        let mut plaquettes_of = vec![Vec::new(); sites];
        for (p, corners) in self.plaquette_corners.iter().enumerate() {
            for &s in &corners[..self.arity] {
                plaquettes_of[s as usize].push(p as u32);
            }
        }
        let (offsets, list) = flatten(edges_of);
        self.site_edge_offsets = offsets;
        self.site_edge_list = list;
        let (offsets, list) = flatten(plaquettes_of);
        self.site_plaquette_offsets = offsets;
        self.site_plaquette_list = list;
    }

    /// A spanning tree of the sites rooted at site 0 that never uses a seam
    /// edge, listed in visiting order.
    pub fn spanning_tree(&self, traversal: Traversal) -> Vec<TreeStep> {
        let sites = self.site_count();
        let mut seen = vec![false; sites];
        let mut order = Vec::with_capacity(sites);
        let mut frontier: VecDeque<u32> = VecDeque::new();
        seen[0] = true;
        frontier.push_back(0);
        order.push(TreeStep { site: 0, parent: 0, edge: u32::MAX });
        while let Some(s) = match traversal {
            Traversal::BreadthFirst => frontier.pop_front(),
            Traversal::DepthFirst => frontier.pop_back(),
        } {
            for &e in self.site_edges(s) {
                if self.seam.contains(e as usize) {
                    continue;
                }
                let [a, b] = self.edge_sites[e as usize];
                let t = if a == s { b } else { a };
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    order.push(TreeStep { site: t, parent: s, edge: e });
                    frontier.push_back(t);
                }
            }
        }
        debug_assert_eq!(order.len(), sites);
        order
    }

    /// Labels every site with the parity of `edges` crossed along the
    /// default spanning tree from site 0.
    pub fn site_labels(&self, edges: &EdgeSet) -> FixedBitSet {
        let mut labels = FixedBitSet::with_capacity(self.site_count());
        self.site_labels_into(edges, &mut labels);
        labels
    }

    pub fn site_labels_into(&self, edges: &EdgeSet, labels: &mut FixedBitSet) {
        labels.clear();
        labels.grow(self.site_count());
        label_along(&self.tree, edges, labels);
    }

    pub fn site_labels_along(&self, tree: &[TreeStep], edges: &EdgeSet) -> FixedBitSet {
        let mut labels = FixedBitSet::with_capacity(self.site_count());
        label_along(tree, edges, &mut labels);
        labels
    }

    /// Winding parities of a closed dual cycle on a torus: the number of its
    /// edges on the primal row `y = 0` and on the primal column `x = 0`,
    /// each mod 2. A cycle is contractible iff both are `false`. `None` on
    /// the planar lattice.
    pub fn winding(&self, edges: &EdgeSet) -> Option<(bool, bool)> {
        if !self.kind().is_periodic() {
            return None;
        }
        let n = self.size();
        let odd = |o: Orientation, along_x: bool| {
            (0..n)
                .filter(|&k| {
                    let e = if along_x { self.edge_index(o, k, 0) } else { self.edge_index(o, 0, k) };
                    edges.contains(e)
                })
                .count()
                % 2
                == 1
        };
        Some((odd(Orientation::Horizontal, true), odd(Orientation::Vertical, false)))
    }

    /// Plaquettes bordering an odd number of edges of `edges` (the mod-2
    /// boundary on the dual lattice).
    pub fn dual_boundary(&self, edges: &EdgeSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.plaquette_count());
        self.dual_boundary_into(edges, &mut out);
        out
    }

    pub fn dual_boundary_into(&self, edges: &EdgeSet, out: &mut FixedBitSet) {
        out.clear();
        out.grow(self.plaquette_count());
        for e in edges.iter() {
            for p in self.edge_plaquettes[e] {
                if p != NO_PLAQUETTE {
                    out.toggle(p as usize);
                }
            }
        }
    }

    /// Neighbours of `plaquette` on the dual lattice with the primal edge
    /// crossed to reach each. Planar boundary edges are skipped.
    pub fn dual_neighbors(&self, plaquette: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.plaquette_edges(plaquette).iter().filter_map(move |&e| {
            let [a, b] = self.edge_plaquettes[e as usize];
            let other = if a == plaquette { b } else { a };
            (other != NO_PLAQUETTE).then_some((other, e))
        })
    }

    fn check_plaquette(&self, p: u32) -> Result<(), LatticeError> {
        if (p as usize) < self.plaquette_count() {
            Ok(())
        } else {
            Err(LatticeError::BadPlaquette(p))
        }
    }

    /// Graph distance between two plaquettes on the dual lattice (minimum over
    /// wrap-arounds on tori).
    pub fn dual_distance(&self, p: u32, q: u32) -> u32 {
        let (pa, pb, pu) = self.plaquette_coords(p);
        let (qa, qb, qu) = self.plaquette_coords(q);
        match self.spec.kind {
            LatticeKind::SquarePlanar => (pa.abs_diff(qa) + pb.abs_diff(qb)) as u32,
            LatticeKind::SquareTorus => {
                let n = self.spec.size;
                let wrap = |d: usize| d.min(n - d);
                (wrap(pa.abs_diff(qa)) + wrap(pb.abs_diff(qb))) as u32
            }
            LatticeKind::TriangularTorus => {
                let n = self.spec.size;
                let da = (qa + n - pa) % n;
                let db = (qb + n - pb) % n;
                let target = 2 * (db * n + da) + qu as usize;
                self.dual_table[(pu as usize) * 2 * n * n + target]
            }
        }
    }

    /// Calls `visit(q, d)` for every plaquette `q` at dual distance
    /// `d <= max_dist` from `p`, in order of nondecreasing `d`. Stops early
    /// when `visit` returns `false`.
    pub fn visit_by_distance(&self, p: u32, max_dist: u32, mut visit: impl FnMut(u32, u32) -> bool) {
        let (pa, pb, pu) = self.plaquette_coords(p);
        let (pa, pb) = (pa as i64, pb as i64);
        let side = self.dual_side() as i64;
        let list = &self.shells[pu as usize];
        for off in list {
            if off.dist > max_dist {
                return;
            }
            let (mut a, mut b) = (pa + off.da as i64, pb + off.db as i64);
            let q = match self.spec.kind {
                LatticeKind::SquarePlanar => {
                    if !(0..side).contains(&a) || !(0..side).contains(&b) {
                        continue;
                    }
                    (b * side + a) as u32
                }
                LatticeKind::SquareTorus => (b.rem_euclid(side) * side + a.rem_euclid(side)) as u32,
                LatticeKind::TriangularTorus => {
                    a %= side;
                    b %= side;
                    (2 * (b * side + a) + off.upper as i64) as u32
                }
            };
            if !visit(q, off.dist) {
                return;
            }
        }
    }

    fn build_shells(&mut self) {
        let side = self.dual_side() as i32;
        match self.spec.kind {
            LatticeKind::TriangularTorus => {
                let count = self.plaquette_count();
                for start in 0..2 {
                    let mut list: Vec<ShellOffset> = (0..count)
                        .map(|t| ShellOffset {
                            da: ((t / 2) % side as usize) as i32,
                            db: ((t / 2) / side as usize) as i32,
                            upper: t % 2 == 1,
                            dist: self.dual_table[start * count + t],
                        })
                        .collect();
                    list.sort_by_key(|o| o.dist);
                    self.shells[start] = list;
                }
            }
            kind => {
                // on the torus each plaquette appears once, at its minimal offset
                let range = if kind == LatticeKind::SquareTorus {
                    -((side - 1) / 2)..=side / 2
                } else {
                    -(side - 1)..=side - 1
                };
                let mut list: Vec<ShellOffset> = range
                    .clone()
                    .flat_map(|db| range.clone().map(move |da| (da, db)))
                    .map(|(da, db)| ShellOffset { da, db, upper: false, dist: da.unsigned_abs() + db.unsigned_abs() })
                    .collect();
                list.sort_by_key(|o| o.dist);
                self.shells[0] = list;
            }
        }
    }

    /// Checked form of [`Lattice::dual_distance`].
    pub fn try_dual_distance(&self, p: u32, q: u32) -> Result<u32, LatticeError> {
        self.check_plaquette(p)?;
        self.check_plaquette(q)?;
        Ok(self.dual_distance(p, q))
    }

    /// Planar lattice: number of boundary edges a chain from `p` needs to
    /// leave the lattice. `None` on tori.
    pub fn boundary_distance(&self, p: u32) -> Option<u32> {
        if self.spec.kind != LatticeKind::SquarePlanar {
            return None;
        }
        let side = self.dual_side();
        let (a, b, _) = self.plaquette_coords(p);
        Some((a + 1).min(side - a).min(b + 1).min(side - b) as u32)
    }

    fn build_dual_table(&mut self) {
        let count = self.plaquette_count();
        let mut table = vec![u32::MAX; 2 * count];
        let mut queue = VecDeque::new();
        for start in 0..2u32 {
            let row = &mut table[start as usize * count..(start as usize + 1) * count];
            row[start as usize] = 0;
            queue.clear();
            queue.push_back(start);
            while let Some(p) = queue.pop_front() {
                let d = row[p as usize];
                for &e in &self.plaquette_edges[p as usize][..self.arity] {
                    let [a, b] = self.edge_plaquettes[e as usize];
                    let q = if a == p { b } else { a };
                    if row[q as usize] == u32::MAX {
                        row[q as usize] = d + 1;
                        queue.push_back(q);
                    }
                }
            }
        }
        self.dual_table = table;
    }

    /// Signed displacement from `p` to `q` on a square lattice. On the torus
    /// each axis takes the shorter way round, the non-wrapping way on ties.
    pub fn square_displacement(&self, p: u32, q: u32) -> (i64, i64) {
        let (pa, pb, _) = self.plaquette_coords(p);
        let (qa, qb, _) = self.plaquette_coords(q);
        let raw = (qa as i64 - pa as i64, qb as i64 - pb as i64);
        if self.spec.kind != LatticeKind::SquareTorus {
            return raw;
        }
        let n = self.spec.size as i64;
        let fold = |d: i64| {
            let alt = if d > 0 { d - n } else { d + n };
            if alt.abs() < d.abs() {
                alt
            } else {
                d
            }
        };
        (fold(raw.0), fold(raw.1))
    }

    /// Primal edge crossed by a unit dual step from square plaquette `(a, b)`.
    fn square_step_edge(&self, a: i64, b: i64, dx: i64, dy: i64) -> usize {
        let n = self.spec.size as i64;
        let w = |v: i64| v.rem_euclid(n) as usize;
        match (dx, dy) {
            (1, 0) => self.edge_index(Orientation::Vertical, w(a + 1), w(b)),
            (-1, 0) => self.edge_index(Orientation::Vertical, w(a), w(b)),
            (0, 1) => self.edge_index(Orientation::Horizontal, w(a), w(b + 1)),
            (0, -1) => self.edge_index(Orientation::Horizontal, w(a), w(b)),
            _ => unreachable!("not a unit step"),
        }
    }

    /// Appends the edges of the straight-line minimal dual path from `p` to
    /// `q` to `out`.
    ///
    /// Square lattices: among monotone minimal paths, each step goes to the
    /// neighbour closest to the segment `p -> q`; ties go to the axis with
    /// more remaining displacement, then to the horizontal step. Triangular
    /// torus: a deterministic greedy descent of the dual distance.
    pub fn staircase_edges(&self, p: u32, q: u32, out: &mut Vec<u32>) {
        if p == q {
            return;
        }
        if self.spec.kind == LatticeKind::TriangularTorus {
            self.descent_edges(p, q, out);
            return;
        }
        let (dx, dy) = self.square_displacement(p, q);
        let (sx, sy) = (dx.signum(), dy.signum());
        let (pa, pb, _) = self.plaquette_coords(p);
        let (mut x, mut y) = (0i64, 0i64);
        while (x, y) != (dx, dy) {
            let (rx, ry) = ((dx - x).abs(), (dy - y).abs());
            let horizontal = if rx == 0 {
                false
            } else if ry == 0 {
                true
            } else {
                let off_h = ((x + sx) * dy - y * dx).abs();
                let off_v = (x * dy - (y + sy) * dx).abs();
                match off_h.cmp(&off_v) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => rx >= ry,
                }
            };
            let (ux, uy) = if horizontal { (sx, 0) } else { (0, sy) };
            let e = self.square_step_edge(pa as i64 + x, pb as i64 + y, ux, uy);
            out.push(e as u32);
            x += ux;
            y += uy;
        }
    }

    fn descent_edges(&self, p: u32, q: u32, out: &mut Vec<u32>) {
        let mut cur = p;
        let mut d = self.dual_distance(p, q);
        while d > 0 {
            let (next, e) = self
                .dual_neighbors(cur)
                .find(|&(nb, _)| self.dual_distance(nb, q) == d - 1)
                .expect("dual distance decreases along some neighbour");
            out.push(e);
            cur = next;
            d -= 1;
        }
    }

    /// Straight-line minimal dual path from `p` to `q` as an edge set.
    pub fn staircase_path(&self, p: u32, q: u32) -> Result<EdgeSet, LatticeError> {
        self.check_plaquette(p)?;
        self.check_plaquette(q)?;
        let mut edges = Vec::new();
        self.staircase_edges(p, q, &mut edges);
        Ok(EdgeSet::from_indices(self.edge_count(), edges.into_iter().map(|e| e as usize)))
    }

    /// Planar lattice: appends the straight chain from `p` to the nearest
    /// boundary. Ties prefer left, right, bottom, top in that order.
    pub fn boundary_edges(&self, p: u32, out: &mut Vec<u32>) -> Result<(), LatticeError> {
        let Some(dist) = self.boundary_distance(p) else {
            return Err(LatticeError::NoBoundary);
        };
        let side = self.dual_side() as i64;
        let (a, b, _) = self.plaquette_coords(p);
        let (a, b) = (a as i64, b as i64);
        let (dx, dy) = if a + 1 == dist as i64 {
            (-1, 0)
        } else if side - a == dist as i64 {
            (1, 0)
        } else if b + 1 == dist as i64 {
            (0, -1)
        } else {
            (0, 1)
        };
        for k in 0..dist as i64 {
            out.push(self.square_step_edge(a + k * dx, b + k * dy, dx, dy) as u32);
        }
        Ok(())
    }

    /// Every minimal dual path from `p` to `q`, each as an edge set.
    pub fn enumerate_minimal_paths(
        &self,
        p: u32,
        q: u32,
        cap: usize,
    ) -> Result<Vec<EdgeSet>, LatticeError> {
        self.check_plaquette(p)?;
        self.check_plaquette(q)?;
        let mut paths = Vec::new();
        let mut stack = Vec::new();
        self.extend_paths(p, q, &mut stack, &mut paths, cap)?;
        Ok(paths)
    }

    fn extend_paths(
        &self,
        cur: u32,
        q: u32,
        stack: &mut Vec<u32>,
        paths: &mut Vec<EdgeSet>,
        cap: usize,
    ) -> Result<(), LatticeError> {
        let d = self.dual_distance(cur, q);
        if d == 0 {
            if paths.len() == cap {
                return Err(LatticeError::PathOverflow { cap });
            }
            paths.push(EdgeSet::from_indices(
                self.edge_count(),
                stack.iter().map(|&e| e as usize),
            ));
            return Ok(());
        }
        let steps: Vec<(u32, u32)> = self
            .dual_neighbors(cur)
            .filter(|&(nb, _)| self.dual_distance(nb, q) + 1 == d)
            .collect();
        for (nb, e) in steps {
            stack.push(e);
            self.extend_paths(nb, q, stack, paths, cap)?;
            stack.pop();
        }
        Ok(())
    }
}

fn flatten(lists: Vec<Vec<u32>>) -> (Vec<u32>, Vec<u32>) {
    let mut offsets = Vec::with_capacity(lists.len() + 1);
    let mut flat = Vec::new();
    offsets.push(0);
    for list in lists {
        flat.extend(list);
        offsets.push(flat.len() as u32);
    }
    (offsets, flat)
}

fn label_along(tree: &[TreeStep], edges: &EdgeSet, labels: &mut FixedBitSet) {
    for step in &tree[1..] {
        let flip = edges.contains(step.edge as usize);
        let value = labels.contains(step.parent as usize) ^ flip;
        labels.set(step.site as usize, value);
    }
}
