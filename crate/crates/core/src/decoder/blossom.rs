//! Maximum-weight maximum-cardinality matching on general graphs.
//!
//! A primal-dual blossom algorithm in the formulation popularised by
//! J. van Rantwijk's `mwmatching`, specialised to integer weights. Vertex
//! duals are stored doubled so every quantity stays integral; an edge
//! `(i, j, w)` has slack `dual[i] + dual[j] - 2w` plus twice the duals of the
//! blossoms containing both ends. Weights should be even when the greedy
//! warm start is used, so that all free vertices share a dual parity.

const NONE: i32 = -1;

#[derive(Clone, Debug)]
pub struct Solution {
    /// Partner of each vertex, or -1.
    pub mate: Vec<i32>,
    /// Doubled vertex duals followed by blossom duals (index `n + b`).
    pub dual: Vec<i64>,
    /// Enclosing blossom of each vertex or blossom, or -1.
    pub parent: Vec<i32>,
    depth: Vec<u32>,
    root: Vec<i32>,
    /// Sum of blossom duals from a blossom up to its outermost blossom.
    above: Vec<i64>,
}

impl Solution {
    pub fn vertex_count(&self) -> usize {
        self.mate.len()
    }

    pub fn is_perfect(&self) -> bool {
        self.mate.iter().all(|&m| m >= 0)
    }

    /// Reduced cost of a (possibly absent) edge `(i, j)` of weight `w`
    /// under the final duals. Negative values mean the edge would improve
    /// the matching.
    pub fn reduced_cost(&self, i: usize, j: usize, w: i64) -> i64 {
        let base = self.dual[i] + self.dual[j] - 2 * w;
        if base >= 0 {
            return base;
        }
        base + 2 * self.shared_blossom_dual(i, j)
    }

    fn shared_blossom_dual(&self, i: usize, j: usize) -> i64 {
        if self.root[i] == NONE || self.root[i] != self.root[j] {
            return 0;
        }
        let (mut a, mut b) = (i, j);
        while self.depth[a] > self.depth[b] {
            a = self.parent[a] as usize;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b] as usize;
        }
        while a != b {
            a = self.parent[a] as usize;
            b = self.parent[b] as usize;
        }
        self.above[a]
    }

    fn new(mate: Vec<i32>, dual: Vec<i64>, parent: Vec<i32>) -> Self {
        let len = parent.len();
        let mut depth = vec![u32::MAX; len];
        let mut root = vec![NONE; len];
        let mut above = vec![0i64; len];
        let mut chain = Vec::new();
        for x in 0..len {
            let mut c = x;
            while depth[c] == u32::MAX && parent[c] != NONE {
                chain.push(c);
                c = parent[c] as usize;
            }
            if depth[c] == u32::MAX {
                // outermost node
                depth[c] = 0;
                root[c] = c as i32;
                above[c] = if c >= mate.len() { dual[c] } else { 0 };
            }
            while let Some(y) = chain.pop() {
                let p = parent[y] as usize;
                depth[y] = depth[p] + 1;
                root[y] = root[p];
                above[y] = above[p] + if y >= mate.len() { dual[y] } else { 0 };
            }
        }
        // vertices that are not inside any blossom share nothing
        for v in 0..mate.len() {
            if parent[v] == NONE {
                root[v] = NONE;
            }
        }
        Solution { mate, dual, parent, depth, root, above }
    }
}

struct Solver<'a> {
    n: usize,
    edges: &'a [(u32, u32, i64)],
    endpoint: Vec<i32>,
    adj_offsets: Vec<u32>,
    adj: Vec<i32>,
    mate: Vec<i32>,
    label: Vec<i32>,
    labelend: Vec<i32>,
    inblossom: Vec<i32>,
    blossomparent: Vec<i32>,
    blossomchilds: Vec<Vec<i32>>,
    blossombase: Vec<i32>,
    blossomendps: Vec<Vec<i32>>,
    bestedge: Vec<i32>,
    blossombestedges: Vec<Option<Vec<i32>>>,
    unusedblossoms: Vec<i32>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<i32>,
    bestedgeto: Vec<i32>,
    leaves: Vec<i32>,
}

/// Maximum-weight matching among the maximum-cardinality matchings of the
/// graph on vertices `0..n`.
pub fn max_weight_matching(n: usize, edges: &[(u32, u32, i64)], warm_start: bool) -> Solution {
    let mut s = Solver::new(n, edges);
    if warm_start {
        s.greedy_start();
    }
    s.run();
    let mate = (0..n)
        .map(|v| if s.mate[v] >= 0 { s.endpoint[s.mate[v] as usize] } else { NONE })
        .collect();
    let mut parent = s.blossomparent;
    for (b, base) in s.blossombase.iter().enumerate().skip(n) {
        if *base < 0 {
            parent[b] = NONE;
        }
    }
    Solution::new(mate, s.dualvar, parent)
}

fn at<T: Copy>(v: &[T], j: i64) -> T {
    v[j.rem_euclid(v.len() as i64) as usize]
}

impl<'a> Solver<'a> {
    fn new(n: usize, edges: &'a [(u32, u32, i64)]) -> Self {
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut degree = vec![0u32; n + 1];
        for &(i, j, _) in edges {
            endpoint.push(i as i32);
            endpoint.push(j as i32);
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
        let mut adj_offsets = vec![0u32; n + 1];
        for v in 0..n {
            adj_offsets[v + 1] = adj_offsets[v] + degree[v];
        }
        let mut fill = adj_offsets.clone();
        let mut adj = vec![0i32; 2 * edges.len()];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            adj[fill[i as usize] as usize] = 2 * k as i32 + 1;
            fill[i as usize] += 1;
            adj[fill[j as usize] as usize] = 2 * k as i32;
            fill[j as usize] += 1;
        }
        let mut blossombase: Vec<i32> = (0..n as i32).collect();
        blossombase.resize(2 * n, NONE);
        let mut dualvar = vec![maxweight; n];
        dualvar.resize(2 * n, 0);
        Solver {
            n,
            edges,
            endpoint,
            adj_offsets,
            adj,
            mate: vec![NONE; n],
            label: vec![0; 2 * n],
            labelend: vec![NONE; 2 * n],
            inblossom: (0..n as i32).collect(),
            blossomparent: vec![NONE; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![NONE; 2 * n],
            blossombestedges: vec![None; 2 * n],
            unusedblossoms: (n as i32..2 * n as i32).rev().collect(),
            dualvar,
            allowedge: vec![false; edges.len()],
            queue: Vec::new(),
            bestedgeto: vec![NONE; 2 * n],
            leaves: Vec::new(),
        }
    }

    fn neighbours(&self, v: usize) -> std::ops::Range<usize> {
        self.adj_offsets[v] as usize..self.adj_offsets[v + 1] as usize
    }

    #[inline]
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i as usize] + self.dualvar[j as usize] - 2 * w
    }

    /// Duals from the heaviest incident edge, then a greedy matching on
    /// tight edges, then one round of dual lowering for vertices left free.
    fn greedy_start(&mut self) {
        let n = self.n;
        for v in 0..n {
            let best = self.neighbours(v).map(|a| self.edges[(self.adj[a] / 2) as usize].2).max();
            self.dualvar[v] = best.unwrap_or(0);
        }
        for pass in 0..2 {
            for v in 0..n {
                if self.mate[v] != NONE {
                    continue;
                }
                if pass == 1 {
                    let min_slack = self.neighbours(v).map(|a| self.slack((self.adj[a] / 2) as usize)).min();
                    match min_slack {
                        Some(s) if s > 0 => self.dualvar[v] -= s,
                        _ => {}
                    }
                }
                for a in self.neighbours(v) {
                    let p = self.adj[a];
                    let k = (p / 2) as usize;
                    let w = self.endpoint[p as usize] as usize;
                    if self.mate[w] == NONE && w != v && self.slack(k) == 0 {
                        self.mate[v] = p;
                        self.mate[w] = p ^ 1;
                        break;
                    }
                }
            }
        }
    }

    fn collect_leaves(&mut self, b: i32) {
        self.leaves.clear();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if (t as usize) < self.n {
                self.leaves.push(t);
            } else {
                stack.extend(self.blossomchilds[t as usize].iter().rev());
            }
        }
    }

    fn leaves_of(&self, b: i32) -> Vec<i32> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if (t as usize) < self.n {
                out.push(t);
            } else {
                stack.extend(self.blossomchilds[t as usize].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, mut w: i32, mut t: i32, mut p: i32) {
        loop {
            let b = self.inblossom[w as usize];
            debug_assert!(self.label[w as usize] == 0 && self.label[b as usize] == 0);
            self.label[w as usize] = t;
            self.label[b as usize] = t;
            self.labelend[w as usize] = p;
            self.labelend[b as usize] = p;
            self.bestedge[w as usize] = NONE;
            self.bestedge[b as usize] = NONE;
            if t == 1 {
                self.collect_leaves(b);
                self.queue.extend_from_slice(&self.leaves);
                return;
            }
            let base = self.blossombase[b as usize];
            let mb = self.mate[base as usize];
            debug_assert!(mb >= 0);
            w = self.endpoint[mb as usize];
            t = 1;
            p = mb ^ 1;
        }
    }

    fn scan_blossom(&mut self, mut v: i32, mut w: i32) -> i32 {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v as usize];
            if self.label[b as usize] & 4 != 0 {
                base = self.blossombase[b as usize];
                break;
            }
            debug_assert_eq!(self.label[b as usize], 1);
            path.push(b);
            self.label[b as usize] = 5;
            if self.labelend[b as usize] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b as usize] as usize];
                b = self.inblossom[v as usize];
                debug_assert_eq!(self.label[b as usize], 2);
                v = self.endpoint[self.labelend[b as usize] as usize];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b as usize] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: i32, k: usize) {
        let (v, w, _) = self.edges[k];
        let (mut v, mut w) = (v as i32, w as i32);
        let bb = self.inblossom[base as usize];
        let mut bv = self.inblossom[v as usize];
        let mut bw = self.inblossom[w as usize];
        let b = self.unusedblossoms.pop().expect("blossom slots exhausted");
        let bu = b as usize;
        self.blossombase[bu] = base;
        self.blossomparent[bu] = NONE;
        self.blossomparent[bb as usize] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv as usize] = b;
            path.push(bv);
            endps.push(self.labelend[bv as usize]);
            v = self.endpoint[self.labelend[bv as usize] as usize];
            bv = self.inblossom[v as usize];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k as i32);
        while bw != bb {
            self.blossomparent[bw as usize] = b;
            path.push(bw);
            endps.push(self.labelend[bw as usize] ^ 1);
            w = self.endpoint[self.labelend[bw as usize] as usize];
            bw = self.inblossom[w as usize];
        }
        debug_assert_eq!(self.label[bb as usize], 1);
        self.label[bu] = 1;
        self.labelend[bu] = self.labelend[bb as usize];
        self.dualvar[bu] = 0;
        self.blossomchilds[bu] = path.clone();
        self.blossomendps[bu] = endps;
        self.collect_leaves(b);
        for i in 0..self.leaves.len() {
            let leaf = self.leaves[i] as usize;
            if self.label[self.inblossom[leaf] as usize] == 2 {
                self.queue.push(leaf as i32);
            }
            self.inblossom[leaf] = b;
        }
        let mut touched = Vec::new();
        for &sub in &path {
            let lists: Vec<i32> = match self.blossombestedges[sub as usize].take() {
                Some(list) => list,
                None => {
                    let mut ks = Vec::new();
                    for leaf in self.leaves_of(sub) {
                        for a in self.neighbours(leaf as usize) {
                            ks.push(self.adj[a] / 2);
                        }
                    }
                    ks
                }
            };
            for k2 in lists {
                let (mut i, mut j, _) = self.edges[k2 as usize];
                if self.inblossom[j as usize] == b {
                    std::mem::swap(&mut i, &mut j);
                }
                let _ = i;
                let bj = self.inblossom[j as usize];
                if bj != b && self.label[bj as usize] == 1 {
                    let cur = self.bestedgeto[bj as usize];
                    if cur == NONE {
                        touched.push(bj);
                        self.bestedgeto[bj as usize] = k2;
                    } else if self.slack(k2 as usize) < self.slack(cur as usize) {
                        self.bestedgeto[bj as usize] = k2;
                    }
                }
            }
            self.bestedge[sub as usize] = NONE;
        }
        touched.sort_unstable();
        let mut best = Vec::with_capacity(touched.len());
        for bj in touched {
            best.push(self.bestedgeto[bj as usize]);
            self.bestedgeto[bj as usize] = NONE;
        }
        let mut be = NONE;
        for &k2 in &best {
            if be == NONE || self.slack(k2 as usize) < self.slack(be as usize) {
                be = k2;
            }
        }
        self.bestedge[bu] = be;
        self.blossombestedges[bu] = Some(best);
    }

    fn expand_blossom(&mut self, b: i32, endstage: bool) {
        let bu = b as usize;
        let childs = std::mem::take(&mut self.blossomchilds[bu]);
        let endps = std::mem::take(&mut self.blossomendps[bu]);
        for &s in &childs {
            self.blossomparent[s as usize] = NONE;
            if (s as usize) < self.n {
                self.inblossom[s as usize] = s;
            } else if endstage && self.dualvar[s as usize] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves_of(s) {
                    self.inblossom[leaf as usize] = s;
                }
            }
        }
        if !endstage && self.label[bu] == 2 {
            let entrychild = self.inblossom[self.endpoint[(self.labelend[bu] ^ 1) as usize] as usize];
            let mut j = childs.iter().position(|&c| c == entrychild).unwrap() as i64;
            let (jstep, endptrick): (i64, i32) = if j & 1 != 0 {
                j -= childs.len() as i64;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[bu];
            while j != 0 {
                let e1 = self.endpoint[(p ^ 1) as usize];
                self.label[e1 as usize] = 0;
                let q = at(&endps, j - endptrick as i64);
                let e2 = self.endpoint[(q ^ endptrick ^ 1) as usize];
                self.label[e2 as usize] = 0;
                self.assign_label(e1, 2, p);
                self.allowedge[(q / 2) as usize] = true;
                j += jstep;
                p = at(&endps, j - endptrick as i64) ^ endptrick;
                self.allowedge[(p / 2) as usize] = true;
                j += jstep;
            }
            let bv = at(&childs, j);
            let e = self.endpoint[(p ^ 1) as usize];
            self.label[e as usize] = 2;
            self.label[bv as usize] = 2;
            self.labelend[e as usize] = p;
            self.labelend[bv as usize] = p;
            self.bestedge[bv as usize] = NONE;
            j += jstep;
            while at(&childs, j) != entrychild {
                let bv = at(&childs, j);
                if self.label[bv as usize] == 1 {
                    j += jstep;
                    continue;
                }
                let leaves = self.leaves_of(bv);
                let found = leaves.iter().copied().find(|&v| self.label[v as usize] != 0);
                if let Some(v) = found {
                    debug_assert_eq!(self.label[v as usize], 2);
                    debug_assert_eq!(self.inblossom[v as usize], bv);
                    self.label[v as usize] = 0;
                    let m = self.mate[self.blossombase[bv as usize] as usize];
                    self.label[self.endpoint[m as usize] as usize] = 0;
                    let le = self.labelend[v as usize];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }
        self.label[bu] = NONE;
        self.labelend[bu] = NONE;
        self.blossombase[bu] = NONE;
        self.blossombestedges[bu] = None;
        self.bestedge[bu] = NONE;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: i32, v: i32) {
        let bu = b as usize;
        let mut t = v;
        while self.blossomparent[t as usize] != b {
            t = self.blossomparent[t as usize];
        }
        if t as usize >= self.n {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[bu].len() as i64;
        let i = self.blossomchilds[bu].iter().position(|&c| c == t).unwrap() as i64;
        let mut j = i;
        let (jstep, endptrick): (i64, i32) = if i & 1 != 0 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t1 = at(&self.blossomchilds[bu], j);
            let p = at(&self.blossomendps[bu], j - endptrick as i64) ^ endptrick;
            if t1 as usize >= self.n {
                let e = self.endpoint[p as usize];
                self.augment_blossom(t1, e);
            }
            j += jstep;
            let t2 = at(&self.blossomchilds[bu], j);
            if t2 as usize >= self.n {
                let e = self.endpoint[(p ^ 1) as usize];
                self.augment_blossom(t2, e);
            }
            let a = self.endpoint[p as usize] as usize;
            let c = self.endpoint[(p ^ 1) as usize] as usize;
            self.mate[a] = p ^ 1;
            self.mate[c] = p;
        }
        self.blossomchilds[bu].rotate_left(i as usize);
        self.blossomendps[bu].rotate_left(i as usize);
        self.blossombase[bu] = self.blossombase[self.blossomchilds[bu][0] as usize];
        debug_assert_eq!(self.blossombase[bu], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (s0, p0) in [(v as i32, 2 * k as i32 + 1), (w as i32, 2 * k as i32)] {
            let (mut s, mut p) = (s0, p0);
            loop {
                let bs = self.inblossom[s as usize];
                debug_assert_eq!(self.label[bs as usize], 1);
                if bs as usize >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s as usize] = p;
                if self.labelend[bs as usize] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs as usize] as usize];
                let bt = self.inblossom[t as usize];
                debug_assert_eq!(self.label[bt as usize], 2);
                s = self.endpoint[self.labelend[bt as usize] as usize];
                let j = self.endpoint[(self.labelend[bt as usize] ^ 1) as usize];
                if bt as usize >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j as usize] = self.labelend[bt as usize];
                p = self.labelend[bt as usize] ^ 1;
            }
        }
    }

    fn run(&mut self) {
        let n = self.n;
        if n == 0 || self.edges.is_empty() {
            return;
        }
        loop {
            self.label.fill(0);
            self.bestedge.fill(NONE);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.fill(false);
            self.queue.clear();
            for v in 0..n {
                if self.mate[v] == NONE && self.label[self.inblossom[v] as usize] == 0 {
                    self.assign_label(v as i32, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while !augmented {
                    let Some(v) = self.queue.pop() else { break };
                    let vu = v as usize;
                    debug_assert_eq!(self.label[self.inblossom[vu] as usize], 1);
                    for a in self.neighbours(vu) {
                        let p = self.adj[a];
                        let k = (p / 2) as usize;
                        let w = self.endpoint[p as usize];
                        let wu = w as usize;
                        if self.inblossom[vu] == self.inblossom[wu] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        let bw = self.inblossom[wu] as usize;
                        if self.allowedge[k] {
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[bw] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base >= 0 {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[wu] == 0 {
                                debug_assert_eq!(self.label[bw], 2);
                                self.label[wu] = 2;
                                self.labelend[wu] = p ^ 1;
                            }
                        } else if self.label[bw] == 1 {
                            let b = self.inblossom[vu] as usize;
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b] as usize) {
                                self.bestedge[b] = k as i32;
                            }
                        } else if self.label[wu] == 0
                            && (self.bestedge[wu] == NONE || kslack < self.slack(self.bestedge[wu] as usize))
                        {
                            self.bestedge[wu] = k as i32;
                        }
                    }
                }
                if augmented {
                    break;
                }

                let mut deltatype = -1;
                let mut delta = 0i64;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                for v in 0..n {
                    if self.label[self.inblossom[v] as usize] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v] as usize);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE {
                        let kslack = self.slack(self.bestedge[b] as usize);
                        debug_assert_eq!(kslack % 2, 0, "odd slack between S-blossoms");
                        let d = kslack / 2;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] >= 0
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b as i32;
                    }
                }
                if deltatype == -1 {
                    // no further augmenting path exists
                    deltatype = 1;
                    delta = 0;
                }

                for v in 0..n {
                    match self.label[self.inblossom[v] as usize] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] >= 0 && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        let k = deltaedge as usize;
                        self.allowedge[k] = true;
                        let (i, j, _) = self.edges[k];
                        let i = if self.label[self.inblossom[i as usize] as usize] == 0 { j } else { i };
                        self.queue.push(i as i32);
                    }
                    3 => {
                        let k = deltaedge as usize;
                        self.allowedge[k] = true;
                        let (i, _, _) = self.edges[k];
                        self.queue.push(i as i32);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in n..2 * n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] >= 0
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b as i32, true);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive (cardinality, weight) optimum over all matchings.
    fn brute(n: usize, edges: &[(u32, u32, i64)]) -> (usize, i64) {
        fn go(
            edges: &[(u32, u32, i64)],
            k: usize,
            used: &mut Vec<bool>,
            card: usize,
            weight: i64,
            best: &mut (usize, i64),
        ) {
            if k == edges.len() {
                if (card, weight) > *best {
                    *best = (card, weight);
                }
                return;
            }
            go(edges, k + 1, used, card, weight, best);
            let (i, j, w) = edges[k];
            if !used[i as usize] && !used[j as usize] {
                used[i as usize] = true;
                used[j as usize] = true;
                go(edges, k + 1, used, card + 1, weight + w, best);
                used[i as usize] = false;
                used[j as usize] = false;
            }
        }
        let mut best = (0, i64::MIN);
        go(edges, 0, &mut vec![false; n], 0, 0, &mut best);
        best
    }

    fn evaluate(sol: &Solution, edges: &[(u32, u32, i64)]) -> (usize, i64) {
        let mut card = 0;
        let mut weight = 0;
        for &(i, j, w) in edges {
            if sol.mate[i as usize] == j as i32 && sol.mate[j as usize] == i as i32 {
                card += 1;
                weight += w;
            }
        }
        (card, weight)
    }

    #[test]
    fn small_known_cases() {
        let edges = [(0, 1, 2), (1, 2, 6), (2, 3, 2)];
        let sol = max_weight_matching(4, &edges, false);
        assert_eq!(sol.mate, vec![1, 0, 3, 2]);
        // a triangle forces a blossom
        let edges = [(0, 1, 8), (1, 2, 10), (0, 2, 8), (2, 3, 2)];
        let sol = max_weight_matching(4, &edges, true);
        assert_eq!(evaluate(&sol, &edges), (2, 10));
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..3000 {
            let n = rng.random_range(2..=9);
            let density = rng.random_range(0.2..1.0);
            let mut edges = Vec::new();
            for i in 0..n as u32 {
                for j in i + 1..n as u32 {
                    if rng.random_bool(density) {
                        edges.push((i, j, 2 * rng.random_range(0..12)));
                    }
                }
            }
            if edges.len() > 18 {
                edges.truncate(18);
            }
            let want = brute(n, &edges);
            for warm in [false, true] {
                let sol = max_weight_matching(n, &edges, warm);
                let got = evaluate(&sol, &edges);
                // the warm start only certifies the weight of perfect matchings
                if warm && 2 * want.0 < n {
                    assert_eq!(got.0, want.0, "trial {trial}: {edges:?}");
                } else {
                    assert_eq!(got, want, "trial {trial} warm {warm}: {edges:?}");
                }
                if sol.is_perfect() {
                    for &(i, j, w) in &edges {
                        assert!(sol.reduced_cost(i as usize, j as usize, w) >= 0);
                    }
                }
            }
        }
    }
}
