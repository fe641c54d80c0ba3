//! Independent reference implementations used by the integration tests and
//! the acceptance harness. None of them call into the code they check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use civex::graph::CausalGraph;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- SHA-256

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5, 0xd807aa98,
    0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8,
    0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819,
    0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2,
];

/// Plain FIPS 180-4 SHA-256, lowercase hex.
pub fn sha256_hex(msg: &[u8]) -> String {
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
    ];
    let mut data = msg.to_vec();
    let bit_len = (msg.len() as u64).wrapping_mul(8);
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&bit_len.to_be_bytes());
    for block in data.chunks(64) {
        let mut w = [0u32; 64];
        for i in 0..16 {
            w[i] = u32::from_be_bytes([block[4 * i], block[4 * i + 1], block[4 * i + 2], block[4 * i + 3]]);
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16].wrapping_add(s0).wrapping_add(w[i - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh
                .wrapping_add(s1)
                .wrapping_add(ch)
                .wrapping_add(K[i])
                .wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (x, y) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *x = x.wrapping_add(y);
        }
    }
    h.iter().map(|x| format!("{x:08x}")).collect()
}

/// Canonical text of a frame built by hand: header line, one line per row,
/// LF separators, no trailing newline.
pub fn canonical_text(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut lines = vec![columns.join(",")];
    for r in rows {
        lines.push(r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","));
    }
    lines.join("\n")
}

// ---------------------------------------------------------------- OLS

/// Coefficient and classical SE of regressor `j` (after the intercept) from
/// the normal equations `X'X b = X'y`. The other regressors are
/// standardized first; that leaves regressor `j`'s coefficient and SE
/// unchanged and keeps the LU inverse accurate.
pub fn ols_normal_equations(y: &[f64], regressors: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = y.len();
    let p = regressors.len() + 1;
    let standardized: Vec<Vec<f64>> = regressors
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k == j {
                return c.clone();
            }
            let m = c.iter().sum::<f64>() / n as f64;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            c.iter().map(|v| (v - m) / sd).collect()
        })
        .collect();
    let x = DMatrix::from_fn(n, p, |r, c| if c == 0 { 1.0 } else { standardized[c - 1][r] });
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx.clone().try_inverse().expect("oracle design is singular");
    let beta = &inv * (x.transpose() * &yv);
    let resid = &yv - &x * &beta;
    let sigma2 = resid.dot(&resid) / (n - p) as f64;
    (beta[j + 1], (sigma2 * inv[(j + 1, j + 1)]).sqrt())
}

// ---------------------------------------------------------------- graphs

/// Latent-expanded graph: observed nodes in sorted order, then one latent
/// parent per bidirected edge.
pub struct Expanded {
    pub names: Vec<String>,
    pub observed: usize,
    pub parents: Vec<BTreeSet<usize>>,
}

impl Expanded {
    pub fn new(g: &CausalGraph) -> Self {
        let mut names: Vec<String> = g.nodes().map(str::to_owned).collect();
        names.sort();
        let observed = names.len();
        let idx = |names: &[String], n: &str| names.iter().position(|x| x == n).unwrap();
        let mut parents = vec![BTreeSet::new(); observed];
        for (a, b) in g.directed_edges() {
            let (a, b) = (idx(&names, a), idx(&names, b));
            parents[b].insert(a);
        }
        for (a, b) in g.bidirected_edges() {
            let (a, b) = (idx(&names, a), idx(&names, b));
            let u = names.len();
            names.push(format!("latent{u}"));
            parents.push(BTreeSet::new());
            parents[a].insert(u);
            parents[b].insert(u);
        }
        Expanded {
            names,
            observed,
            parents,
        }
    }

    pub fn index(&self, n: &str) -> usize {
        self.names.iter().position(|x| x == n).unwrap()
    }

    fn len(&self) -> usize {
        self.names.len()
    }

    fn is_edge(&self, a: usize, b: usize) -> bool {
        self.parents[b].contains(&a)
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&u| self.is_edge(u, v) || self.is_edge(v, u))
            .collect()
    }

    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for c in 0..self.len() {
                if self.is_edge(x, c) && out.insert(c) {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Every simple path from `a` to `b` in the skeleton.
    pub fn simple_paths(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        fn go(e: &Expanded, cur: &mut Vec<usize>, b: usize, out: &mut Vec<Vec<usize>>) {
            let last = *cur.last().unwrap();
            if last == b {
                out.push(cur.clone());
                return;
            }
            for n in e.neighbours(last) {
                if !cur.contains(&n) {
                    cur.push(n);
                    go(e, cur, b, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut vec![a], b, &mut out);
        out
    }

    /// Textbook blocking rule applied to one path.
    pub fn path_blocked(&self, path: &[usize], z: &BTreeSet<usize>) -> bool {
        for w in path.windows(3) {
            let (a, v, b) = (w[0], w[1], w[2]);
            let collider = self.is_edge(a, v) && self.is_edge(b, v);
            if collider {
                if self.descendants(v).is_disjoint(z) {
                    return true;
                }
            } else if z.contains(&v) {
                return true;
            }
        }
        false
    }

    pub fn d_separated(&self, x: &[usize], y: &[usize], z: &BTreeSet<usize>) -> bool {
        x.iter().all(|&a| {
            y.iter()
                .all(|&b| self.simple_paths(a, b).iter().all(|p| self.path_blocked(p, z)))
        })
    }

    fn is_backdoor_set(&self, t: usize, y: usize, z: &BTreeSet<usize>) -> bool {
        let desc = self.descendants(t);
        if z.iter().any(|v| desc.contains(v)) {
            return false;
        }
        self.simple_paths(t, y)
            .iter()
            .filter(|p| self.is_edge(p[1], t))
            .all(|p| self.path_blocked(p, z))
    }

    fn is_frontdoor_set(&self, t: usize, y: usize, m: &BTreeSet<usize>) -> bool {
        // Every directed path from t to y goes through m.
        let directed = self
            .simple_paths(t, y)
            .into_iter()
            .filter(|p| p.windows(2).all(|w| self.is_edge(w[0], w[1])));
        for p in directed {
            if !p.iter().any(|v| m.contains(v)) {
                return false;
            }
        }
        // No open backdoor path from t into m.
        let empty = BTreeSet::new();
        for &mi in m {
            for p in self.simple_paths(t, mi) {
                if self.is_edge(p[1], t) && !self.path_blocked(&p, &empty) {
                    return false;
                }
            }
        }
        // Every backdoor path from m to y is blocked by t.
        let tz = BTreeSet::from([t]);
        for &mi in m {
            for p in self.simple_paths(mi, y) {
                let into_m = self.is_edge(p[1], mi);
                let avoids_rest = p[1..].iter().all(|v| !m.contains(v));
                if into_m && avoids_rest && !self.path_blocked(&p, &tz) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleId {
    Backdoor(Vec<String>),
    Frontdoor(Vec<String>),
    None,
}

/// Smallest backdoor set (lexicographic among equals), else the first
/// frontdoor mediator set of size at most `max_mediators`.
pub fn oracle_identify(g: &CausalGraph, max_mediators: usize) -> OracleId {
    let e = Expanded::new(g);
    let t = e.index(g.treatment());
    let y = e.index(g.outcome());
    let candidates: Vec<usize> = (0..e.observed).filter(|&v| v != t && v != y).collect();
    let names = |s: &[usize]| s.iter().map(|&v| e.names[v].clone()).collect::<Vec<_>>();
    for k in 0..=candidates.len() {
        for s in subsets(&candidates, k) {
            if e.is_backdoor_set(t, y, &s.iter().copied().collect()) {
                return OracleId::Backdoor(names(&s));
            }
        }
    }
    for k in 1..=max_mediators.min(candidates.len()) {
        for s in subsets(&candidates, k) {
            if e.is_frontdoor_set(t, y, &s.iter().copied().collect()) {
                return OracleId::Frontdoor(names(&s));
            }
        }
    }
    OracleId::None
}

// ---------------------------------------------------------------- statistics

/// Two-sided exact signed-rank p-value by listing every sign vector and
/// recomputing the statistic with plain average ranks.
pub fn wilcoxon_enumerated(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let less = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let stat = |signs: &dyn Fn(usize) -> bool| -> f64 { (0..n).filter(|&i| signs(i)).map(|i| ranks[i]).sum() };
    let observed = stat(&|i| d[i] > 0.0);
    let mut all = Vec::new();
    for mask in 0u64..(1 << n) {
        all.push(stat(&|i| mask >> i & 1 == 1));
    }
    let eps = 1e-9;
    let le = all.iter().filter(|w| **w <= observed + eps).count() as f64;
    let ge = all.iter().filter(|w| **w >= observed - eps).count() as f64;
    (2.0 * le.min(ge) / all.len() as f64).min(1.0)
}

// ---------------------------------------------------------- random graphs

const NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

/// Random DAG on 2..=6 observed nodes with up to three bidirected edges.
pub fn random_graph<R: Rng>(rng: &mut R) -> CausalGraph {
    let n = rng.random_range(2..=6);
    let mut order: Vec<&str> = NAMES[..n].to_vec();
    order.shuffle(rng);
    let t = rng.random_range(0..n);
    let mut y = rng.random_range(0..n - 1);
    if y >= t {
        y += 1;
    }
    let mut g = CausalGraph::new(order[t], order[y]);
    for name in &order {
        g = g.with_node(*name);
    }
    let p_edge = rng.random_range(0.2..0.6);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p_edge {
                g = g.with_edge(order[i], order[j]);
            }
        }
    }
    let mut bidirected = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bidirected < 3 && rng.random::<f64>() < 0.15 {
                g = g.with_bidirected(order[i], order[j]);
                bidirected += 1;
            }
        }
    }
    g
}
