//! Contraction of phase-free diagrams.
//!
//! Plain edges identify the values of the spiders they join, so each
//! plain-connected class carries one bit. A Hadamard edge between classes
//! with bits `u`, `v` contributes `(-1)^(u v)`. Fixing the boundary bits
//! leaves a sum of `(-1)^Q` over the free bits with `Q` quadratic over
//! GF(2), which is evaluated exactly by pairwise elimination.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{C64, TOL};

use super::{Endpoint, ZXDiagram};

pub const DEFAULT_TENSOR_CAP: usize = 12;

/// Small fixed-width bitset.
#[derive(Clone, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
    fn ones(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &w) in self.0.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(k * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }
}

/// `sum_x (-1)^Q(x)` for `Q = sum_{i<j} A_ij x_i x_j + sum_i l_i x_i + c`.
/// Returns `None` when the sum vanishes, else `(negative, log2 |sum|)`.
fn exponential_sum(mut adj: Vec<Bits>, mut lin: Vec<bool>, mut c: bool) -> Option<(bool, u32)> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut pow = 0u32;
    for i in 0..n {
        if !alive[i] {
            continue;
        }
        match adj[i].first() {
            None => {
                if lin[i] {
                    return None;
                }
                pow += 1;
                alive[i] = false;
            }
            Some(j) => {
                // sum over x_i, x_j of (-1)^(x_i L_i + x_j L_j + x_i x_j)
                // is 2 (-1)^(L_i L_j)
                adj[i].clear(j);
                adj[j].clear(i);
                let a = adj[i].ones();
                let b = adj[j].ones();
                for &k in &a {
                    adj[k].clear(i);
                }
                for &k in &b {
                    adj[k].clear(j);
                }
                let (li, lj) = (lin[i], lin[j]);
                c ^= li & lj;
                if li {
                    for &k in &b {
                        lin[k] ^= true;
                    }
                }
                if lj {
                    for &k in &a {
                        lin[k] ^= true;
                    }
                }
                for &k in &a {
                    for &m in &b {
                        if k == m {
                            lin[k] ^= true;
                        } else {
                            adj[k].flip(m);
                            adj[m].flip(k);
                        }
                    }
                }
                adj[i] = Bits::new(n);
                adj[j] = Bits::new(n);
                alive[i] = false;
                alive[j] = false;
                pow += 1;
            }
        }
    }
    Some((c, pow))
}

/// Plain-edge classes and Hadamard couplings of a diagram.
struct Contraction {
    classes: usize,
    /// Class of each boundary label.
    boundary_class: BTreeMap<usize, usize>,
    /// Hadamard edges as class pairs (equal entries are self-couplings).
    hadamards: Vec<(usize, usize)>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

impl Contraction {
    fn new(d: &ZXDiagram) -> Self {
        let spiders = d.spiders().len();
        let labels: Vec<usize> = d.inputs().iter().chain(d.outputs()).copied().collect();
        let label_slot: BTreeMap<usize, usize> =
            labels.iter().enumerate().map(|(k, &b)| (b, spiders + k)).collect();
        let slot = |e: &Endpoint| -> usize {
            match e {
                Endpoint::Port { spider, .. } => d.spider_index(spider).expect("validated"),
                Endpoint::Boundary { boundary } => label_slot[boundary],
            }
        };
        let total = spiders + labels.len();
        let mut parent: Vec<usize> = (0..total).collect();
        for e in d.edges().iter().filter(|e| !e.hadamard) {
            let (a, b) = (find(&mut parent, slot(&e.a)), find(&mut parent, slot(&e.b)));
            parent[a] = b;
        }
        let mut class_of = BTreeMap::new();
        let mut class = vec![0; total];
        for (x, c) in class.iter_mut().enumerate() {
            let r = find(&mut parent, x);
            let next = class_of.len();
            *c = *class_of.entry(r).or_insert(next);
        }
        let hadamards = d
            .edges()
            .iter()
            .filter(|e| e.hadamard)
            .map(|e| (class[slot(&e.a)], class[slot(&e.b)]))
            .collect();
        Contraction {
            classes: class_of.len(),
            boundary_class: labels.iter().map(|&b| (b, class[label_slot[&b]])).collect(),
            hadamards,
        }
    }

    /// Unnormalized amplitude for the boundary bits `bits[label]`, as
    /// `(negative, log2 magnitude)`.
    fn evaluate(&self, bits: &BTreeMap<usize, u8>) -> Option<(bool, u32)> {
        let mut fixed: Vec<Option<u8>> = vec![None; self.classes];
        for (b, &c) in &self.boundary_class {
            let v = bits[b];
            match fixed[c] {
                Some(w) if w != v => return None,
                _ => fixed[c] = Some(v),
            }
        }
        let mut var = vec![usize::MAX; self.classes];
        let mut n = 0;
        for c in 0..self.classes {
            if fixed[c].is_none() {
                var[c] = n;
                n += 1;
            }
        }
        let mut adj = vec![Bits::new(n); n];
        let mut lin = vec![false; n];
        let mut constant = false;
        for &(u, v) in &self.hadamards {
            match (fixed[u], fixed[v]) {
                (None, None) if u == v => lin[var[u]] ^= true,
                (None, None) => {
                    adj[var[u]].flip(var[v]);
                    adj[var[v]].flip(var[u]);
                }
                (None, Some(f)) => lin[var[u]] ^= f == 1,
                (Some(f), None) => lin[var[v]] ^= f == 1,
                (Some(f), Some(g)) => constant ^= f & g == 1,
            }
        }
        exponential_sum(adj, lin, constant)
    }
}

fn labelled_bits(d: &ZXDiagram, bits: &[u8]) -> BTreeMap<usize, u8> {
    d.inputs()
        .iter()
        .chain(d.outputs())
        .copied()
        .zip(bits.iter().copied())
        .collect()
}

/// Unnormalized amplitude of one boundary assignment (inputs first, then
/// outputs). Relative values across assignments are exact.
pub fn amplitude(d: &ZXDiagram, bits: &[u8]) -> Result<f64> {
    let width = d.inputs().len() + d.outputs().len();
    if bits.len() != width {
        return Err(Error::Dimension(format!("{} bits for {width} boundaries", bits.len())));
    }
    let c = Contraction::new(d);
    Ok(match c.evaluate(&labelled_bits(d, bits)) {
        None => 0.0,
        Some((neg, pow)) => {
            let m = 2f64.powi(pow as i32);
            if neg {
                -m
            } else {
                m
            }
        }
    })
}

/// Unit vector with the first nonzero entry real positive. The zero vector
/// is returned unchanged.
pub fn canonicalize(v: &[C64]) -> Vec<C64> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < TOL {
        return v.to_vec();
    }
    let lead = v.iter().find(|a| a.norm() > TOL * norm).copied().unwrap();
    let phase = lead.conj() / lead.norm();
    v.iter().map(|a| a * phase / norm).collect()
}

pub fn equal_up_to_scalar(a: &[C64], b: &[C64], tol: f64) -> bool {
    a.len() == b.len()
        && canonicalize(a)
            .iter()
            .zip(canonicalize(b))
            .all(|(x, y)| (x - y).norm() <= tol)
}

/// Canonical state over the boundaries, inputs first then outputs,
/// big-endian. At most [`DEFAULT_TENSOR_CAP`] boundaries.
pub fn to_tensor(d: &ZXDiagram) -> Result<Vec<C64>> {
    to_tensor_capped(d, DEFAULT_TENSOR_CAP)
}

pub fn to_tensor_capped(d: &ZXDiagram, cap: usize) -> Result<Vec<C64>> {
    let width = d.inputs().len() + d.outputs().len();
    if width > cap {
        return Err(Error::Resource(format!("{width} boundary wires exceeds the cap of {cap}")));
    }
    let c = Contraction::new(d);
    let labels: Vec<usize> = d.inputs().iter().chain(d.outputs()).copied().collect();
    let mut raw = Vec::with_capacity(1 << width);
    let mut max_pow = 0;
    for idx in 0..1usize << width {
        let bits: BTreeMap<usize, u8> = labels
            .iter()
            .enumerate()
            .map(|(k, &b)| (b, ((idx >> (width - 1 - k)) & 1) as u8))
            .collect();
        let r = c.evaluate(&bits);
        if let Some((_, p)) = r {
            max_pow = max_pow.max(p);
        }
        raw.push(r);
    }
    let v: Vec<C64> = raw
        .into_iter()
        .map(|r| match r {
            None => C64::new(0.0, 0.0),
            Some((neg, p)) => {
                let m = 2f64.powi(p as i32 - max_pow as i32);
                C64::new(if neg { -m } else { m }, 0.0)
            }
        })
        .collect();
    Ok(canonicalize(&v))
}

#[cfg(test)]
mod tests {
    use super::super::DiagramBuilder;
    use super::*;

    /// Brute force: sum over every spider bit.
    fn brute(adj: &[Vec<bool>], lin: &[bool]) -> i64 {
        let n = lin.len();
        (0..1u32 << n)
            .map(|x| {
                let bit = |i: usize| x >> i & 1 == 1;
                let mut q = false;
                for i in 0..n {
                    q ^= lin[i] & bit(i);
                    for j in i + 1..n {
                        q ^= adj[i][j] & bit(i) & bit(j);
                    }
                }
                if q {
                    -1
                } else {
                    1
                }
            })
            .sum()
    }

    #[test]
    fn exponential_sum_matches_brute_force() {
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) & 1 == 1
        };
        for n in 1..=7 {
            for _ in 0..40 {
                let mut adj = vec![vec![false; n]; n];
                let mut bits = vec![Bits::new(n); n];
                for i in 0..n {
                    for j in i + 1..n {
                        if next() {
                            adj[i][j] = true;
                            adj[j][i] = true;
                            bits[i].flip(j);
                            bits[j].flip(i);
                        }
                    }
                }
                let lin: Vec<bool> = (0..n).map(|_| next()).collect();
                let expect = brute(&adj, &lin);
                let got = match exponential_sum(bits, lin.clone(), false) {
                    None => 0,
                    Some((neg, p)) => (if neg { -1 } else { 1 }) << p,
                };
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn cup_is_a_bell_pair() {
        let mut b = DiagramBuilder::new();
        let (o0, o1) = (b.output(), b.output());
        b.wire(o0, o1);
        let t = to_tensor(&b.build().unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in t.iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_wire_is_a_hadamard() {
        let mut b = DiagramBuilder::new();
        let (i, o) = (b.input(), b.output());
        b.h_wire(i, o);
        let t = to_tensor(&b.build().unwrap()).unwrap();
        let re: Vec<f64> = t.iter().map(|a| a.re * 2.0).collect();
        assert_eq!(re, vec![1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn empty_diagram_is_the_scalar_one() {
        assert_eq!(to_tensor(&ZXDiagram::empty()).unwrap(), vec![C64::new(1.0, 0.0)]);
    }

    #[test]
    fn cap_is_enforced() {
        let mut b = DiagramBuilder::new();
        b.spider("s", 0, 13);
        for j in 0..13 {
            let o = b.output();
            let p = b.out("s", j);
            b.wire(p, o);
        }
        let d = b.build().unwrap();
        assert!(matches!(to_tensor(&d), Err(Error::Resource(_))));
        assert_eq!(to_tensor_capped(&d, 13).unwrap().len(), 1 << 13);
    }
}
