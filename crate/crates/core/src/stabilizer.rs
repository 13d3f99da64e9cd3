//! Reference states built from Pauli operators, independent of diagram
//! contraction: GHZ and graph states, stabilizer projections, code words and
//! the Knill-Laflamme test. Qubit 0 is the most significant index bit.

use crate::error::{Error, Result};
use crate::fock::C64;

/// A Pauli string such as `"XZIY"`, one letter per qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pauli(Vec<u8>);

impl Pauli {
    pub fn parse(text: &str) -> Result<Self> {
        let ops = text.bytes().map(|c| c.to_ascii_uppercase()).collect::<Vec<_>>();
        if let Some(bad) = ops.iter().find(|c| !b"IXYZ".contains(c)) {
            return Err(Error::Parse(format!("bad Pauli letter {:?}", *bad as char)));
        }
        Ok(Pauli(ops))
    }

    /// `letter` on each listed qubit of an `n`-qubit register.
    pub fn on(n: usize, letter: u8, qubits: &[usize]) -> Self {
        let mut ops = vec![b'I'; n];
        for &q in qubits {
            ops[q] = letter;
        }
        Pauli(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&c| c != b'I').count()
    }

    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let n = self.0.len();
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        for (i, a) in state.iter().enumerate() {
            let mut j = i;
            let mut phase = C64::new(1.0, 0.0);
            for (q, &op) in self.0.iter().enumerate() {
                let bit = n - 1 - q;
                let one = i >> bit & 1 == 1;
                match op {
                    b'X' => j ^= 1 << bit,
                    b'Z' if one => phase = -phase,
                    b'Y' => {
                        j ^= 1 << bit;
                        phase *= if one { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
                    }
                    _ => {}
                }
            }
            out[j] += a * phase;
        }
        out
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let n = inner(&v, &v).re.sqrt();
    v.into_iter().map(|a| a / n).collect()
}

pub fn ghz_state(n: usize) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![C64::new(0.0, 0.0); 1 << n];
    v[0] = C64::new(s, 0.0);
    v[(1 << n) - 1] += C64::new(s, 0.0);
    v
}

/// Graph state from its amplitude formula `(-1)^(number of edges with both
/// ends set)`.
pub fn graph_state(n: usize, edges: &[(usize, usize)]) -> Vec<C64> {
    let scale = (1u64 << n) as f64;
    (0..1usize << n)
        .map(|x| {
            let bit = |q: usize| x >> (n - 1 - q) & 1;
            let parity: usize = edges.iter().map(|&(a, b)| bit(a) & bit(b)).sum();
            C64::new(if parity % 2 == 0 { 1.0 } else { -1.0 } / scale.sqrt(), 0.0)
        })
        .collect()
}

pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|k| (k, (k + 1) % n)).collect()
}

/// `K_v = X_v prod_{w ~ v} Z_w` for each vertex.
pub fn graph_stabilizers(n: usize, edges: &[(usize, usize)]) -> Vec<Pauli> {
    (0..n)
        .map(|v| {
            let mut ops = vec![b'I'; n];
            ops[v] = b'X';
            for &(a, b) in edges {
                if a == v {
                    ops[b] = b'Z';
                } else if b == v {
                    ops[a] = b'Z';
                }
            }
            Pauli(ops)
        })
        .collect()
}

/// Applies `prod (I + K)/2` to `start`.
pub fn project(generators: &[Pauli], start: &[C64]) -> Vec<C64> {
    let mut v = start.to_vec();
    for g in generators {
        let gv = g.apply(&v);
        v = v.iter().zip(&gv).map(|(a, b)| (a + b) * 0.5).collect();
    }
    v
}

/// The state stabilized by `n` independent commuting generators.
pub fn stabilizer_state(n: usize, generators: &[Pauli]) -> Result<Vec<C64>> {
    for k in 0..1usize << n {
        let mut e = vec![C64::new(0.0, 0.0); 1 << n];
        e[k] = C64::new(1.0, 0.0);
        let v = project(generators, &e);
        if inner(&v, &v).re > 1e-12 {
            return Ok(normalized(v));
        }
    }
    Err(Error::Parameter("stabilizer group has no common +1 state".into()))
}

/// Whether every generator fixes `state`.
pub fn is_stabilized(state: &[C64], generators: &[Pauli], tol: f64) -> bool {
    generators.iter().all(|g| {
        g.apply(state)
            .iter()
            .zip(state)
            .all(|(a, b)| (a - b).norm() < tol)
    })
}

/// All Pauli strings on `n` qubits of weight `1..=w`.
pub fn paulis_up_to_weight(n: usize, w: usize) -> Vec<Pauli> {
    let mut out = Vec::new();
    let mut ops = vec![b'I'; n];
    fn rec(q: usize, left: usize, ops: &mut Vec<u8>, out: &mut Vec<Pauli>) {
        if q == ops.len() {
            if ops.iter().any(|&c| c != b'I') {
                out.push(Pauli(ops.clone()));
            }
            return;
        }
        rec(q + 1, left, ops, out);
        if left > 0 {
            for c in [b'X', b'Y', b'Z'] {
                ops[q] = c;
                rec(q + 1, left - 1, ops, out);
            }
            ops[q] = b'I';
        }
    }
    rec(0, w, &mut ops, &mut out);
    out
}

/// Knill-Laflamme: `<i|E|j> = c_E delta_ij` for all Paulis of weight below
/// `distance`, so errors of weight `< distance` are detected.
pub fn detects_errors(codewords: &[Vec<C64>], distance: usize, tol: f64) -> bool {
    let n = codewords[0].len().trailing_zeros() as usize;
    let words: Vec<Vec<C64>> = codewords.iter().cloned().map(normalized).collect();
    paulis_up_to_weight(n, distance - 1).iter().all(|e| {
        let moved: Vec<Vec<C64>> = words.iter().map(|w| e.apply(w)).collect();
        let c = inner(&words[0], &moved[0]);
        (0..words.len()).all(|i| {
            (0..words.len()).all(|j| {
                let want = if i == j { c } else { C64::new(0.0, 0.0) };
                (inner(&words[i], &moved[j]) - want).norm() < tol
            })
        })
    })
}

/// Code words of QPC(n, m): `|0_L>` is a product of `n` m-qubit GHZ states
/// and `|1_L>` flips the relative sign in every block.
pub fn qpc_codewords(n: usize, m: usize) -> [Vec<C64>; 2] {
    let q = n * m;
    let mut zero = vec![C64::new(1.0, 0.0)];
    for _ in 0..n {
        let block = ghz_state(m);
        zero = zero
            .iter()
            .flat_map(|a| block.iter().map(move |b| a * b))
            .collect();
    }
    let heads: Vec<usize> = (0..n).map(|b| b * m).collect();
    let one = Pauli::on(q, b'Z', &heads).apply(&zero);
    [zero, one]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_graph_state_two_ways() {
        let edges = ring_edges(6);
        let a = graph_state(6, &edges);
        let b = stabilizer_state(6, &graph_stabilizers(6, &edges)).unwrap();
        assert!((inner(&a, &b).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_is_i_x_z() {
        let v = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let y = Pauli::parse("Y").unwrap().apply(&v);
        let xz = Pauli::parse("X").unwrap().apply(&Pauli::parse("Z").unwrap().apply(&v));
        for (a, b) in y.iter().zip(&xz) {
            assert!((a - b * C64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn five_qubit_ring_code_has_distance_three() {
        let gens = graph_stabilizers(5, &ring_edges(5));
        let zero = stabilizer_state(5, &[gens.clone(), vec![Pauli::parse("ZZZZZ").unwrap()]].concat())
            .unwrap();
        let one = Pauli::parse("XXXXX").unwrap().apply(&zero);
        assert!(detects_errors(&[zero.clone(), one.clone()], 3, 1e-9));
        assert!(!detects_errors(&[zero, one], 4, 1e-9));
    }

    #[test]
    fn qpc_code_words_are_orthogonal() {
        let [a, b] = qpc_codewords(2, 2);
        assert!(inner(&a, &b).norm() < 1e-12);
        assert!(detects_errors(&[a, b], 2, 1e-9));
    }
}
