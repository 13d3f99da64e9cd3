//! Dual-rail qubits: qubit `i` owns modes `(2i, 2i + 1)`, with `|0> = |10>>`
//! and `|1> = |01>>`.

use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{FockState, FockSuperposition};

/// Computational basis string of `n` qubits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitString {
    bits: Vec<u8>,
}

impl QubitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Parameter(format!("qubit value {b} is not 0 or 1")));
        }
        Ok(QubitString { bits })
    }

    /// The `n`-bit string whose bit `i` is bit `n - 1 - i` of `index`, so
    /// that `from_index(n, k)` for `k = 0..2^n` runs in lexicographic order.
    pub fn from_index(n: usize, index: usize) -> Self {
        QubitString {
            bits: (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn all(n: usize) -> impl Iterator<Item = QubitString> {
        (0..1usize << n).map(move |k| QubitString::from_index(n, k))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn complement(&self) -> QubitString {
        QubitString {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }

    pub fn concat(&self, other: &QubitString) -> QubitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        QubitString { bits }
    }
}

impl fmt::Debug for QubitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QubitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Fock state of the `2n` rails carrying `x`.
pub fn encode(x: &QubitString) -> FockState {
    let mut occ = Vec::with_capacity(2 * x.len());
    for &b in x.bits() {
        if b == 0 {
            occ.extend_from_slice(&[1, 0]);
        } else {
            occ.extend_from_slice(&[0, 1]);
        }
    }
    FockState::new(occ)
}

/// Outcome of reading a Fock state as dual-rail qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Qubits(QubitString),
    NotDualRail,
}

pub fn decode(state: &FockState) -> Result<Decoded> {
    if state.modes() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "{} modes cannot hold dual-rail qubits",
            state.modes()
        )));
    }
    let mut bits = Vec::with_capacity(state.modes() / 2);
    for pair in state.occupations().chunks(2) {
        match (pair[0], pair[1]) {
            (1, 0) => bits.push(0),
            (0, 1) => bits.push(1),
            _ => return Ok(Decoded::NotDualRail),
        }
    }
    Ok(Decoded::Qubits(QubitString { bits }))
}

/// Decodes the mode pairs `rails` of a larger register.
pub fn decode_rails(state: &FockState, rails: &[(usize, usize)]) -> Decoded {
    let mut bits = Vec::with_capacity(rails.len());
    for &(zero, one) in rails {
        match (state.get(zero), state.get(one)) {
            (1, 0) => bits.push(0),
            (0, 1) => bits.push(1),
            _ => return Decoded::NotDualRail,
        }
    }
    Decoded::Qubits(QubitString { bits })
}

/// `P_DR^{(x)n}`: the projector onto the dual-rail subspace of `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualRailProjector {
    n: usize,
}

impl DualRailProjector {
    pub fn new(n: usize) -> Self {
        DualRailProjector { n }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn apply(&self, state: &FockSuperposition) -> Result<FockSuperposition> {
        project_dr(state, self.n)
    }
}

/// Drops every term that is not a valid `n`-qubit dual-rail encoding.
pub fn project_dr(state: &FockSuperposition, n: usize) -> Result<FockSuperposition> {
    if state.modes() != 2 * n {
        return Err(Error::Dimension(format!(
            "{}-mode state is not a {n}-qubit register",
            state.modes()
        )));
    }
    let mut out = FockSuperposition::empty(state.modes());
    for (term, &amp) in state.terms() {
        if matches!(decode(term)?, Decoded::Qubits(_)) {
            out.add(term.clone(), amp);
        }
    }
    Ok(out)
}

/// Superposition `sum_x amps[x] |f(x)>>` over all `n`-qubit basis strings,
/// with `amps` indexed by [`QubitString::index`].
pub fn encode_state(n: usize, amps: &[num_complex::Complex64]) -> Result<FockSuperposition> {
    if amps.len() != 1 << n {
        return Err(Error::Dimension(format!(
            "{} amplitudes for {n} qubits",
            amps.len()
        )));
    }
    FockSuperposition::from_terms(
        2 * n,
        QubitString::all(n).map(|x| (encode(&x), amps[x.index()])),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn qs(bits: &[u8]) -> QubitString {
        QubitString::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn single_qubit_encoding() {
        assert_eq!(encode(&qs(&[0])), FockState::new(vec![1, 0]));
        assert_eq!(encode(&qs(&[1])), FockState::new(vec![0, 1]));
        assert_eq!(encode(&qs(&[0, 1])), FockState::new(vec![1, 0, 0, 1]));
    }

    #[test]
    fn decoding() {
        assert_eq!(decode(&FockState::new(vec![1, 0])).unwrap(), Decoded::Qubits(qs(&[0])));
        assert_eq!(
            decode(&FockState::new(vec![1, 0, 0, 1])).unwrap(),
            Decoded::Qubits(qs(&[0, 1]))
        );
        assert_eq!(decode(&FockState::new(vec![2, 0, 0, 0])).unwrap(), Decoded::NotDualRail);
        assert!(matches!(decode(&FockState::new(vec![1, 0, 0])), Err(Error::Dimension(_))));
    }

    #[test]
    fn projector_drops_bunched_terms() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let state = FockSuperposition::from_terms(
            4,
            [
                (FockState::new(vec![2, 0, 0, 0]), Complex64::new(h, 0.0)),
                (FockState::new(vec![1, 0, 1, 0]), Complex64::new(h, 0.0)),
            ],
        )
        .unwrap();
        let p = project_dr(&state, 2).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.amplitude(&FockState::new(vec![1, 0, 1, 0])).re - h).abs() < 1e-12);
        assert_eq!(project_dr(&p, 2).unwrap(), p);
        assert!(matches!(project_dr(&state, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn index_order_is_lexicographic() {
        let all: Vec<_> = QubitString::all(3).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[1], qs(&[0, 0, 1]));
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(n in 1usize..=8, seed in any::<u64>()) {
            let x = QubitString::from_index(n, (seed as usize) % (1 << n));
            let f = encode(&x);
            prop_assert_eq!(f.photons(), n);
            prop_assert_eq!(decode(&f).unwrap(), Decoded::Qubits(x));
        }

        #[test]
        fn projection_is_idempotent_and_contracting(
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10)
        ) {
            // two photons in four modes: all ten occupations
            let states = crate::fock::enumerate_states(4, 2);
            let psi = FockSuperposition::from_terms(
                4,
                states.into_iter().zip(amps).map(|(s, (re, im))| (s, Complex64::new(re, im))),
            ).unwrap();
            let once = project_dr(&psi, 2).unwrap();
            let twice = project_dr(&once, 2).unwrap();
            prop_assert!(once.approx_eq(&twice, 1e-12));
            prop_assert!(once.norm_sqr() <= psi.norm_sqr() + 1e-12);
        }
    }
}
