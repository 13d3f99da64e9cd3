//! Multimode Fock states and their evolution through passive linear-optical
//! networks.
//!
//! A network on `m` modes is described by its `m x m` scattering matrix `U`,
//! acting on creation operators as `a_j^† -> sum_i U[i][j] a_i^†`. The
//! amplitude `<s| U |t>` between occupation vectors `t` (input) and `s`
//! (output) is `per(U_{s,t}) / sqrt(prod s_i! prod t_j!)`, where `U_{s,t}` is
//! the submatrix with row `i` repeated `s_i` times and column `j` repeated
//! `t_j` times.
//!
//! [`evolve`] does not enumerate output occupations. It multiplies out the
//! product of transformed creation operators photon by photon, merging equal
//! monomials as it goes, which touches only the reachable part of the output
//! space. [`transition_amplitude`] evaluates single amplitudes through
//! [`permanent`] and serves as the independent cross-check.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance for amplitude comparisons.
pub const TOL: f64 = 1e-9;

/// Amplitudes below this magnitude are treated as exact cancellations.
pub(crate) const ZERO_TOL: f64 = 1e-12;

/// Largest photon number a single evolution will accept.
pub const MAX_PHOTONS: usize = 20;

/// Largest matrix the permanent routine accepts.
pub const MAX_PERMANENT_DIM: usize = 20;

/// Occupation numbers of `m` optical modes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<u8>,
}

impl FockState {
    pub fn new(occupations: Vec<u8>) -> Self {
        FockState { occupations }
    }

    pub fn vacuum(modes: usize) -> Self {
        FockState {
            occupations: vec![0; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn photons(&self) -> usize {
        self.occupations.iter().map(|&n| n as usize).sum()
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.occupations[mode]
    }

    /// Occupations restricted to `modes`, in the order given.
    pub fn restrict(&self, modes: &[usize]) -> FockState {
        FockState::new(modes.iter().map(|&m| self.occupations[m]).collect())
    }

    /// `prod_i n_i!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&n| factorial(n as usize))
            .product()
    }

    /// Concatenation of two mode registers.
    pub fn tensor(&self, other: &FockState) -> FockState {
        let mut occ = self.occupations.clone();
        occ.extend_from_slice(&other.occupations);
        FockState::new(occ)
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for n in &self.occupations {
            write!(f, "{n}")?;
        }
        write!(f, ">>")
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// A superposition of Fock states on a fixed number of modes, kept in
/// canonical form: no zero amplitudes, terms ordered lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct FockSuperposition {
    modes: usize,
    terms: BTreeMap<FockState, C64>,
}

impl FockSuperposition {
    pub fn empty(modes: usize) -> Self {
        FockSuperposition {
            modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(state: FockState) -> Self {
        let modes = state.modes();
        let mut terms = BTreeMap::new();
        terms.insert(state, C64::new(1.0, 0.0));
        FockSuperposition { modes, terms }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::basis(FockState::vacuum(modes))
    }

    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockState, C64)>,
    {
        let mut out = Self::empty(modes);
        for (state, amp) in terms {
            if state.modes() != modes {
                return Err(Error::Dimension(format!(
                    "term {state:?} has {} modes, expected {modes}",
                    state.modes()
                )));
            }
            out.add(state, amp);
        }
        Ok(out)
    }

    /// Adds `amp` to the coefficient of `state`, dropping the term if it
    /// cancels.
    pub fn add(&mut self, state: FockState, amp: C64) {
        debug_assert_eq!(state.modes(), self.modes);
        match self.terms.entry(state) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += amp;
                if e.get().norm() < ZERO_TOL {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if amp.norm() >= ZERO_TOL {
                    e.insert(amp);
                }
            }
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &C64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, state: &FockState) -> C64 {
        self.terms.get(state).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        FockSuperposition {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .filter(|(_, v)| v.norm() >= ZERO_TOL)
                .collect(),
        }
    }

    /// Product state on the concatenated mode register.
    pub fn tensor(&self, other: &FockSuperposition) -> FockSuperposition {
        let mut out = FockSuperposition::empty(self.modes + other.modes);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add(a.tensor(b), x * y);
            }
        }
        out
    }

    /// Largest photon number over all terms.
    pub fn max_photons(&self) -> usize {
        self.terms.keys().map(FockState::photons).max().unwrap_or(0)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockSuperposition) -> C64 {
        self.terms
            .iter()
            .map(|(k, a)| a.conj() * other.amplitude(k))
            .sum()
    }

    /// Approximate equality of all amplitudes.
    pub fn approx_eq(&self, other: &FockSuperposition, tol: f64) -> bool {
        self.modes == other.modes
            && self
                .terms
                .keys()
                .chain(other.terms.keys())
                .all(|k| (self.amplitude(k) - other.amplitude(k)).norm() <= tol)
    }

    pub(crate) fn from_map(modes: usize, terms: BTreeMap<FockState, C64>) -> Self {
        FockSuperposition {
            modes,
            terms: terms
                .into_iter()
                .filter(|(_, a)| a.norm() >= ZERO_TOL)
                .collect(),
        }
    }
}

/// Square matrix of complex entries stored row-major, used as input to
/// [`permanent`].
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl SquareMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows != cols {
            return Err(Error::Dimension(format!(
                "permanent needs a square matrix, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(SquareMatrix { dim: rows, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        SquareMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }
}

/// Matrix permanent by Ryser's inclusion-exclusion formula, visiting column
/// subsets in Gray-code order so each step updates the row sums with a single
/// column. `O(2^k k)` for a `k x k` matrix.
pub fn permanent(matrix: &SquareMatrix) -> Result<C64> {
    let k = matrix.dim();
    if k == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if k > MAX_PERMANENT_DIM {
        return Err(Error::Resource(format!(
            "permanent of a {k}x{k} matrix exceeds the {MAX_PERMANENT_DIM} cap"
        )));
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); k];
    let mut total = C64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << k) {
        let next = step ^ (step >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << flipped) != 0;
        for (i, sum) in row_sums.iter_mut().enumerate() {
            let entry = matrix.get(i, flipped);
            if adding {
                *sum += entry;
            } else {
                *sum -= entry;
            }
        }
        gray = next;
        let prod: C64 = row_sums.iter().product();
        // (-1)^{k - |S|}
        if (k as u32 - next.count_ones()) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Scattering matrix of a passive linear-optical network.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    modes: usize,
    matrix: Vec<C64>,
}

impl ModeUnitary {
    pub fn identity(modes: usize) -> Self {
        let mut matrix = vec![C64::new(0.0, 0.0); modes * modes];
        for i in 0..modes {
            matrix[i * modes + i] = C64::new(1.0, 0.0);
        }
        ModeUnitary { modes, matrix }
    }

    /// Wraps a row-major matrix, rejecting anything that is not unitary to
    /// within [`TOL`] in Frobenius norm.
    pub fn from_rows(modes: usize, matrix: Vec<C64>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Dimension("a network needs at least one mode".into()));
        }
        if matrix.len() != modes * modes {
            return Err(Error::Dimension(format!(
                "expected {} entries for {modes} modes, got {}",
                modes * modes,
                matrix.len()
            )));
        }
        let u = ModeUnitary { modes, matrix };
        let err = u.unitarity_error();
        if err > TOL {
            return Err(Error::Parameter(format!(
                "matrix is not unitary (||UU^dag - I||_F = {err:e})"
            )));
        }
        Ok(u)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.modes + col]
    }

    pub fn rows(&self) -> &[C64] {
        &self.matrix
    }

    /// `||U U^dag - I||_F`.
    pub fn unitarity_error(&self) -> f64 {
        let m = self.modes;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..m {
                    s += self.get(i, k) * self.get(j, k).conj();
                }
                if i == j {
                    s -= 1.0;
                }
                acc += s.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= TOL
    }

    /// Frobenius distance to another network of the same size.
    pub fn distance(&self, other: &ModeUnitary) -> f64 {
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// The same network with `extra` untouched modes appended.
    pub fn extend(&self, extra: usize) -> ModeUnitary {
        let m = self.modes + extra;
        let mut out = ModeUnitary::identity(m);
        for i in 0..self.modes {
            for j in 0..self.modes {
                out.matrix[i * m + j] = self.get(i, j);
            }
        }
        out
    }

    /// Places this network on the modes `targets` of a larger register.
    pub fn embed(&self, total_modes: usize, targets: &[usize]) -> Result<ModeUnitary> {
        if targets.len() != self.modes {
            return Err(Error::Dimension(format!(
                "{} target modes for a {}-mode network",
                targets.len(),
                self.modes
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= total_modes) {
            return Err(Error::Index(format!("mode {bad} >= {total_modes}")));
        }
        let mut out = ModeUnitary::identity(total_modes);
        for &t in targets {
            out.matrix[t * total_modes + t] = C64::new(0.0, 0.0);
        }
        for (a, &ta) in targets.iter().enumerate() {
            for (b, &tb) in targets.iter().enumerate() {
                out.matrix[ta * total_modes + tb] = self.get(a, b);
            }
        }
        Ok(out)
    }

    /// Nonzero entries of each column, as `(row, value)` pairs.
    pub(crate) fn sparse_columns(&self) -> Vec<Vec<(u8, C64)>> {
        (0..self.modes)
            .map(|j| {
                (0..self.modes)
                    .filter_map(|i| {
                        let v = self.get(i, j);
                        (v.norm() > ZERO_TOL).then_some((i as u8, v))
                    })
                    .collect()
            })
            .collect()
    }
}

/// 50:50 beamsplitter `(1/sqrt 2) [[1, 1], [1, -1]]` on modes `i < j` of an
/// `m`-mode register.
pub fn beamsplitter(i: usize, j: usize, modes: usize) -> Result<ModeUnitary> {
    if i == j {
        return Err(Error::Index(format!("beamsplitter needs two distinct modes, got {i} twice")));
    }
    if i >= modes || j >= modes {
        return Err(Error::Index(format!(
            "beamsplitter modes ({i}, {j}) outside a {modes}-mode register"
        )));
    }
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = ModeUnitary::identity(modes);
    u.matrix[i * modes + i] = C64::new(s, 0.0);
    u.matrix[i * modes + j] = C64::new(s, 0.0);
    u.matrix[j * modes + i] = C64::new(s, 0.0);
    u.matrix[j * modes + j] = C64::new(-s, 0.0);
    Ok(u)
}

/// Network that applies `first` and then `second`: the matrix product
/// `second * first`.
pub fn compose(first: &ModeUnitary, second: &ModeUnitary) -> Result<ModeUnitary> {
    if first.modes != second.modes {
        return Err(Error::Dimension(format!(
            "cannot compose {}-mode and {}-mode networks",
            first.modes, second.modes
        )));
    }
    let m = first.modes;
    let mut matrix = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for k in 0..m {
            let a = second.get(i, k);
            if a.norm() == 0.0 {
                continue;
            }
            for j in 0..m {
                matrix[i * m + j] += a * first.get(k, j);
            }
        }
    }
    Ok(ModeUnitary { modes: m, matrix })
}

/// Composes a sequence of networks, first element applied first.
pub fn compose_all<'a, I>(modes: usize, networks: I) -> Result<ModeUnitary>
where
    I: IntoIterator<Item = &'a ModeUnitary>,
{
    networks
        .into_iter()
        .try_fold(ModeUnitary::identity(modes), |acc, u| compose(&acc, u))
}

/// Sorted multiset of the modes occupied by each photon. Fixed-size so the
/// expansion loop never allocates per monomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct PhotonKey {
    len: u8,
    modes: [u8; MAX_PHOTONS],
}

impl PhotonKey {
    pub(crate) const EMPTY: PhotonKey = PhotonKey {
        len: 0,
        modes: [0; MAX_PHOTONS],
    };

    fn with(&self, mode: u8) -> PhotonKey {
        let mut out = *self;
        let n = self.len as usize;
        let pos = self.modes[..n].partition_point(|&m| m <= mode);
        out.modes.copy_within(pos..n, pos + 1);
        out.modes[pos] = mode;
        out.len += 1;
        out
    }

    pub(crate) fn mode_list(&self) -> &[u8] {
        &self.modes[..self.len as usize]
    }

    pub(crate) fn to_state(self, modes: usize) -> FockState {
        let mut occ = vec![0u8; modes];
        for &m in &self.modes[..self.len as usize] {
            occ[m as usize] += 1;
        }
        FockState::new(occ)
    }

    /// `sqrt(prod_i n_i!)` for the occupation this key describes.
    pub(crate) fn bosonic_norm(&self) -> f64 {
        let mut acc = 1.0;
        let mut run = 1usize;
        let slice = &self.modes[..self.len as usize];
        for w in 1..slice.len() {
            if slice[w] == slice[w - 1] {
                run += 1;
                acc *= run as f64;
            } else {
                run = 1;
            }
        }
        acc.sqrt()
    }
}

/// A polynomial in creation operators, `sum_k c_k prod a^dag`, acting on the
/// vacuum. Multiplying by one transformed creation operator at a time is the
/// evolution kernel.
#[derive(Clone, Debug, Default)]
pub(crate) struct CreationPoly {
    pub(crate) terms: FxHashMap<PhotonKey, C64>,
}

impl std::fmt::Debug for PhotonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.modes[..self.len as usize])
    }
}

impl CreationPoly {
    pub(crate) fn unit() -> Self {
        let mut terms = FxHashMap::default();
        terms.insert(PhotonKey::EMPTY, C64::new(1.0, 0.0));
        CreationPoly { terms }
    }

    /// Multiplies by `sum_i column[i] a_i^dag`.
    pub(crate) fn times(&self, column: &[(u8, C64)]) -> CreationPoly {
        let mut terms =
            FxHashMap::with_capacity_and_hasher(self.terms.len() * column.len(), Default::default());
        for (key, &c) in &self.terms {
            for &(mode, u) in column {
                *terms.entry(key.with(mode)).or_insert(C64::new(0.0, 0.0)) += c * u;
            }
        }
        terms.retain(|_, v| v.norm() > ZERO_TOL * 1e-3);
        CreationPoly { terms }
    }

    /// Converts to normalized Fock amplitudes, scaling every term by `factor`.
    pub(crate) fn into_fock(self, factor: f64) -> impl Iterator<Item = (PhotonKey, C64)> {
        self.terms
            .into_iter()
            .map(move |(k, c)| (k, c * (factor * k.bosonic_norm())))
            .filter(|(_, c)| c.norm() >= ZERO_TOL)
    }
}

/// Multiplies out the creation operators of `input` through the sparse
/// columns of a network. Returns amplitudes keyed by photon multiset.
pub(crate) fn evolve_basis(
    input: &FockState,
    columns: &[Vec<(u8, C64)>],
) -> impl Iterator<Item = (PhotonKey, C64)> {
    let mut poly = CreationPoly::unit();
    for (mode, &n) in input.occupations().iter().enumerate() {
        for _ in 0..n {
            poly = poly.times(&columns[mode]);
        }
    }
    poly.into_fock(1.0 / input.factorial_product().sqrt())
}

/// Applies the multiphoton transformation of `u` to `state`.
pub fn evolve(state: &FockSuperposition, u: &ModeUnitary) -> Result<FockSuperposition> {
    if state.modes() != u.modes() {
        return Err(Error::Dimension(format!(
            "{}-mode state through a {}-mode network",
            state.modes(),
            u.modes()
        )));
    }
    if u.modes() > u8::MAX as usize {
        return Err(Error::Resource(format!("{} modes exceeds 255", u.modes())));
    }
    let photons = state.max_photons();
    if photons > MAX_PHOTONS {
        return Err(Error::Resource(format!(
            "{photons} photons exceeds the {MAX_PHOTONS}-photon cap"
        )));
    }
    let columns = u.sparse_columns();
    let mut acc: FxHashMap<PhotonKey, C64> = FxHashMap::default();
    for (input, &amp) in state.terms() {
        for (key, a) in evolve_basis(input, &columns) {
            *acc.entry(key).or_insert(C64::new(0.0, 0.0)) += amp * a;
        }
    }
    let terms = acc
        .into_iter()
        .map(|(k, a)| (k.to_state(u.modes()), a))
        .collect();
    Ok(FockSuperposition::from_map(u.modes(), terms))
}

/// Single transition amplitude `<output| U |input>` through the permanent of
/// the row/column-repeated submatrix.
pub fn transition_amplitude(u: &ModeUnitary, input: &FockState, output: &FockState) -> Result<C64> {
    if input.modes() != u.modes() || output.modes() != u.modes() {
        return Err(Error::Dimension("state and network mode counts differ".into()));
    }
    if input.photons() != output.photons() {
        return Ok(C64::new(0.0, 0.0));
    }
    let rows: Vec<usize> = repeated_indices(output);
    let cols: Vec<usize> = repeated_indices(input);
    let k = rows.len();
    let mut data = Vec::with_capacity(k * k);
    for &r in &rows {
        for &c in &cols {
            data.push(u.get(r, c));
        }
    }
    let per = permanent(&SquareMatrix::new(k, k, data)?)?;
    Ok(per / (input.factorial_product() * output.factorial_product()).sqrt())
}

fn repeated_indices(state: &FockState) -> Vec<usize> {
    state
        .occupations()
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat(i).take(n as usize))
        .collect()
}

/// All occupation vectors of `photons` photons in `modes` modes, in
/// lexicographic order.
pub fn enumerate_states(modes: usize, photons: usize) -> Vec<FockState> {
    fn rec(modes: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<FockState>) {
        if prefix.len() + 1 == modes {
            prefix.push(left as u8);
            out.push(FockState::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for n in 0..=left {
            prefix.push(n as u8);
            rec(modes, left - n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if photons == 0 {
            out.push(FockState::new(Vec::new()));
        }
        return out;
    }
    rec(modes, photons, &mut Vec::with_capacity(modes), &mut out);
    out
}

/// Evolution by explicit enumeration of the output space, one permanent per
/// output occupation. Exponentially slower than [`evolve`]; kept for
/// cross-checking on small inputs.
pub fn evolve_by_permanents(state: &FockSuperposition, u: &ModeUnitary) -> Result<FockSuperposition> {
    if state.modes() != u.modes() {
        return Err(Error::Dimension("state and network mode counts differ".into()));
    }
    let mut out = FockSuperposition::empty(u.modes());
    for (input, &amp) in state.terms() {
        for output in enumerate_states(u.modes(), input.photons()) {
            let a = transition_amplitude(u, input, &output)?;
            if a.norm() >= ZERO_TOL {
                out.add(output, amp * a);
            }
        }
    }
    Ok(out)
}

/// Result of conditioning on a detector pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// Subnormalized state of the undetected modes, in increasing mode order.
    pub remainder: FockSuperposition,
    /// Squared norm of `remainder`.
    pub probability: f64,
}

/// Conditions `state` on observing `pattern` on the modes `detected` (pattern
/// entry `k` is the count on mode `detected[k]`).
pub fn project_pattern(
    state: &FockSuperposition,
    detected: &[usize],
    pattern: &FockState,
) -> Result<Projection> {
    if pattern.modes() != detected.len() {
        return Err(Error::Dimension(format!(
            "pattern covers {} modes but {} are detected",
            pattern.modes(),
            detected.len()
        )));
    }
    let mut is_detected = vec![false; state.modes()];
    for &d in detected {
        if d >= state.modes() {
            return Err(Error::Index(format!("detected mode {d} >= {}", state.modes())));
        }
        if is_detected[d] {
            return Err(Error::Index(format!("mode {d} detected twice")));
        }
        is_detected[d] = true;
    }
    let kept: Vec<usize> = (0..state.modes()).filter(|&m| !is_detected[m]).collect();
    let mut remainder = FockSuperposition::empty(kept.len());
    for (term, &amp) in state.terms() {
        if detected
            .iter()
            .zip(pattern.occupations())
            .all(|(&d, &r)| term.get(d) == r)
        {
            remainder.add(term.restrict(&kept), amp);
        }
    }
    let probability = remainder.norm_sqr();
    Ok(Projection {
        remainder,
        probability,
    })
}

/// Groups every term of `state` by its detector pattern on `detected`.
pub fn split_by_pattern(
    state: &FockSuperposition,
    detected: &[usize],
) -> BTreeMap<FockState, FockSuperposition> {
    let detected_set: Vec<bool> = {
        let mut v = vec![false; state.modes()];
        for &d in detected {
            v[d] = true;
        }
        v
    };
    let kept: Vec<usize> = (0..state.modes()).filter(|&m| !detected_set[m]).collect();
    let mut out: BTreeMap<FockState, FockSuperposition> = BTreeMap::new();
    for (term, &amp) in state.terms() {
        out.entry(term.restrict(detected))
            .or_insert_with(|| FockSuperposition::empty(kept.len()))
            .add(term.restrict(&kept), amp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn naive_permanent(m: &SquareMatrix) -> C64 {
        fn rec(m: &SquareMatrix, row: usize, used: &mut Vec<bool>) -> C64 {
            if row == m.dim() {
                return c(1.0);
            }
            let mut acc = c(0.0);
            for col in 0..m.dim() {
                if !used[col] {
                    used[col] = true;
                    acc += m.get(row, col) * rec(m, row + 1, used);
                    used[col] = false;
                }
            }
            acc
        }
        rec(m, 0, &mut vec![false; m.dim()])
    }

    #[test]
    fn permanent_small_cases() {
        let empty = SquareMatrix::new(0, 0, vec![]).unwrap();
        assert_eq!(permanent(&empty).unwrap(), c(1.0));
        assert!((permanent(&SquareMatrix::identity(3)).unwrap() - c(1.0)).norm() < 1e-12);
        let ones = SquareMatrix::new(3, 3, vec![c(1.0); 9]).unwrap();
        // 3! permutations, each contributing 1
        assert!((naive_permanent(&ones) - c(6.0)).norm() < 1e-12);
        assert!((permanent(&ones).unwrap() - c(6.0)).norm() < 1e-12);
    }

    #[test]
    fn permanent_rejects_non_square() {
        assert!(matches!(
            SquareMatrix::new(2, 3, vec![c(0.0); 6]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn beamsplitter_index_errors() {
        assert!(matches!(beamsplitter(1, 1, 3), Err(Error::Index(_))));
        assert!(matches!(beamsplitter(0, 3, 3), Err(Error::Index(_))));
    }

    #[test]
    fn beamsplitter_is_involution() {
        let bs = beamsplitter(0, 1, 2).unwrap();
        let twice = compose(&bs, &bs).unwrap();
        assert!(twice.distance(&ModeUnitary::identity(2)) < 1e-12);
        assert!(bs.is_unitary());
    }

    #[test]
    fn compose_checks_modes() {
        let a = ModeUnitary::identity(2);
        let b = ModeUnitary::identity(3);
        assert!(matches!(compose(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_photon_through_beamsplitter() {
        let bs = beamsplitter(0, 1, 2).unwrap();
        let out = evolve(&FockSuperposition::basis(FockState::new(vec![1, 0])), &bs).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(out.len(), 2);
        assert!((out.amplitude(&FockState::new(vec![1, 0])) - c(s)).norm() < 1e-12);
        assert!((out.amplitude(&FockState::new(vec![0, 1])) - c(s)).norm() < 1e-12);
    }

    #[test]
    fn hong_ou_mandel() {
        let bs = beamsplitter(0, 1, 2).unwrap();
        let out = evolve(&FockSuperposition::basis(FockState::new(vec![1, 1])), &bs).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(out.len(), 2);
        assert!((out.amplitude(&FockState::new(vec![2, 0])) - c(s)).norm() < 1e-12);
        assert!((out.amplitude(&FockState::new(vec![0, 2])) - c(-s)).norm() < 1e-12);
        assert!(out.amplitude(&FockState::new(vec![1, 1])).norm() < 1e-12);
    }

    #[test]
    fn vacuum_is_invariant() {
        let u = compose(&beamsplitter(0, 2, 3).unwrap(), &beamsplitter(1, 2, 3).unwrap()).unwrap();
        let out = evolve(&FockSuperposition::vacuum(3), &u).unwrap();
        assert_eq!(out, FockSuperposition::vacuum(3));
    }

    #[test]
    fn evolve_checks_modes_and_cap() {
        let u = ModeUnitary::identity(2);
        assert!(matches!(
            evolve(&FockSuperposition::vacuum(3), &u),
            Err(Error::Dimension(_))
        ));
        let big = FockSuperposition::basis(FockState::new(vec![21, 0]));
        assert!(matches!(evolve(&big, &u), Err(Error::Resource(_))));
    }

    #[test]
    fn pattern_projection_conserves_photons() {
        let bs = beamsplitter(0, 1, 2).unwrap();
        let out = evolve(&FockSuperposition::basis(FockState::new(vec![1, 1])), &bs).unwrap();
        let p = project_pattern(&out, &[0, 1], &FockState::new(vec![1, 0])).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.remainder.is_empty());
        let p = project_pattern(&out, &[0, 1], &FockState::new(vec![2, 0])).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fully_detected_projection() {
        let state = FockSuperposition::from_terms(
            2,
            [(FockState::new(vec![1, 0]), C64::new(0.6, 0.0)), (FockState::new(vec![0, 1]), C64::new(0.0, 0.8))],
        )
        .unwrap();
        let p = project_pattern(&state, &[0, 1], &FockState::new(vec![0, 1])).unwrap();
        assert!((p.probability - 0.64).abs() < 1e-12);
    }

    #[test]
    fn lexicographic_enumeration() {
        let states = enumerate_states(3, 2);
        assert_eq!(states.len(), 6);
        let mut sorted = states.clone();
        sorted.sort();
        assert_eq!(states, sorted);
        assert_eq!(states[0], FockState::new(vec![0, 0, 2]));
    }
}
