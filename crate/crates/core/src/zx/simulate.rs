//! Photon-level simulation of extracted schemes.
//!
//! Seeds enter as dual-rail GHZ states and every diagram input as one half
//! of a Bell pair whose other half is kept as a reference qubit, so the
//! surviving state is the Choi state of the implemented map. Each device is
//! run on the live modes and the state is split over its success patterns.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{beamsplitter, evolve, split_by_pattern, FockState, FockSuperposition, C64, TOL};

use super::scheme::{boost_of, device_info, scheme_metrics, Boosting, LOScheme, NodeKind};
use super::tensor::canonicalize;

/// Caps on what a simulation may touch.
#[derive(Clone, Debug)]
pub struct SimOptions {
    pub max_photons: usize,
    pub max_outputs: usize,
    pub max_qubits: usize,
    /// Stop after this many success branches.
    pub max_branches: Option<usize>,
    pub boosting: Boosting,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_photons: 16,
            max_outputs: 8,
            max_qubits: 12,
            max_branches: None,
            boosting: Boosting::new(),
        }
    }
}

/// One branch: a success pattern for every device.
#[derive(Clone, Debug)]
pub struct Simulation {
    /// Pattern per measurement node label.
    pub patterns: BTreeMap<String, FockState>,
    /// Squared norm of the branch.
    pub probability: f64,
    /// Product of the per-device pattern probabilities.
    pub expected_probability: f64,
    /// Qubit amplitudes, reference qubits then outputs, big-endian.
    pub state: Vec<C64>,
    /// Weight outside the dual-rail subspace.
    pub leakage: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Label {
    Ref(usize, u8),
    Wire(usize, u8),
}

#[derive(Clone)]
struct Branch {
    state: FockSuperposition,
    labels: Vec<Label>,
    patterns: Vec<(usize, FockState)>,
    expected: f64,
}

impl Branch {
    fn position(&self, l: Label) -> usize {
        self.labels.iter().position(|&m| m == l).expect("live mode")
    }

    fn attach(&mut self, extra: FockSuperposition, labels: Vec<Label>) {
        self.state = self.state.tensor(&extra);
        self.labels.extend(labels);
    }

    fn hadamard(&mut self, wire: usize) -> Result<()> {
        let targets = [self.position(Label::Wire(wire, 0)), self.position(Label::Wire(wire, 1))];
        let u = beamsplitter(0, 1, 2)?.embed(self.labels.len(), &targets)?;
        self.state = evolve(&self.state, &u)?;
        Ok(())
    }
}

fn dual_rail(bits: impl Iterator<Item = u8>) -> FockState {
    FockState::new(bits.flat_map(|b| if b == 0 { [1, 0] } else { [0, 1] }).collect())
}

/// `(|0..0> + |1..1>)/sqrt 2` on `n` dual-rail qubits.
fn ghz_modes(n: usize) -> FockSuperposition {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut out = FockSuperposition::empty(2 * n);
    out.add(dual_rail(std::iter::repeat(0).take(n)), s);
    out.add(dual_rail(std::iter::repeat(1).take(n)), s);
    out
}

/// Processing steps: sources are emitted right before their first use.
fn schedule(s: &LOScheme) -> Vec<usize> {
    let mut done = vec![false; s.nodes().len()];
    let mut out = Vec::new();
    for &k in s.order() {
        let kind = s.nodes()[k].kind;
        if matches!(kind, NodeKind::Seed { .. } | NodeKind::Input { .. }) {
            continue;
        }
        for w in s.inputs_of(k) {
            let from = s.wires()[w].from.node;
            if !done[from] {
                done[from] = true;
                out.push(from);
            }
        }
        done[k] = true;
        out.push(k);
    }
    for &k in s.order() {
        if !done[k] {
            out.push(k);
        }
    }
    out
}

fn check_caps(s: &LOScheme, opts: &SimOptions) -> Result<()> {
    let metrics = scheme_metrics(s, &opts.boosting)?;
    let photons = metrics.photon_count + 2 * s.input_count();
    if photons > opts.max_photons {
        return Err(Error::Resource(format!(
            "scheme uses {photons} photons, cap is {}",
            opts.max_photons
        )));
    }
    if s.output_count() > opts.max_outputs {
        return Err(Error::Resource(format!(
            "scheme has {} outputs, cap is {}",
            s.output_count(),
            opts.max_outputs
        )));
    }
    let qubits = s.input_count() + s.output_count();
    if qubits > opts.max_qubits {
        return Err(Error::Resource(format!(
            "scheme has {qubits} boundary qubits, cap is {}",
            opts.max_qubits
        )));
    }
    Ok(())
}

struct Engine<'a> {
    s: &'a LOScheme,
    steps: Vec<usize>,
    boosting: &'a Boosting,
    fixed: Option<&'a BTreeMap<String, FockState>>,
}

impl Engine<'_> {
    fn emit_hadamards(&self, b: &mut Branch, node: usize) -> Result<()> {
        for w in self.s.outputs_of(node) {
            if self.s.wires()[w].hadamard {
                b.hadamard(w)?;
            }
        }
        Ok(())
    }

    /// Runs steps from `at` on, pushing finished branches.
    fn run(&self, at: usize, mut b: Branch, out: &mut Vec<Branch>, limit: Option<usize>) -> Result<()> {
        if limit.is_some_and(|l| out.len() >= l) {
            return Ok(());
        }
        let Some(&k) = self.steps.get(at) else {
            out.push(b);
            return Ok(());
        };
        let node = &self.s.nodes()[k];
        match node.kind {
            NodeKind::Seed { size } => {
                let labels = self
                    .s
                    .outputs_of(k)
                    .into_iter()
                    .flat_map(|w| [Label::Wire(w, 0), Label::Wire(w, 1)])
                    .collect();
                b.attach(ghz_modes(size), labels);
                self.emit_hadamards(&mut b, k)?;
            }
            NodeKind::Input { index } => {
                let w = self.s.outputs_of(k)[0];
                let labels = vec![
                    Label::Ref(index, 0),
                    Label::Ref(index, 1),
                    Label::Wire(w, 0),
                    Label::Wire(w, 1),
                ];
                b.attach(ghz_modes(2), labels);
                self.emit_hadamards(&mut b, k)?;
            }
            NodeKind::Pass => {
                let (i, o) = (self.s.inputs_of(k)[0], self.s.outputs_of(k)[0]);
                for l in b.labels.iter_mut() {
                    if let Label::Wire(w, r) = *l {
                        if w == i {
                            *l = Label::Wire(o, r);
                        }
                    }
                }
                self.emit_hadamards(&mut b, k)?;
            }
            NodeKind::Output { .. } => {}
            kind => return self.measure(at, k, kind, b, out, limit),
        }
        self.run(at + 1, b, out, limit)
    }

    fn measure(
        &self,
        at: usize,
        k: usize,
        kind: NodeKind,
        mut b: Branch,
        out: &mut Vec<Branch>,
        limit: Option<usize>,
    ) -> Result<()> {
        let info = device_info(kind, &boost_of(self.s, self.boosting, k))?;
        let inputs = self.s.inputs_of(k);
        let modes = info.unitary.modes();
        let mut global = vec![usize::MAX; modes];
        for (q, &(r0, r1)) in info.qubit_rails.iter().enumerate() {
            global[r0] = b.position(Label::Wire(inputs[q], 0));
            global[r1] = b.position(Label::Wire(inputs[q], 1));
        }
        // Auxiliary modes are appended; their labels never survive.
        let aux: Vec<usize> = (0..modes).filter(|&m| global[m] == usize::MAX).collect();
        let mut occupation = vec![0u8; aux.len()];
        for &(m, n) in &info.aux_inputs {
            let slot = aux.iter().position(|&a| a == m).expect("aux mode");
            occupation[slot] = n;
        }
        for (slot, &m) in aux.iter().enumerate() {
            global[m] = b.labels.len() + slot;
        }
        let aux_labels = (0..aux.len()).map(|j| Label::Ref(usize::MAX, j as u8)).collect();
        b.attach(FockSuperposition::basis(FockState::new(occupation)), aux_labels);
        let u = info.unitary.embed(b.labels.len(), &global)?;
        let evolved = evolve(&b.state, &u)?;

        let mut labels = b.labels.clone();
        if let Some(&(o0, o1)) = info.output_rails.first() {
            let w = self.s.outputs_of(k)[0];
            labels[global[o0]] = Label::Wire(w, 0);
            labels[global[o1]] = Label::Wire(w, 1);
        }
        let detected: Vec<usize> = info.detected.iter().map(|&m| global[m]).collect();
        let kept: Vec<Label> = (0..labels.len())
            .filter(|p| !detected.contains(p))
            .map(|p| labels[p])
            .collect();
        let label = &self.s.nodes()[k].label;
        let mut parts: Vec<(FockState, FockSuperposition)> = split_by_pattern(&evolved, &detected)
            .into_iter()
            .filter(|(p, _)| info.success.contains_key(p))
            .filter(|(p, _)| self.fixed.map_or(true, |f| f.get(label).map_or(true, |q| q == p)))
            .collect();
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        for (pattern, rest) in parts {
            if rest.norm_sqr() < TOL * TOL {
                continue;
            }
            let mut next = Branch {
                state: rest,
                labels: kept.clone(),
                patterns: b.patterns.clone(),
                expected: b.expected * info.success[&pattern],
            };
            next.patterns.push((k, pattern));
            if !info.output_rails.is_empty() {
                self.emit_hadamards(&mut next, k)?;
            }
            self.run(at + 1, next, out, limit)?;
        }
        Ok(())
    }

    fn finish(&self, b: Branch) -> Simulation {
        let ins = self.s.input_count();
        let outs = self.s.output_count();
        let mut rails: Vec<(usize, usize)> = vec![(0, 0); ins + outs];
        for (p, l) in b.labels.iter().enumerate() {
            let (q, r) = match *l {
                Label::Ref(i, r) if i != usize::MAX => (i, r),
                Label::Wire(w, r) => match self.s.nodes()[self.s.wires()[w].to.node].kind {
                    NodeKind::Output { index } => (ins + index, r),
                    _ => continue,
                },
                _ => continue,
            };
            if r == 0 {
                rails[q].0 = p;
            } else {
                rails[q].1 = p;
            }
        }
        let n = ins + outs;
        let mut state = vec![C64::new(0.0, 0.0); 1 << n];
        let mut leakage = 0.0;
        for (term, amp) in b.state.terms() {
            let mut index = 0usize;
            let mut valid = true;
            for &(r0, r1) in &rails {
                index <<= 1;
                match (term.get(r0), term.get(r1)) {
                    (1, 0) => {}
                    (0, 1) => index |= 1,
                    _ => valid = false,
                }
            }
            if valid && term.photons() == n {
                state[index] += amp;
            } else {
                leakage += amp.norm_sqr();
            }
        }
        Simulation {
            patterns: b
                .patterns
                .iter()
                .map(|(k, p)| (self.s.nodes()[*k].label.clone(), p.clone()))
                .collect(),
            probability: b.state.norm_sqr(),
            expected_probability: b.expected,
            state,
            leakage,
        }
    }
}

fn run_engine(
    s: &LOScheme,
    opts: &SimOptions,
    fixed: Option<&BTreeMap<String, FockState>>,
) -> Result<Vec<Simulation>> {
    check_caps(s, opts)?;
    let engine = Engine {
        s,
        steps: schedule(s),
        boosting: &opts.boosting,
        fixed,
    };
    let start = Branch {
        state: FockSuperposition::basis(FockState::vacuum(0)),
        labels: Vec::new(),
        patterns: Vec::new(),
        expected: 1.0,
    };
    let mut done = Vec::new();
    engine.run(0, start, &mut done, opts.max_branches)?;
    Ok(done.into_par_iter().map(|b| engine.finish(b)).collect())
}

/// Runs one branch, with the pattern of every measurement node fixed.
pub fn simulate_scheme(
    s: &LOScheme,
    patterns: &BTreeMap<String, FockState>,
    opts: &SimOptions,
) -> Result<Simulation> {
    for (k, n) in s.nodes().iter().enumerate() {
        if n.kind.is_measurement() {
            let p = patterns
                .get(&n.label)
                .ok_or_else(|| Error::Parameter(format!("no pattern chosen for {}", n.label)))?;
            let info = device_info(n.kind, &boost_of(s, &opts.boosting, k))?;
            if !info.success.contains_key(p) {
                return Err(Error::Parameter(format!(
                    "{p} is not a success pattern of {}",
                    n.label
                )));
            }
        }
    }
    let mut all = run_engine(s, opts, Some(patterns))?;
    match all.len() {
        1 => Ok(all.remove(0)),
        _ => Err(Error::Parameter("chosen patterns do not select one branch".into())),
    }
}

/// Every branch in which all devices succeed.
pub fn simulate_successes(s: &LOScheme, opts: &SimOptions) -> Result<Vec<Simulation>> {
    run_engine(s, opts, None)
}

/// Bit and phase flips on the output qubits.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PauliFrame {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl PauliFrame {
    /// Applies `Z^z X^x` to the trailing `x.len()` qubits of `state`.
    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let outs = self.x.len();
        let xmask = mask(&self.x);
        let zmask = mask(&self.z);
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        for (i, a) in state.iter().enumerate() {
            let j = i ^ xmask;
            let sign = if (j & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[j] = a * sign;
        }
        debug_assert!(outs <= 64);
        out
    }
}

fn mask(bits: &[bool]) -> usize {
    bits.iter().fold(0, |m, &b| (m << 1) | b as usize)
}

fn unit(v: &[C64]) -> Option<Vec<C64>> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    (n > TOL).then(|| v.iter().map(|a| a / n).collect())
}

/// Finds `Z^z X^x` on the last `outputs` qubits taking `state` to `target`
/// up to a scalar.
pub fn find_pauli_frame(state: &[C64], target: &[C64], outputs: usize) -> Option<PauliFrame> {
    if state.len() != target.len() || outputs >= usize::BITS as usize {
        return None;
    }
    let (psi, tau) = (unit(state)?, unit(target)?);
    let bits = |m: usize| (0..outputs).rev().map(|k| m >> k & 1 == 1).collect::<Vec<_>>();
    for xmask in 0..1usize << outputs {
        let moved = PauliFrame {
            x: bits(xmask),
            z: vec![false; outputs],
        }
        .apply(&psi);
        if let Some(zmask) = phase_mask(&moved, &tau, outputs) {
            return Some(PauliFrame {
                x: bits(xmask),
                z: bits(zmask),
            });
        }
    }
    None
}

/// Solves `(-1)^(z . y) moved[y] = c tau[y]` for `z` over GF(2).
fn phase_mask(moved: &[C64], tau: &[C64], outputs: usize) -> Option<usize> {
    let low = (1usize << outputs) - 1;
    let mut lead: Option<(usize, C64)> = None;
    let mut rows: Vec<(usize, bool)> = Vec::new();
    for (i, (m, t)) in moved.iter().zip(tau).enumerate() {
        let (zm, zt) = (m.norm() < 1e-7, t.norm() < 1e-7);
        if zm != zt {
            return None;
        }
        if zm {
            continue;
        }
        let ratio = t / m;
        match lead {
            None => lead = Some((i, ratio)),
            Some((i0, r0)) => {
                let rel = ratio / r0;
                let flip = if (rel - 1.0).norm() < 1e-7 {
                    false
                } else if (rel + 1.0).norm() < 1e-7 {
                    true
                } else {
                    return None;
                };
                rows.push(((i ^ i0) & low, flip));
            }
        }
    }
    solve_gf2(rows, outputs)
}

fn solve_gf2(mut rows: Vec<(usize, bool)>, n: usize) -> Option<usize> {
    let mut pivots: Vec<(usize, usize, bool)> = Vec::new();
    for bit in (0..n).rev() {
        let Some(p) = rows.iter().position(|r| r.0 >> bit & 1 == 1) else {
            continue;
        };
        let (pm, pv) = rows.swap_remove(p);
        for r in rows.iter_mut() {
            if r.0 >> bit & 1 == 1 {
                r.0 ^= pm;
                r.1 ^= pv;
            }
        }
        for q in pivots.iter_mut() {
            if q.1 >> bit & 1 == 1 {
                q.1 ^= pm;
                q.2 ^= pv;
            }
        }
        pivots.push((bit, pm, pv));
    }
    if rows.iter().any(|r| r.0 == 0 && r.1) {
        return None;
    }
    Some(pivots.iter().filter(|p| p.2).fold(0, |z, p| z | 1 << p.0))
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub branches: usize,
    pub matched: usize,
    /// Summed branch probabilities.
    pub total_probability: f64,
    /// Product of the device success probabilities.
    pub expected_probability: f64,
    /// Lowest fidelity with the target over branches, after the found frame.
    pub worst_fidelity: f64,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    match (unit(a), unit(b)) {
        (Some(a), Some(b)) => a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr(),
        _ => 0.0,
    }
}

/// Simulates every success branch and checks each against `target`
/// (inputs then outputs, big-endian) up to a Pauli frame, and the summed
/// probability against the device product.
pub fn verify_scheme(s: &LOScheme, target: &[C64], opts: &SimOptions) -> Result<VerifyReport> {
    let qubits = s.input_count() + s.output_count();
    if target.len() != 1 << qubits {
        return Err(Error::Dimension(format!(
            "target has {} amplitudes, scheme needs {}",
            target.len(),
            1usize << qubits
        )));
    }
    let expected = scheme_metrics(s, &opts.boosting)?.success_probability.value();
    let sims = simulate_successes(s, opts)?;
    let target = canonicalize(target);
    let outputs = s.output_count();
    let checks: Vec<(f64, Option<String>)> = sims
        .par_iter()
        .map(|sim| {
            let name = format!("{:?}", sim.patterns);
            if sim.leakage > TOL {
                return (0.0, Some(format!("{name}: {:.3e} leaves the qubit space", sim.leakage)));
            }
            if (sim.probability - sim.expected_probability).abs() > TOL {
                return (
                    0.0,
                    Some(format!(
                        "{name}: probability {} differs from {}",
                        sim.probability, sim.expected_probability
                    )),
                );
            }
            match find_pauli_frame(&sim.state, &target, outputs) {
                Some(frame) => (fidelity(&frame.apply(&sim.state), &target), None),
                None => {
                    let f = fidelity(&sim.state, &target);
                    (f, Some(format!("{name}: no Pauli frame, raw fidelity {f:.6}")))
                }
            }
        })
        .collect();
    let total: f64 = sims.iter().map(|s| s.probability).sum();
    let mut failures: Vec<String> = checks.iter().filter_map(|c| c.1.clone()).collect();
    let complete = opts.max_branches.map_or(true, |l| sims.len() < l);
    if complete && (total - expected).abs() > TOL {
        failures.push(format!("summed probability {total} differs from {expected}"));
    }
    Ok(VerifyReport {
        branches: sims.len(),
        matched: checks.iter().filter(|c| c.1.is_none()).count(),
        total_probability: total,
        expected_probability: expected,
        worst_fidelity: checks.iter().map(|c| c.0).fold(1.0, f64::min),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf2_solver_finds_a_solution() {
        let rows = vec![(0b011, true), (0b110, false), (0b101, true)];
        let z = solve_gf2(rows.clone(), 3).unwrap();
        for (m, v) in rows {
            assert_eq!((m & z).count_ones() % 2 == 1, v);
        }
        assert!(solve_gf2(vec![(0b1, true), (0b1, false)], 1).is_none());
    }

    #[test]
    fn frame_undoes_paulis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ghz = vec![
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
        ];
        let f = PauliFrame {
            x: vec![true, false],
            z: vec![false, true],
        };
        let moved = f.apply(&ghz);
        let found = find_pauli_frame(&moved, &ghz, 2).unwrap();
        assert!(fidelity(&found.apply(&moved), &ghz) > 1.0 - 1e-12);
    }
}
