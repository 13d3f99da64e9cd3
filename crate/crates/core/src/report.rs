//! The reproduction matrix: one check per acceptance criterion, each made of
//! rows with their own verdict. Shared by `fockforge reproduce` and the
//! acceptance test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::devices::{
    bell_analyser, boosted, completeness_error, conjectured_boosted_probability,
    fusion_rule_violations, ghz_analyser, ghz_rule_violations, kraus_table,
    lossy_success_polynomial, success_probability_of, type1_fusion, Device, KrausOperator,
    Outcome,
};
use crate::dualrail::QubitString;
use crate::error::Result;
use crate::exact::{Polynomial, Probability};
use crate::fock::{
    beamsplitter, compose_all, evolve, evolve_by_permanents, permanent, FockState,
    FockSuperposition, ModeUnitary, SquareMatrix, C64,
};
use crate::stabilizer::{ghz_state, graph_state, ring_edges};
use crate::zx::fixtures::{self, Fixture};
use crate::zx::random::{random_diagram, random_rewrite};
use crate::zx::{
    equal_up_to_scalar, extract_scheme, scheme_metrics, to_tensor, verify_scheme, Boosting,
    SchemeMetrics, SimOptions,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub passed: bool,
    pub text: String,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub criterion: u8,
    pub title: &'static str,
    pub rows: Vec<Row>,
    pub elapsed: Duration,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict}  {}", self.criterion, self.title)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    /// Adds the five-qubit case of the boosted-analyser formula.
    pub conjecture_n5: bool,
    /// Also rates the two-5-analyser two-chain scheme with full boosting.
    pub boosted_five_analysers: bool,
    /// Random diagrams in the rewrite property check.
    pub rewrite_samples: usize,
}

impl ReportOptions {
    pub fn standard() -> Self {
        ReportOptions {
            rewrite_samples: 200,
            ..Default::default()
        }
    }
}

/// Criterion numbers, titles and filter keywords.
pub const CRITERIA: [(u8, &str, &str); 11] = [
    (1, "Bell analyser Kraus table and success probability", "bell kraus"),
    (2, "n-GHZ analysers, n = 2..5", "ghz kraus"),
    (3, "pattern rules of the n-GHZ analyser", "ghz rules"),
    (4, "SQA-beta boosting", "boost kraus"),
    (5, "boosted-analyser formula (conjecture test)", "boost conjecture"),
    (6, "type-I n-fusion, n = 2..5", "fusion kraus"),
    (7, "loss polynomials", "loss boost"),
    (8, "diagram fixture metrics", "zx fixtures"),
    (9, "end-to-end scheme simulation", "zx simulate"),
    (10, "boosted analyser versus boosted fusion tree", "zx boost"),
    (11, "property suites", "property"),
];

pub fn matches_filter(criterion: u8, filter: Option<&str>) -> bool {
    let Some(f) = filter else { return true };
    let f = f.to_lowercase();
    CRITERIA.iter().any(|(c, title, keys)| {
        *c == criterion
            && (c.to_string() == f || title.to_lowercase().contains(&f) || keys.contains(&f))
    })
}

pub fn run(criterion: u8, opts: &ReportOptions) -> Result<Check> {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == criterion)
        .map(|c| c.1)
        .unwrap_or("unknown criterion");
    let start = Instant::now();
    let mut rows = match criterion {
        1 => bell_rows()?,
        2 => ghz_rows()?,
        3 => rule_rows()?,
        4 => boost_rows()?,
        5 => conjecture_rows(opts)?,
        6 => fusion_rows()?,
        7 => loss_rows()?,
        8 => fixture_rows()?,
        9 => simulation_rows()?,
        10 => comparison_rows(opts)?,
        11 => property_rows(opts)?,
        _ => vec![row(false, format!("no criterion {criterion}"))],
    };
    let elapsed = start.elapsed();
    if let Some(limit) = time_limit(criterion) {
        rows.push(row(
            elapsed <= limit,
            format!("runtime within {} s", limit.as_secs()),
        ));
    }
    Ok(Check {
        criterion,
        title,
        rows,
        elapsed,
    })
}

fn time_limit(criterion: u8) -> Option<Duration> {
    match criterion {
        1 => Some(Duration::from_secs(1)),
        2 => Some(Duration::from_secs(10)),
        4 => Some(Duration::from_secs(120)),
        7 => Some(Duration::from_secs(600)),
        _ => None,
    }
}

fn row(passed: bool, text: impl Into<String>) -> Row {
    Row {
        passed,
        text: text.into(),
    }
}

fn equals<T: PartialEq + fmt::Display>(what: &str, got: T, want: T) -> Row {
    let ok = got == want;
    if ok {
        row(true, format!("{what} = {got}"))
    } else {
        row(false, format!("{what} = {got}, expected {want}"))
    }
}

type Table = Arc<(Device, Vec<KrausOperator>)>;

/// Kraus tables are shared between criteria; the boosted 4-GHZ one is slow.
fn table(name: &str, build: impl FnOnce() -> Result<Device>) -> Result<Table> {
    static CACHE: OnceLock<Mutex<BTreeMap<String, Table>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(name) {
        return Ok(t.clone());
    }
    let d = build()?;
    let t = Arc::new((d.clone(), kraus_table(&d)?));
    cache.lock().unwrap().insert(name.to_string(), t.clone());
    Ok(t)
}

fn boosted_ghz(n: usize, qubits: &[usize]) -> Result<Table> {
    table(&format!("ghz{n}+{qubits:?}"), || boosted(&ghz_analyser(n)?, qubits))
}

fn probability(t: &Table) -> Probability {
    success_probability_of(&t.0, &t.1)
}

fn q(s: &str) -> QubitString {
    QubitString::new(s.bytes().map(|b| b - b'0').collect()).expect("binary string")
}

/// Whether `got` equals `want` up to a global phase.
fn same_functional(got: &[(QubitString, C64)], want: &[(QubitString, f64)]) -> bool {
    let want: BTreeMap<&QubitString, C64> = want.iter().map(|(k, a)| (k, C64::new(*a, 0.0))).collect();
    let got: BTreeMap<&QubitString, C64> =
        got.iter().filter(|(_, a)| a.norm() > 1e-9).map(|(k, a)| (k, *a)).collect();
    if got.len() != want.len() || got.keys().ne(want.keys()) {
        return false;
    }
    let (k0, a0) = got.iter().next().expect("nonempty");
    let phase = want[k0] / a0;
    (phase.norm() - 1.0).abs() < 1e-9 && got.iter().all(|(k, a)| (a * phase - want[k]).norm() < 1e-9)
}

fn bell_rows() -> Result<Vec<Row>> {
    let t = table("bell", || Ok(bell_analyser()))?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expected: [(&[u8], &[(&str, f64)]); 8] = [
        (&[1, 1, 0, 0], &[("00", 0.5), ("11", 0.5)]),
        (&[0, 0, 1, 1], &[("00", 0.5), ("11", 0.5)]),
        (&[1, 0, 1, 0], &[("00", 0.5), ("11", -0.5)]),
        (&[0, 1, 0, 1], &[("00", 0.5), ("11", -0.5)]),
        (&[2, 0, 0, 0], &[("01", h)]),
        (&[0, 0, 0, 2], &[("01", h)]),
        (&[0, 2, 0, 0], &[("10", h)]),
        (&[0, 0, 2, 0], &[("10", h)]),
    ];
    let mut rows = Vec::new();
    let total: usize = t.1.iter().map(|g| g.patterns.len()).sum();
    rows.push(equals("nonzero detector patterns", total, 8));
    for (pattern, want) in expected {
        let p = FockState::new(pattern.to_vec());
        let got = t.1.iter().find_map(|g| {
            let i = g.patterns.iter().position(|x| *x == p)?;
            Some(
                g.pattern_operator(i)
                    .into_iter()
                    .map(|(k, a)| (k.input, a))
                    .collect::<Vec<_>>(),
            )
        });
        let want: Vec<(QubitString, f64)> = want.iter().map(|(s, a)| (q(s), *a)).collect();
        let ok = got.as_deref().is_some_and(|g| same_functional(g, &want));
        rows.push(row(ok, format!("K{p} as tabulated")));
    }
    rows.push(equals("P_S", probability(&t), Probability::ratio(1, 2)));
    Ok(rows)
}

fn ghz_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for n in 2..=5 {
        let t = table(&format!("ghz{n}"), || ghz_analyser(n))?;
        rows.push(equals(
            &format!("{n}-GHZ P_S"),
            probability(&t),
            Probability::ratio(1, 1 << (n - 1)),
        ));
        let binary = t
            .1
            .iter()
            .filter(|g| g.outcome == Outcome::SuccessEntangled)
            .flat_map(|g| &g.patterns)
            .all(|p| p.occupations().iter().all(|&r| r <= 1));
        rows.push(row(binary, format!("{n}-GHZ success patterns have r_i in {{0,1}}")));
        let mut failed: BTreeSet<QubitString> = BTreeSet::new();
        let mut single = true;
        for g in t.1.iter().filter(|g| g.outcome == Outcome::Failure) {
            let w = g.weights();
            single &= w.len() == 1;
            failed.extend(w.into_keys());
        }
        let constant = [QubitString::from_index(n, 0), QubitString::from_index(n, (1 << n) - 1)];
        let want: BTreeSet<QubitString> =
            QubitString::all(n).filter(|x| !constant.contains(x)).collect();
        rows.push(row(
            single && failed == want,
            format!(
                "{n}-GHZ failures project onto the {} non-constant strings",
                (1 << n) - 2
            ),
        ));
    }
    Ok(rows)
}

fn rule_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for n in 2..=5 {
        let v = ghz_rule_violations(n)?;
        let text = match v.first() {
            None => format!("{n}-GHZ: no rule violations"),
            Some(first) => format!("{n}-GHZ: {} violations, first: {first}", v.len()),
        };
        rows.push(row(v.is_empty(), text));
    }
    Ok(rows)
}

fn boost_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let cases: [(&str, usize, &[usize], (i128, i128)); 4] = [
        ("Bell, one unit", 2, &[0], (5, 8)),
        ("Bell, two units", 2, &[0, 1], (3, 4)),
        ("4-GHZ, qubits 1 and 3", 4, &[0, 2], (25, 128)),
        ("4-GHZ, all qubits", 4, &[0, 1, 2, 3], (17, 64)),
    ];
    for (name, n, qubits, (a, b)) in cases {
        let t = boosted_ghz(n, qubits)?;
        rows.push(equals(&format!("{name} P_S"), probability(&t), Probability::ratio(a, b)));
    }
    // Combined operators of the once-boosted Bell analyser.
    let t = boosted_ghz(2, &[0])?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 3f64.sqrt() / 2.0;
    let expected: [(&str, &[(&str, f64)]); 6] = [
        ("S1", &[("00", h), ("11", h)]),
        ("S2", &[("00", h), ("11", -h)]),
        ("S3", &[("01", 0.5 * h), ("10", 0.5 * h)]),
        ("S4", &[("01", 0.5 * h), ("10", -0.5 * h)]),
        ("F1", &[("01", s3)]),
        ("F2", &[("10", s3)]),
    ];
    rows.push(equals("combined operators", t.1.len(), 6));
    for (name, want) in expected {
        let want: Vec<(QubitString, f64)> = want.iter().map(|(s, a)| (q(s), *a)).collect();
        let found = t.1.iter().any(|g| {
            let got: Vec<(QubitString, C64)> = g.weights().into_iter().collect();
            same_functional(&got, &want)
        });
        rows.push(row(found, format!("{name} present with its weight")));
    }
    Ok(rows)
}

fn conjecture_rows(opts: &ReportOptions) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let top = if opts.conjecture_n5 { 5 } else { 4 };
    for n in 2..=top {
        let all: Vec<usize> = (0..n).collect();
        let got = probability(&boosted_ghz(n, &all)?);
        let formula = conjectured_boosted_probability(n);
        let ok = got == formula;
        let text = if ok {
            format!("n = {n}: simulated {got} equals the formula")
        } else {
            format!("n = {n}: simulated {got}, formula gives {formula}")
        };
        rows.push(row(ok, text));
    }
    Ok(rows)
}

fn fusion_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for n in 2..=5 {
        let t = table(&format!("fusion{n}"), || type1_fusion(n))?;
        rows.push(equals(
            &format!("{n}-fusion P_S"),
            probability(&t),
            Probability::ratio(1, 1 << (n - 1)),
        ));
        let v = fusion_rule_violations(n)?;
        let text = match v.first() {
            None => format!("{n}-fusion: every success pattern applies the signed decoder"),
            Some(first) => format!("{n}-fusion: {} violations, first: {first}", v.len()),
        };
        rows.push(row(v.is_empty(), text));
    }
    Ok(rows)
}

type SharedPolynomial = Arc<Polynomial>;

fn loss_polynomial(n: usize, qubits: &[usize]) -> Result<SharedPolynomial> {
    static CACHE: OnceLock<Mutex<BTreeMap<String, SharedPolynomial>>> = OnceLock::new();
    let key = format!("ghz{n}+{qubits:?}");
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let d = if qubits.is_empty() {
        ghz_analyser(n)?
    } else {
        boosted(&ghz_analyser(n)?, qubits)?
    };
    let p = Arc::new(lossy_success_polynomial(&d)?);
    cache.lock().unwrap().insert(key, p.clone());
    Ok(p)
}

fn loss_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let cases: [(&str, usize, &[(usize, i128, i128)]); 3] = [
        ("boosted Bell", 2, &[(4, 1, 2), (6, 1, 4)]),
        ("boosted 3-GHZ", 3, &[(7, 3, 8), (9, 1, 16)]),
        ("boosted 4-GHZ", 4, &[(8, 1, 16), (10, 3, 16), (12, 1, 64)]),
    ];
    for (name, n, terms) in cases {
        let all: Vec<usize> = (0..n).collect();
        let poly = loss_polynomial(n, &all)?;
        let want: Vec<(usize, Probability)> =
            terms.iter().map(|&(k, a, b)| (k, Probability::ratio(a, b))).collect();
        let ok = poly.terms() == want;
        let text = if ok {
            format!("{name}: {poly}")
        } else {
            let w: Vec<String> = want.iter().map(|(k, p)| format!("{p} eta^{k}")).collect();
            format!("{name}: {poly}, expected {}", w.join(" + "))
        };
        rows.push(row(ok, text));
    }
    Ok(rows)
}

fn metrics_of(f: Fixture, boosting: &Boosting) -> Result<SchemeMetrics> {
    scheme_metrics(&extract_scheme(&f()?)?, boosting)
}

fn fixture_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let none = Boosting::new();
    let p = Probability::ratio;
    let simple: [(&str, Fixture, Probability); 6] = [
        ("4 Bell seeds into a 4-GHZ analyser", fixtures::ghz4_bell_seeds, p(1, 8)),
        ("fusion tree", fixtures::ghz4_fusion_tree, p(1, 8)),
        ("two 3-GHZ seeds and a Bell analyser", fixtures::ghz4_two_seeds, p(1, 2)),
        ("encoded two-chain", fixtures::two_chain_encoded, p(1, 128)),
        ("encoded two-chain on Bell seeds", fixtures::two_chain_bell_seeds, p(1, 32768)),
        ("encoded two-chain, fusion layers", fixtures::two_chain_fusion_layers, p(1, 32768)),
    ];
    for (name, f, want) in simple {
        rows.push(equals(&format!("{name}: P_S"), metrics_of(f, &none)?.success_probability, want));
    }

    let m = metrics_of(fixtures::ring6_fusions, &none)?;
    rows.push(equals("six-ring with output fusions: P_S", m.success_probability, p(1, 8)));
    rows.push(row(
        !m.fully_loss_detecting,
        "six-ring with output fusions: not fully loss-detecting",
    ));

    let m = metrics_of(fixtures::ring6_chain, &none)?;
    rows.push(equals("six-ring fusion chain: P_S", m.success_probability, p(1, 64)));
    rows.push(row(m.fully_loss_detecting, "six-ring fusion chain: fully loss-detecting"));

    let m = metrics_of(fixtures::ring6_bell_seeds, &none)?;
    rows.push(equals("six-ring on Bell seeds: P_S", m.success_probability, p(1, 128)));
    rows.push(equals("six-ring on Bell seeds: Bell seeds", bell_count(&m), 7));

    let m = metrics_of(fixtures::ring6_encoded, &none)?;
    rows.push(equals("encoded six-ring: P_S", m.success_probability, p(1, 1 << 25)));
    rows.push(inventory(
        "encoded six-ring",
        &m,
        &[(2, 25)],
        &[("type-I 2-fusion", 13), ("type-I 3-fusion", 5), ("3-GHZ analyser", 1)],
    ));

    let m = metrics_of(fixtures::five_qubit_encoder, &none)?;
    rows.push(equals("five-qubit code encoder: P_S", m.success_probability, p(1, 16384)));
    rows.push(inventory(
        "five-qubit code encoder",
        &m,
        &[(2, 10)],
        &[("type-I 3-fusion", 5), ("5-GHZ analyser", 1)],
    ));

    let m = metrics_of(fixtures::surface_code_encoder, &none)?;
    rows.push(equals("surface code encoder: P_S", m.success_probability, p(1, 512)));
    rows.push(inventory(
        "surface code encoder",
        &m,
        &[(2, 2), (3, 4), (4, 1)],
        &[("4-GHZ analyser", 3)],
    ));
    Ok(rows)
}

fn bell_count(m: &SchemeMetrics) -> usize {
    m.seed_inventory.get(&2).copied().unwrap_or(0)
}

fn inventory(name: &str, m: &SchemeMetrics, seeds: &[(usize, usize)], devices: &[(&str, usize)]) -> Row {
    let want_seeds: BTreeMap<usize, usize> = seeds.iter().copied().collect();
    let want_devices: BTreeMap<String, usize> =
        devices.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let ok = m.seed_inventory == want_seeds && m.device_inventory == want_devices;
    let text = format!(
        "{name}: seeds {:?}, devices {:?}",
        m.seed_inventory, m.device_inventory
    );
    if ok {
        row(true, text)
    } else {
        row(false, format!("{text}; expected seeds {want_seeds:?}, devices {want_devices:?}"))
    }
}

fn simulation_rows() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let opts = SimOptions::default();
    let ghz = ghz_state(4);
    let cases: [(&str, Fixture, f64); 3] = [
        ("4 Bell seeds into a 4-GHZ analyser", fixtures::ghz4_bell_seeds, 1.0 / 8.0),
        ("fusion tree", fixtures::ghz4_fusion_tree, 1.0 / 8.0),
        ("two 3-GHZ seeds and a Bell analyser", fixtures::ghz4_two_seeds, 1.0 / 2.0),
    ];
    for (name, f, p) in cases {
        let r = verify_scheme(&extract_scheme(&f()?)?, &ghz, &opts)?;
        rows.push(row(
            r.passed() && (r.total_probability - p).abs() < 1e-9,
            format!(
                "{name}: {} branches give 4-GHZ up to Pauli frame, total {:.6}",
                r.branches, r.total_probability
            ),
        ));
    }
    let ring = graph_state(6, &ring_edges(6));
    let r = verify_scheme(&extract_scheme(&fixtures::ring6_bell_seeds()?)?, &ring, &opts)?;
    rows.push(row(
        r.passed() && (r.total_probability - 1.0 / 128.0).abs() < 1e-9,
        format!(
            "six-ring on Bell seeds: {} branches give the stabilizer ring state, total {:.6}",
            r.branches, r.total_probability
        ),
    ));
    Ok(rows)
}

fn comparison_rows(opts: &ReportOptions) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let analyser = Boosting::from([("m".to_string(), vec![0, 1, 2, 3])]);
    let a = metrics_of(fixtures::ghz4_bell_seeds, &analyser)?.success_probability;
    rows.push(equals("fully boosted 4-GHZ analyser form", a, Probability::ratio(17, 64)));
    let tree = fixtures::ghz4_fusion_tree()?;
    let bell = tree
        .spiders()
        .iter()
        .find(|s| s.inputs == 2 && s.outputs == 0)
        .map(|s| s.id.clone())
        .unwrap_or_default();
    let b = metrics_of(fixtures::ghz4_fusion_tree, &Boosting::from([(bell, vec![0, 1])]))?
        .success_probability;
    rows.push(equals("boosted fusion-tree form", b, Probability::ratio(3, 16)));
    let ratio = a.value() / b.value();
    rows.push(row(
        ((ratio - 1.417) / 1.417).abs() < 1e-3,
        format!("ratio {ratio:.4} (17/12), within 0.1% of 1.417"),
    ));
    if opts.boosted_five_analysers {
        let d = fixtures::two_chain_analysers()?;
        let boost: Boosting = d
            .spiders()
            .iter()
            .filter(|s| s.inputs == 5 && s.outputs == 0)
            .map(|s| (s.id.clone(), (0..5).collect()))
            .collect();
        let full = metrics_of(fixtures::two_chain_analysers, &boost)?;
        let base = Boosting::from([("b'".to_string(), vec![0, 1])]);
        let other = metrics_of(fixtures::two_chain_bell_seeds, &base)?;
        rows.push(row(
            full.success_probability.value() > other.success_probability.value(),
            format!(
                "two 5-GHZ analysers boosted: {} against {} for the fusion form",
                full.success_probability, other.success_probability
            ),
        ));
        rows.push(equals(
            "extra auxiliary photons",
            full.aux_photons - other.aux_photons,
            16,
        ));
    }
    Ok(rows)
}

fn naive_permanent(m: &SquareMatrix) -> C64 {
    fn rec(m: &SquareMatrix, r: usize, used: &mut [bool]) -> C64 {
        if r == m.dim() {
            return C64::new(1.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..m.dim() {
            if !used[c] {
                used[c] = true;
                acc += m.get(r, c) * rec(m, r + 1, used);
                used[c] = false;
            }
        }
        acc
    }
    rec(m, 0, &mut vec![false; m.dim()])
}

/// A random network of beamsplitters and phases.
pub fn random_unitary<R: Rng>(rng: &mut R, modes: usize) -> Result<ModeUnitary> {
    let mut layers = Vec::new();
    for _ in 0..modes * modes {
        let phases: Vec<C64> = (0..modes)
            .map(|_| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let mut m = vec![C64::new(0.0, 0.0); modes * modes];
        for (i, p) in phases.into_iter().enumerate() {
            m[i * modes + i] = p;
        }
        layers.push(ModeUnitary::from_rows(modes, m)?);
        if modes >= 2 {
            let i = rng.gen_range(0..modes);
            let j = (i + rng.gen_range(1..modes)) % modes;
            layers.push(beamsplitter(i, j, modes)?);
        }
    }
    compose_all(modes, layers.iter())
}

fn every_device() -> Result<Vec<Table>> {
    let mut out = vec![table("bell", || Ok(bell_analyser()))?];
    for n in 2..=5 {
        out.push(table(&format!("ghz{n}"), || ghz_analyser(n))?);
        out.push(table(&format!("fusion{n}"), || type1_fusion(n))?);
    }
    out.push(boosted_ghz(2, &[0])?);
    out.push(boosted_ghz(2, &[0, 1])?);
    out.push(boosted_ghz(3, &[0, 1, 2])?);
    out.push(boosted_ghz(4, &[0, 2])?);
    out.push(boosted_ghz(4, &[0, 1, 2, 3])?);
    Ok(out)
}

fn property_rows(opts: &ReportOptions) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut rng = StdRng::seed_from_u64(0x5eed);

    let mut bad = Vec::new();
    let mut steps = 0;
    for k in 0..opts.rewrite_samples {
        let d = random_diagram(&mut rng, 10);
        let Some((name, r)) = random_rewrite(&mut rng, &d) else {
            continue;
        };
        steps += 1;
        if !equal_up_to_scalar(&to_tensor(&d)?, &to_tensor(&r)?, 1e-9) {
            bad.push(format!("sample {k}: {name}"));
        }
    }
    rows.push(row(
        bad.is_empty() && steps > 0,
        format!(
            "rewrites preserve the tensor: {steps} rewrites on {} random diagrams{}",
            opts.rewrite_samples,
            bad.first().map(|b| format!(", broken by {b}")).unwrap_or_default()
        ),
    ));

    let devices = every_device()?;
    let worst = devices
        .iter()
        .map(|t| completeness_error(&t.0, &t.1))
        .fold(0.0, f64::max);
    rows.push(row(
        worst < 1e-9,
        format!("completeness on {} devices, worst deviation {worst:.1e}", devices.len()),
    ));

    let mut worst = 0.0f64;
    for k in 1..=6 {
        for _ in 0..5 {
            let data: Vec<C64> = (0..k * k)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let m = SquareMatrix::new(k, k, data)?;
            worst = worst.max((permanent(&m)? - naive_permanent(&m)).norm());
        }
        let modes = k + 1;
        let u = random_unitary(&mut rng, modes)?;
        let mut occupation = vec![0u8; modes];
        for _ in 0..k {
            occupation[rng.gen_range(0..modes)] += 1;
        }
        let psi = FockSuperposition::basis(FockState::new(occupation));
        let fast = evolve(&psi, &u)?;
        let slow = evolve_by_permanents(&psi, &u)?;
        let diff: f64 = slow
            .terms()
            .map(|(s, a)| (fast.amplitude(s) - a).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff).max((fast.norm_sqr() - 1.0).abs());
    }
    rows.push(row(
        worst < 1e-9,
        format!("permanents and factorial-normalised amplitudes agree for k <= 6 ({worst:.1e})"),
    ));

    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let mut ok = true;
    let mut count = 0;
    for (n, qubits) in [
        (2, vec![]),
        (3, vec![]),
        (4, vec![]),
        (2, vec![0]),
        (2, vec![0, 1]),
        (3, vec![0, 1, 2]),
        (4, vec![0, 1, 2, 3]),
    ] {
        let poly = loss_polynomial(n, &qubits)?;
        let values: Vec<f64> = grid.iter().map(|&e| poly.eval(e)).collect();
        ok &= values[0].abs() < 1e-12;
        ok &= values.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        count += 1;
    }
    rows.push(row(
        ok,
        format!("loss curves vanish at 0 and never decrease over 11 points ({count} devices)"),
    ));
    Ok(rows)
}

/// Runs the selected criteria in order.
pub fn run_all(opts: &ReportOptions, filter: Option<&str>) -> Result<Vec<Check>> {
    CRITERIA
        .iter()
        .filter(|c| matches_filter(c.0, filter))
        .map(|c| run(c.0, opts))
        .collect()
}
