use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use fockforge::devices::{
    boosted, bell_analyser, ghz_analyser, kraus_table, lossy_success_polynomial, required_pnr,
    success_probability_of, type1_fusion, Device, KrausOperator,
};
use fockforge::exact::snap_dyadic;
use fockforge::fock::C64;
use fockforge::report::{run_all, ReportOptions};
use fockforge::stabilizer::{ghz_state, graph_state, ring_edges};
use fockforge::zx::{
    extract_scheme, scheme_metrics, to_tensor, verify_scheme, Boosting, LOScheme, SchemeMetrics,
    SimOptions, ZXDiagram,
};
use fockforge::Error;

#[derive(Parser)]
#[command(name = "fockforge", version, about = "Dual-rail linear-optics simulator and ZX compiler")]
struct Cli {
    /// Print only the essential result.
    #[arg(long, global = true)]
    quiet: bool,
    /// Leave out the wall-time line.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bell,
    Ghz,
    Fusion,
}

#[derive(clap::Args)]
struct DeviceSpec {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of qubits (ignored for bell).
    #[arg(short, default_value_t = 2)]
    n: usize,
    /// Qubit to boost with an SQA-beta unit; repeatable.
    #[arg(long)]
    boost: Vec<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the grouped Kraus table of a device.
    Kraus {
        #[command(flatten)]
        device: DeviceSpec,
    },
    /// Success probability of an analyser over a grid of detector efficiencies, as CSV.
    LossSweep {
        #[command(flatten)]
        device: DeviceSpec,
        #[arg(long, default_value_t = 0.0)]
        eta_start: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_stop: f64,
        #[arg(long, default_value_t = 11)]
        eta_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a diagram into a linear-optics scheme.
    Compile {
        diagram: PathBuf,
        /// Scheme file; defaults to the diagram path with a .scheme.json suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a scheme and compare its output with a target state.
    Verify {
        scheme: PathBuf,
        /// ghz:N, ring:N or source (the diagram embedded in the scheme).
        #[arg(long, default_value = "source")]
        target: String,
        #[arg(long, default_value_t = 16)]
        max_photons: usize,
        /// Stop after this many success branches.
        #[arg(long)]
        max_branches: Option<usize>,
    },
    /// Run every reproduction check and print the pass/fail matrix.
    Reproduce {
        /// Criterion number or keyword, e.g. 7 or loss.
        #[arg(long)]
        filter: Option<String>,
        /// Add the five-qubit case of the boosted-analyser formula.
        #[arg(long)]
        conjecture: bool,
        /// Also rate the two-chain scheme with boosted 5-GHZ analysers.
        #[arg(long)]
        boosted_analysers: bool,
    },
}

enum Failure {
    Check(String),
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(t) = std::env::var("FOCKFORGE_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FOCKFORGE_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let start = Instant::now();
    let result = match &cli.command {
        Command::Kraus { device } => kraus(device, cli.quiet),
        Command::LossSweep {
            device,
            eta_start,
            eta_stop,
            eta_steps,
            out,
        } => loss_sweep(device, *eta_start, *eta_stop, *eta_steps, out.as_deref(), cli.quiet),
        Command::Compile { diagram, out } => compile(diagram, out.as_deref(), cli.quiet),
        Command::Verify {
            scheme,
            target,
            max_photons,
            max_branches,
        } => verify(scheme, target, *max_photons, *max_branches, cli.quiet),
        Command::Reproduce {
            filter,
            conjecture,
            boosted_analysers,
        } => reproduce(filter.as_deref(), *conjecture, *boosted_analysers, cli.quiet),
    };
    let timing = !cli.quiet && !cli.no_timing && !matches!(cli.command, Command::LossSweep { out: None, .. });
    let finish = |text: &str| {
        print!("{text}");
        if timing {
            println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
        }
    };
    match result {
        Ok(text) => {
            finish(&text);
            ExitCode::SUCCESS
        }
        Err(Failure::Check(text)) => {
            finish(&text);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if let Error::Conversion(list) = &e {
                for v in list {
                    eprintln!("  {v}");
                }
            }
            ExitCode::from(match e {
                Error::Parse(_) | Error::Parameter(_) | Error::Index(_) => 2,
                Error::Conversion(_) => 3,
                Error::Resource(_) => 4,
                _ => 1,
            })
        }
    }
}

/// Command echo and input digest heading every report.
fn header(out: &mut String, quiet: bool, inputs: &[&[u8]]) {
    if quiet {
        return;
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut h = Sha256::new();
    for i in inputs {
        h.update((i.len() as u64).to_le_bytes());
        h.update(i);
    }
    let digest: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    let _ = writeln!(out, "# fockforge {}", args.join(" "));
    let _ = writeln!(out, "# inputs sha256 {digest}");
}

fn build_device(spec: &DeviceSpec) -> Result<Device, Failure> {
    let base = match spec.kind {
        Kind::Bell => bell_analyser(),
        Kind::Ghz => ghz_analyser(spec.n)?,
        Kind::Fusion => type1_fusion(spec.n)?,
    };
    if spec.boost.is_empty() {
        return Ok(base);
    }
    if matches!(spec.kind, Kind::Fusion) {
        return Err(Failure::Usage("only analysers can be boosted".into()));
    }
    let mut qubits = spec.boost.clone();
    qubits.sort_unstable();
    qubits.dedup();
    Ok(boosted(&base, &qubits)?)
}

fn spec_bytes(spec: &DeviceSpec) -> Vec<u8> {
    let kind = match spec.kind {
        Kind::Bell => "bell",
        Kind::Ghz => "ghz",
        Kind::Fusion => "fusion",
    };
    format!("{kind} {} {:?}", spec.n, spec.boost).into_bytes()
}

fn amplitude(a: C64) -> String {
    let clean = |x: f64| if x.abs() < 5e-10 { 0.0 } else { x };
    let (re, im) = (clean(a.re), clean(a.im));
    if im == 0.0 {
        format!("{re:+.4}")
    } else if re == 0.0 {
        format!("{im:+.4}i")
    } else {
        format!("({re:+.4}{im:+.4}i)")
    }
}

fn functional(op: &KrausOperator) -> String {
    op.ray
        .iter()
        .map(|(k, a)| {
            if k.output.modes() == 0 {
                format!("{}<{}|", amplitude(*a), k.input)
            } else {
                format!("{}|{}><{}|", amplitude(*a), k.output, k.input)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn kraus(spec: &DeviceSpec, quiet: bool) -> Outcome {
    let d = build_device(spec)?;
    let table = kraus_table(&d)?;
    let mut out = String::new();
    header(&mut out, quiet, &[&spec_bytes(spec)]);
    if !quiet {
        let _ = writeln!(out, "{d}");
        let _ = writeln!(out, "{:<4} {:<7} {:<8} {:<40} functional", "K", "outcome", "weight", "patterns (coefficient)");
        for (i, op) in table.iter().enumerate() {
            let patterns: Vec<String> = op
                .patterns
                .iter()
                .zip(&op.coefficients)
                .map(|(p, c)| format!("{p} {}", amplitude(*c)))
                .collect();
            let _ = writeln!(
                out,
                "{:<4} {:<7} {:<8} {:<40} {}",
                format!("K{}", i + 1),
                op.outcome.to_string(),
                op.weight().to_string(),
                patterns.join(", "),
                functional(op)
            );
        }
        let _ = writeln!(out, "required PNR: {}", required_pnr(&table));
    }
    let _ = writeln!(out, "P_S = {}", success_probability_of(&d, &table));
    Ok(out)
}

fn loss_sweep(
    spec: &DeviceSpec,
    start: f64,
    stop: f64,
    steps: usize,
    path: Option<&Path>,
    quiet: bool,
) -> Outcome {
    let in_range = |x: f64| (0.0..=1.0).contains(&x);
    if !in_range(start) || !in_range(stop) || steps == 0 || (steps == 1 && start != stop) {
        return Err(Failure::Usage(
            "eta grid needs 0 <= eta <= 1 and at least one step (two when start != stop)".into(),
        ));
    }
    let d = build_device(spec)?;
    let poly = lossy_success_polynomial(&d)?;
    let mut csv = String::from("eta,p_success\n");
    let mut exact = String::new();
    for k in 0..steps {
        let eta = if steps == 1 {
            start
        } else {
            start + (stop - start) * k as f64 / (steps - 1) as f64
        };
        let p = poly.eval(eta);
        let _ = writeln!(csv, "{},{}", significant(eta), significant(p));
        let dyadic_eta = snap_dyadic(eta).is_some_and(|r| *r.denom() <= 1 << 10);
        if let (true, Some(r)) = (dyadic_eta, snap_dyadic(p)) {
            let _ = writeln!(exact, "# eta = {} exactly: p_success = {r}", significant(eta));
        }
    }
    let mut out = String::new();
    match path {
        Some(path) => {
            std::fs::write(path, &csv)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            header(&mut out, quiet, &[&spec_bytes(spec)]);
            if !quiet {
                let _ = writeln!(out, "# P_S(eta) = {poly}");
                out.push_str(&exact);
                let _ = writeln!(out, "wrote {} rows to {}", steps, path.display());
            }
        }
        None => {
            out = csv;
            if !quiet {
                eprintln!("# P_S(eta) = {poly}");
                eprint!("{exact}");
            }
        }
    }
    Ok(out)
}

/// Twelve significant digits without trailing zeros.
fn significant(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn metrics_text(out: &mut String, m: &SchemeMetrics) {
    let _ = writeln!(out, "success probability: {}", m.success_probability);
    let seeds: Vec<String> = m
        .seed_inventory
        .iter()
        .map(|(n, c)| format!("{c} x {}", if *n == 2 { "Bell".to_string() } else { format!("{n}-GHZ") }))
        .collect();
    let _ = writeln!(out, "seeds: {}", seeds.join(", "));
    let devices: Vec<String> = m.device_inventory.iter().map(|(n, c)| format!("{c} x {n}")).collect();
    let _ = writeln!(out, "devices: {}", devices.join(", "));
    let _ = writeln!(out, "photons: {} ({} auxiliary)", m.photon_count, m.aux_photons);
    let _ = writeln!(out, "Hadamard beamsplitters: {}", m.hadamard_beamsplitters);
    let _ = writeln!(out, "fully loss-detecting: {}", if m.fully_loss_detecting { "yes" } else { "no" });
    let _ = writeln!(out, "max PNR: {}", m.max_pnr);
}

fn compile(path: &Path, out_path: Option<&Path>, quiet: bool) -> Outcome {
    let text = read(path)?;
    let d = ZXDiagram::from_json(&text)?;
    let s = extract_scheme(&d)?;
    let m = scheme_metrics(&s, &Boosting::new())?;
    let target = out_path.map(Path::to_path_buf).unwrap_or_else(|| {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("diagram");
        path.with_file_name(format!("{stem}.scheme.json"))
    });
    std::fs::write(&target, s.to_json(Some(&m)))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", target.display())))?;
    let mut out = String::new();
    header(&mut out, quiet, &[text.as_bytes()]);
    metrics_text(&mut out, &m);
    if !quiet {
        let _ = writeln!(out, "scheme written to {}", target.display());
    }
    Ok(out)
}

fn target_state(spec: &str, s: &LOScheme) -> Result<Vec<C64>, Failure> {
    let size = |rest: &str| {
        rest.parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .ok_or_else(|| Failure::Usage(format!("bad target size in {spec:?}")))
    };
    match spec.split_once(':') {
        Some(("ghz", n)) => Ok(ghz_state(size(n)?)),
        Some(("ring", n)) => {
            let n = size(n)?;
            Ok(graph_state(n, &ring_edges(n)))
        }
        None if spec == "source" => {
            let d = s
                .source()
                .ok_or_else(|| Failure::Usage("scheme carries no source diagram".into()))?;
            Ok(to_tensor(d)?)
        }
        _ => Err(Failure::Usage(format!("unknown target {spec:?}; use ghz:N, ring:N or source"))),
    }
}

fn verify(path: &Path, target: &str, max_photons: usize, max_branches: Option<usize>, quiet: bool) -> Outcome {
    let text = read(path)?;
    let s = LOScheme::from_json(&text)?;
    let state = target_state(target, &s)?;
    let expected_len = 1usize << (s.input_count() + s.output_count());
    if state.len() != expected_len {
        return Err(Failure::Usage(format!(
            "target has {} amplitudes, the scheme needs {expected_len}",
            state.len()
        )));
    }
    let opts = SimOptions {
        max_photons,
        max_branches,
        ..SimOptions::default()
    };
    let r = verify_scheme(&s, &state, &opts)?;
    let mut out = String::new();
    header(&mut out, quiet, &[text.as_bytes(), target.as_bytes()]);
    let _ = writeln!(out, "branches: {} ({} matched)", r.branches, r.matched);
    let _ = writeln!(out, "total probability: {:.12}", r.total_probability);
    let _ = writeln!(out, "expected probability: {:.12}", r.expected_probability);
    let _ = writeln!(out, "worst fidelity: {:.12}", r.worst_fidelity);
    if !quiet {
        for f in &r.failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "{verdict}");
    if r.passed() {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}

fn reproduce(filter: Option<&str>, conjecture: bool, boosted_analysers: bool, quiet: bool) -> Outcome {
    let opts = ReportOptions {
        conjecture_n5: conjecture,
        boosted_five_analysers: boosted_analysers,
        ..ReportOptions::standard()
    };
    let checks = run_all(&opts, filter)?;
    if checks.is_empty() {
        return Err(Failure::Usage(format!("no criterion matches {:?}", filter.unwrap_or(""))));
    }
    let mut out = String::new();
    header(&mut out, quiet, &[]);
    for c in &checks {
        let _ = writeln!(out, "{c}");
        for r in &c.rows {
            if !quiet || !r.passed {
                let _ = writeln!(out, "    [{}] {}", if r.passed { "ok" } else { "FAIL" }, r.text);
            }
        }
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(out, "{} of {} criteria pass", checks.len() - failed, checks.len());
    if failed == 0 {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}
