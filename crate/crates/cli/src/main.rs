use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tomokit::admissibility::{classify_state, nonlimit_demonstration, ClassifyOptions, State};
use tomokit::io::{fmt_f64, parse_frames, read_phasegrid, read_tomogram_csv, write_phasegrid, write_tomogram_csv};
use tomokit::model::moments_of_grid;
use tomokit::scaling::{classify_scaling, quantum_cross};
use tomokit::tomography::{
    check_tomogram, invert_tomogram, tomogram_of_gaussian, tomogram_of_grid, CheckOptions, InversionOptions,
    TomogramOptions,
};
use tomokit::weyl::fock_wigner;
use tomokit::{Error, Frame, GaussianState, GridKind, Marginal, Moments, PhaseGrid, ScaleParams, Tomogram, WeylConfig, Window};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const DEFAULT_MAX_DIM: usize = 128;

#[derive(Parser, Debug)]
#[command(name = "tomokit", version, about = "Symplectic tomograms of classical and quantum states")]
struct Cli {
    /// Planck parameter.
    #[arg(long, global = true, default_value_t = 1.0)]
    hbar: f64,
    /// Oscillator basis truncation.
    #[arg(long, global = true, default_value_t = 64)]
    dim: usize,
    /// Phase-space window: `HALF_WIDTH:N` (square) or
    /// `Q_MIN,Q_MAX,N_Q,P_MIN,P_MAX,N_P`.
    #[arg(long, global = true, default_value = "8:256")]
    window: String,
    /// Normalization tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Seed recorded in the report for randomized runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON run report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forward transform of a state onto a set of frames.
    Tomogram(TomogramArgs),
    /// Reconstruct a phase-space density from a tomogram CSV.
    Invert(InvertArgs),
    /// Classical and quantum admissibility of a state.
    Classify(ClassifyArgs),
    /// Plot-ready scans over hbar or over scaling parameters.
    Scan(ScanArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StateKind {
    Gaussian,
    GridFile,
    Fock,
}

#[derive(Args, Debug)]
struct StateArgs {
    #[arg(long, value_enum)]
    state: StateKind,
    /// Gaussian mean `q,p`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mean: Option<Vec<f64>>,
    /// Gaussian covariance `s_qq,s_pp,s_qp`; defaults to the vacuum.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sigma: Option<Vec<f64>>,
    /// `phasegrid v1` density file.
    #[arg(long)]
    path: Option<PathBuf>,
    /// Oscillator level.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct TomogramArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Frame list, one `mu nu` per line.
    #[arg(long, conflicts_with_all = ["lambdas", "angles"])]
    frames: Option<PathBuf>,
    /// Scalings `λ` of frames `(e^λ cos θ, e^-λ sin θ)`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambdas: Option<Vec<f64>>,
    /// Number of angles `θ_k = πk/N`.
    #[arg(long)]
    angles: Option<usize>,
    /// Samples per marginal.
    #[arg(long, default_value_t = 256)]
    nx: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InvertArgs {
    /// Tomogram CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Density grid to compare the reconstruction with.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Print the JSON report instead of the text block.
    #[arg(long)]
    json: bool,
    /// Treat a truncation warning as a failure.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(subcommand)]
    kind: ScanKind,
}

#[derive(Subcommand, Debug)]
enum ScanKind {
    /// Classical-only and quantum-only witnesses for each hbar.
    HbarScan {
        #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01")]
        hbars: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verdicts over a grid of scaling parameters `(λ_q, λ_p)`.
    CrossScan {
        /// `LO:HI:COUNT` for λ_q.
        #[arg(long, default_value = "-2:2:41", allow_hyphen_values = true)]
        lq: String,
        /// `LO:HI:COUNT` for λ_p.
        #[arg(long, default_value = "-2:2:41", allow_hyphen_values = true)]
        lp: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure carried to the exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Machine-readable record of one run. Keys are emitted in sorted order.
#[derive(Debug, Serialize)]
struct RunReport {
    command: Vec<String>,
    input_digest: String,
    results: Value,
    warnings: Vec<String>,
    exit_status: u8,
}

struct Run {
    digest: Sha256,
    results: Value,
    warnings: Vec<String>,
    stdout: String,
}

impl Run {
    fn new(cli: &Cli) -> Self {
        let mut digest = Sha256::new();
        digest.update(format!("{:?}|{}|{}|{}|{}", cli.hbar, cli.dim, cli.window, cli.tol, cli.seed).as_bytes());
        Run { digest, results: Value::Null, warnings: Vec::new(), stdout: String::new() }
    }

    fn read(&mut self, path: &Path) -> Outcome<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.digest.update(text.as_bytes());
        Ok(text)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut run = Run::new(&cli);
    let result = dispatch(&cli, &mut run);
    let (status, error) = match result {
        Ok(()) => (0, None),
        Err(Failure::Usage(m)) => (EXIT_USAGE, Some(m)),
        Err(Failure::Numeric(m)) => (EXIT_NUMERIC, Some(m)),
    };
    print!("{}", run.stdout);
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(m) = &error {
        eprintln!("error: {m}");
    }
    if let Some(path) = &cli.report {
        let mut results = run.results;
        if let Some(m) = error {
            results = json!({ "error": m, "partial": results });
        }
        let report = RunReport {
            command: std::env::args().skip(1).collect(),
            input_digest: hex::encode(run.digest.finalize()),
            results,
            warnings: run.warnings,
            exit_status: status,
        };
        // round trip through Value so every object has sorted keys
        let value = serde_json::to_value(&report).expect("report is serializable");
        let text = serde_json::to_string_pretty(&value).expect("report is serializable") + "\n";
        if let Err(e) = write_atomic(path, &text) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    ExitCode::from(status)
}

fn dispatch(cli: &Cli, run: &mut Run) -> Outcome<()> {
    if !(cli.hbar > 0.0) || !cli.hbar.is_finite() {
        return Err(Failure::Usage("--hbar must be positive".into()));
    }
    if !(cli.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    match &cli.command {
        Command::Tomogram(a) => cmd_tomogram(cli, a, run),
        Command::Invert(a) => cmd_invert(cli, a, run),
        Command::Classify(a) => cmd_classify(cli, a, run),
        Command::Scan(a) => cmd_scan(cli, a, run),
    }
}

fn parse_window(s: &str) -> Outcome<Window<f64>> {
    let bad = || Failure::Usage(format!("bad --window {s:?}"));
    let w = if let Some((half, n)) = s.split_once(':') {
        Window::square(half.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?)
    } else {
        let t: Vec<&str> = s.split(',').map(str::trim).collect();
        if t.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| t[i].parse::<f64>().map_err(|_| bad());
        let n = |i: usize| t[i].parse::<usize>().map_err(|_| bad());
        Window::new(f(0)?, f(1)?, n(2)?, f(3)?, f(4)?, n(5)?)
    };
    w.map_err(|e| Failure::Usage(format!("bad --window: {e}")))
}

fn weyl_config(cli: &Cli, run: &mut Run) -> Outcome<WeylConfig<f64>> {
    let max_dim = match std::env::var("TOMOKIT_MAX_DIM") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("bad TOMOKIT_MAX_DIM {v:?}")))?,
        Err(_) => DEFAULT_MAX_DIM,
    };
    let mut dim = cli.dim;
    if dim == 0 {
        return Err(Failure::Usage("--dim must be positive".into()));
    }
    if dim > max_dim {
        run.warnings.push(format!("basis truncation {dim} capped at {max_dim}"));
        dim = max_dim;
    }
    Ok(WeylConfig { window: parse_window(&cli.window)?, dim, max_dim, ..WeylConfig::default() })
}

enum Loaded {
    Gaussian(GaussianState<f64>),
    Grid(PhaseGrid<f64>),
    Fock(usize),
}

fn load_state(a: &StateArgs, hbar: f64, run: &mut Run) -> Outcome<Loaded> {
    let only = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Failure::Usage(format!("--{what} does not apply to --state {:?}", a.state)))
        }
    };
    match a.state {
        StateKind::Gaussian => {
            only(a.path.is_none(), "path")?;
            only(a.n.is_none(), "n")?;
            let m = a.mean.clone().unwrap_or_else(|| vec![0.0, 0.0]);
            let s = a.sigma.clone().unwrap_or_else(|| vec![hbar / 2.0, hbar / 2.0, 0.0]);
            if m.len() != 2 || s.len() != 3 {
                return Err(Failure::Usage("--mean takes `q,p` and --sigma takes `s_qq,s_pp,s_qp`".into()));
            }
            run.digest.update(format!("gaussian {m:?} {s:?}").as_bytes());
            Ok(Loaded::Gaussian(GaussianState::single(m[0], m[1], s[0], s[1], s[2])?))
        }
        StateKind::GridFile => {
            only(a.mean.is_none() && a.sigma.is_none(), "mean/--sigma")?;
            only(a.n.is_none(), "n")?;
            let path = a.path.as_ref().ok_or_else(|| Failure::Usage("--state grid-file needs --path".into()))?;
            let text = run.read(path)?;
            Ok(Loaded::Grid(read_phasegrid(&text, GridKind::Density)?))
        }
        StateKind::Fock => {
            only(a.mean.is_none() && a.sigma.is_none(), "mean/--sigma")?;
            only(a.path.is_none(), "path")?;
            let n = a.n.ok_or_else(|| Failure::Usage("--state fock needs --n".into()))?;
            run.digest.update(format!("fock {n}").as_bytes());
            Ok(Loaded::Fock(n))
        }
    }
}

/// Phase-space density of a Fock level at `hbar`, in physical units.
fn fock_density(n: usize, hbar: f64, w: Window<f64>) -> Outcome<PhaseGrid<f64>> {
    let r = hbar.sqrt();
    Ok(PhaseGrid::from_fn(w, GridKind::Density, |q, p| fock_wigner(n, q / r, p / r) / (2.0 * std::f64::consts::PI * hbar))?)
}

fn cmd_tomogram(cli: &Cli, a: &TomogramArgs, run: &mut Run) -> Outcome<()> {
    let frames: Vec<Frame<f64>> = match (&a.frames, &a.lambdas, a.angles) {
        (Some(path), _, _) => {
            let text = run.read(path)?;
            parse_frames(&text)?
        }
        (None, l, Some(n)) => {
            if n == 0 {
                return Err(Failure::Usage("--angles must be positive".into()));
            }
            let lambdas = l.clone().unwrap_or_else(|| vec![0.0]);
            let mut out = Vec::new();
            for lam in lambdas {
                for k in 0..n {
                    out.push(Frame::from_polar(lam, std::f64::consts::PI * k as f64 / n as f64));
                }
            }
            out
        }
        _ => return Err(Failure::Usage("give --frames or --angles".into())),
    };
    if a.nx < 3 {
        return Err(Failure::Usage("--nx must be at least 3".into()));
    }
    let window = parse_window(&cli.window)?;
    let tomo = match load_state(&a.state, cli.hbar, run)? {
        Loaded::Gaussian(s) => {
            let mut ms = Vec::with_capacity(frames.len());
            for f in &frames {
                let (mean, var) = tomogram_of_gaussian(&s, f)?;
                let sd = var.sqrt();
                let (lo, hi) = (mean - 10.0 * sd, mean + 10.0 * sd);
                let h = (hi - lo) / (a.nx - 1) as f64;
                let t = Tomogram::gaussian(s.clone())?;
                let vals = (0..a.nx).map(|k| t.density(lo + h * k as f64, f)).collect::<Result<Vec<_>, _>>()?;
                ms.push(Marginal::new(*f, lo, hi, vals)?);
            }
            Tomogram::sampled(ms)?
        }
        Loaded::Grid(g) => tomogram_of_grid(&g, &frames, &TomogramOptions { n_x: a.nx, tol: cli.tol.max(1e-3) })?,
        Loaded::Fock(n) => {
            let g = fock_density(n, cli.hbar, window)?;
            tomogram_of_grid(&g, &frames, &TomogramOptions { n_x: a.nx, tol: cli.tol.max(1e-3) })?
        }
    };
    let report = check_tomogram(&tomo, &CheckOptions::default());
    for r in &report.normalization {
        let _ = writeln!(run.stdout, "frame {} {} normalization_residual {:e}", fmt_f64(r.frame.mu), fmt_f64(r.frame.nu), r.residual);
    }
    let worst = report.max_normalization_residual();
    run.results = json!({
        "frames": frames.len(),
        "max_normalization_residual": worst,
        "max_homogeneity_residual": report.max_homogeneity_residual(),
        "normalization": report.normalization,
        "negativity": report.negativity,
    });
    for r in &report.negativity {
        run.warnings.push(format!("frame ({}, {}) has negative values down to {:e}", r.frame.mu, r.frame.nu, r.residual));
    }
    write_atomic(&a.out, &write_tomogram_csv(&tomo)?).map_err(Failure::Usage)?;
    let limit = match a.state.state {
        StateKind::Gaussian => cli.tol,
        _ => cli.tol.max(1e-3),
    };
    if worst > limit {
        run.warnings.push(format!("normalization residual {worst:e} exceeds {limit:e}"));
        return Err(Failure::Numeric("normalization tolerance exceeded".into()));
    }
    Ok(())
}

fn cmd_invert(cli: &Cli, a: &InvertArgs, run: &mut Run) -> Outcome<()> {
    let window = parse_window(&cli.window)?;
    let text = run.read(&a.input)?;
    let tomo: Tomogram<f64> = read_tomogram_csv(&text)?;
    let reference = match &a.reference {
        Some(p) => {
            let t = run.read(p)?;
            Some(read_phasegrid::<f64>(&t, GridKind::Density)?)
        }
        None => None,
    };
    let g = invert_tomogram(&tomo, &InversionOptions::new(window))?;
    write_atomic(&a.out, &write_phasegrid(&g)).map_err(Failure::Usage)?;
    let m = moments_of_grid(&g, f64::MAX)?;
    let mut results = BTreeMap::new();
    results.insert("mean", json!([m.mean()[0], m.mean()[1]]));
    results.insert("sigma", json!([m.sigma_qq(), m.sigma_pp(), m.sigma_qp()]));
    results.insert("min_value", json!(g.min_value()));
    let _ = writeln!(run.stdout, "mean {} {}", fmt_f64(m.mean()[0]), fmt_f64(m.mean()[1]));
    let _ = writeln!(run.stdout, "sigma {} {} {}", fmt_f64(m.sigma_qq()), fmt_f64(m.sigma_pp()), fmt_f64(m.sigma_qp()));
    if let Some(r) = reference {
        let r = if r.window().matches(g.window()) { r } else { resample_to(&r, window)? };
        let l1 = g.l1_distance(&r)?;
        let _ = writeln!(run.stdout, "l1_to_reference {l1:e}");
        results.insert("l1_to_reference", json!(l1));
    }
    run.results = serde_json::to_value(results).expect("serializable");
    Ok(())
}

/// Bilinear resampling of a density onto another window.
fn resample_to(g: &PhaseGrid<f64>, w: Window<f64>) -> Outcome<PhaseGrid<f64>> {
    Ok(PhaseGrid::from_fn(w, GridKind::Density, |q, p| g.interpolate(q, p))?)
}

fn cmd_classify(cli: &Cli, a: &ClassifyArgs, run: &mut Run) -> Outcome<()> {
    let cfg = weyl_config(cli, run)?;
    let opts = ClassifyOptions { weyl: cfg, norm_tol: cli.tol, ..ClassifyOptions::default() };
    let state = match load_state(&a.state, cli.hbar, run)? {
        Loaded::Gaussian(s) => State::Gaussian(s),
        Loaded::Grid(g) => State::Grid(g),
        Loaded::Fock(n) => State::Fock(n),
    };
    let r = classify_state(&state, cli.hbar, &opts)?;
    if r.truncation_warning {
        run.warnings.push(format!("basis truncation leaks {:e} of the trace", r.leakage));
    }
    run.results = serde_json::to_value(&r).expect("serializable");
    if a.json {
        run.stdout = serde_json::to_string_pretty(&run.results).expect("serializable") + "\n";
    } else {
        let u = &r.uncertainty;
        let mut s = String::new();
        let _ = writeln!(s, "hbar = {}", r.hbar);
        let _ = writeln!(s, "quadrant = {}", r.quadrant.as_str());
        let _ = writeln!(s, "classical_admissible = {}", r.classical_admissible);
        let _ = writeln!(s, "quantum_admissible = {}", r.quantum_admissible);
        let _ = writeln!(s, "min_symbol_value = {:e}", r.min_symbol_value);
        let _ = writeln!(s, "mass = {}", r.mass);
        let _ = writeln!(s, "min_eigenvalue = {:e}", r.min_eigenvalue);
        let _ = writeln!(s, "trace = {}", r.trace);
        let _ = writeln!(s, "uncertainty_passes = {}", u.passes);
        if let Some(m) = u.sr_margin {
            let _ = writeln!(s, "sr_margin = {m:e}");
        }
        let _ = writeln!(s, "robertson_margin = {:e}", u.robertson_margin);
        let _ = writeln!(s, "leakage = {:e}", r.leakage);
        let _ = writeln!(s, "truncation_warning = {}", r.truncation_warning);
        run.stdout = s;
    }
    if a.strict && r.truncation_warning {
        return Err(Failure::Numeric("truncation warning escalated by --strict".into()));
    }
    Ok(())
}

fn parse_range(s: &str) -> Outcome<Vec<f64>> {
    let bad = |why: &str| Failure::Usage(format!("bad range {s:?}: {why}"));
    let t: Vec<&str> = s.split(':').collect();
    if t.len() != 3 {
        return Err(bad("expected LO:HI:COUNT"));
    }
    let lo: f64 = t[0].trim().parse().map_err(|_| bad("LO is not a number"))?;
    let hi: f64 = t[1].trim().parse().map_err(|_| bad("HI is not a number"))?;
    let n: usize = t[2].trim().parse().map_err(|_| bad("COUNT is not a count"))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo || (n == 1 && hi != lo) {
        return Err(bad("empty range"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    // nodes computed from integers so symmetric ranges hit 0 exactly
    Ok((0..n).map(|k| (lo * (n - 1 - k) as f64 + hi * k as f64) / (n - 1) as f64).collect())
}

fn cmd_scan(cli: &Cli, a: &ScanArgs, run: &mut Run) -> Outcome<()> {
    match &a.kind {
        ScanKind::HbarScan { hbars, out } => {
            if hbars.is_empty() || hbars.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
                return Err(Failure::Usage("hbar values must be positive".into()));
            }
            if hbars.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Failure::Usage("hbar values must be strictly descending".into()));
            }
            let cfg = weyl_config(cli, run)?;
            let opts = ClassifyOptions { weyl: cfg, norm_tol: cli.tol, ..ClassifyOptions::default() };
            run.digest.update(format!("hbar-scan {hbars:?}").as_bytes());
            let rep = nonlimit_demonstration(hbars, &opts)?;
            let mut csv = String::from(
                "hbar,classical_witness,classical_quadrant,classical_min_eigenvalue,classical_sr_margin,\
                 quantum_witness,quantum_quadrant,quantum_min_symbol_value,quantum_min_eigenvalue,verified\n",
            );
            for r in &rep.rows {
                let c = &r.classical_witness;
                let q = &r.quantum_witness;
                let _ = writeln!(
                    csv,
                    "{},gaussian-s={},{},{},{},fock-1,{},{},{},{}",
                    fmt_f64(r.hbar),
                    fmt_f64(r.hbar / 8f64.sqrt()),
                    c.quadrant.as_str(),
                    fmt_f64(c.min_eigenvalue),
                    fmt_f64(c.uncertainty.sr_margin.unwrap_or(f64::NAN)),
                    q.quadrant.as_str(),
                    fmt_f64(q.min_symbol_value),
                    fmt_f64(q.min_eigenvalue),
                    r.symmetric_difference_nonempty
                );
                if c.truncation_warning || q.truncation_warning {
                    run.warnings.push(format!("truncation warning at hbar = {}", r.hbar));
                }
            }
            run.results = serde_json::to_value(&rep).expect("serializable");
            emit(run, out.as_deref(), csv)?;
            if !rep.all_rows_verified {
                return Err(Failure::Numeric("a witness failed verification".into()));
            }
            Ok(())
        }
        ScanKind::CrossScan { lq, lp, out } => {
            let (lqs, lps) = (parse_range(lq)?, parse_range(lp)?);
            run.digest.update(format!("cross-scan {lq} {lp}").as_bytes());
            let hbar = cli.hbar;
            let cross = quantum_cross(hbar, 2)?;
            let reference = Moments::single(0.5, 0.5, 0.0)?;
            let mut csv = String::from(
                "lambda_q,lambda_p,classical_admissible,quantum_admissible,universal_quantum_admissible,inside_cross\n",
            );
            let (mut n_quantum, mut n_inside, mut consistent) = (0usize, 0usize, true);
            for &a_q in &lqs {
                for &a_p in &lps {
                    let (c, q, u, inside) = if a_q == 0.0 || a_p == 0.0 {
                        (false, false, false, true)
                    } else {
                        let v = classify_scaling(&reference, &ScaleParams::single(a_q, a_p)?, hbar)?;
                        let inside = cross.contains(1.0 / a_q, 1.0 / a_p);
                        (v.classical_admissible, v.quantum_admissible_for_state, v.universal_quantum_admissible, inside)
                    };
                    n_quantum += q as usize;
                    n_inside += inside as usize;
                    consistent &= q != inside;
                    let _ = writeln!(csv, "{},{},{c},{q},{u},{inside}", fmt_f64(a_q), fmt_f64(a_p));
                }
            }
            run.results = json!({
                "hbar": hbar,
                "points": lqs.len() * lps.len(),
                "quantum_admissible": n_quantum,
                "inside_cross": n_inside,
                "verdicts_match_cross": consistent,
                "cross_constant": cross.constant,
            });
            emit(run, out.as_deref(), csv)
        }
    }
}

fn emit(run: &mut Run, out: Option<&Path>, text: String) -> Outcome<()> {
    match out {
        Some(p) => write_atomic(p, &text).map_err(Failure::Usage),
        None => {
            run.stdout.push_str(&text);
            Ok(())
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, text: &str) -> std::result::Result<(), String> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: &dyn std::fmt::Display| format!("cannot write {}: {e}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| fail(&e))?;
    tmp.flush().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}
