//! Command-line surface: lattice analysis, example-style diagrams,
//! invariance checks with oracle cross-validation, decompositions, and
//! enumeration sweeps.
//!
//! Exit codes: 0 = verdicts computed (invariant or not), 1 = invalid
//! input, 2 = enumeration guard exceeded, 3 = oracle/condition mismatch.

use gabinv_cli::diagram;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gabinv::finite_gabor::FiniteGaborModel;
use gabinv::invariance::{check_report, decompose, invariance_set, InvarianceError};
use gabinv::lattice::{parse_lattice, parse_rat, CosetPartition, LatticeError, RationalLattice};
use gabinv::windows::{parse_window, window_from_mask, PhaseRule};
use gabinv::zak::{analytic_zak, inverse_finite_zak, WindowSpec, ZakGrid, ZakSplit};
use num::complex::Complex64;
use num::ToPrimitive;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gabinv",
    version,
    about = "Extra time-frequency shift invariance of Gabor spaces over integer lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice arithmetic and diagrams
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
    /// Check Lambda~-invariance of G(phi, Lambda)
    Check(CheckArgs),
    /// Orthogonal decomposition of the window along the coset masks
    Decompose(ModelArgs),
    /// Sweep all lattices between Lambda and Z^2
    Enumerate(EnumerateArgs),
    /// Brute-force invariance oracle for a single shift or lattice
    Oracle(OracleArgs),
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Canonical basis, covolume, dual, adjoint, and cosets
    Info(InfoArgs),
    /// Example-style two-panel figure (SVG or ASCII)
    Diagram(DiagramArgs),
}

#[derive(Args)]
struct InfoArgs {
    /// Lattice basis, row-major: "4,0;0,2" or "1/2,0;0,1/4"
    #[arg(long)]
    lambda: String,
    /// Finer lattice for coset/index information
    #[arg(long)]
    tilde: Option<String>,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagramArgs {
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    tilde: String,
    /// "svg" or "ascii"
    #[arg(long, default_value = "svg")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    tilde: String,
    /// Window spec JSON file
    #[arg(long)]
    window: PathBuf,
    /// Ambient dimension of the finite model
    #[arg(long = "L", default_value_t = 32)]
    l: usize,
    /// Time period in samples (M = L/N bins)
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
    /// Relative zero threshold on Zak magnitudes
    #[arg(long, default_value_t = 1e-9)]
    tau: f64,
    /// Relative residual tolerance for subspace membership
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Continuous-mode grid resolution (with --Q); skips the finite model
    #[arg(long = "P")]
    p: Option<usize>,
    #[arg(long = "Q")]
    q: Option<usize>,
    /// Cross-validate with the brute-force subspace oracle
    #[arg(long)]
    oracle: bool,
    /// Include the orthogonal decomposition in the report
    #[arg(long)]
    decompose: bool,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    window: PathBuf,
    #[arg(long = "L", default_value_t = 32)]
    l: usize,
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1e-9)]
    tau: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    lambda: String,
    /// Single shift "a,b" in continuous units
    #[arg(long)]
    ab: Option<String>,
    /// Or a whole lattice of shifts
    #[arg(long)]
    tilde: Option<String>,
    #[arg(long)]
    window: PathBuf,
    #[arg(long = "L", default_value_t = 32)]
    l: usize,
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 1 = invalid input, 2 = guard exceeded, 3 = oracle mismatch.
fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(inv) = cause.downcast_ref::<InvarianceError>() {
            match inv {
                InvarianceError::OracleMismatch => return 3,
                InvarianceError::Lattice(LatticeError::IndexGuardExceeded { .. }) => return 2,
                _ => {}
            }
        }
        if let Some(LatticeError::IndexGuardExceeded { .. }) = cause.downcast_ref::<LatticeError>()
        {
            return 2;
        }
    }
    1
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Lattice { command } => match command {
            LatticeCommand::Info(args) => cmd_lattice_info(args),
            LatticeCommand::Diagram(args) => cmd_diagram(args),
        },
        Command::Check(args) => cmd_check(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{content}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

fn lattice_json(l: &RationalLattice) -> serde_json::Value {
    json!({
        "basis": l.to_string(),
        "covolume": gabinv::lattice::format_rat(l.covolume()),
        "canonical": true,
    })
}

fn cmd_lattice_info(args: InfoArgs) -> Result<()> {
    let lambda = parse_lattice(&args.lambda)?;
    let dual = lambda.dual();
    let adjoint = lambda.adjoint().ok();
    let mut report = json!({
        "lambda": lattice_json(&lambda),
        "dual": lattice_json(&dual),
    });
    if let Some(adj) = &adjoint {
        report["adjoint"] = lattice_json(adj);
    }
    if let Some(tilde_s) = &args.tilde {
        let tilde = parse_lattice(tilde_s)?;
        if !lambda.sublattice_of(&tilde)? {
            bail!("--tilde must contain --lambda");
        }
        report["tilde"] = lattice_json(&tilde);
        report["tilde_adjoint"] = lattice_json(&tilde.adjoint()?);
        report["index"] = json!(lambda.index_in(&tilde)?);
        let cosets = CosetPartition::new(&lambda.adjoint()?, &tilde.adjoint()?)?;
        report["N"] = json!(cosets.order());
        report["cosets"] = json!(cosets
            .representatives()
            .iter()
            .map(|r| r
                .iter()
                .map(gabinv::lattice::format_rat)
                .collect::<Vec<_>>()
                .join(","))
            .collect::<Vec<_>>());
    }
    let content = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report)?,
        "text" => {
            let mut s = format!(
                "lambda:   {}\ncovolume: {}\ndual:     {}\n",
                lambda,
                gabinv::lattice::format_rat(lambda.covolume()),
                dual
            );
            if let Some(adj) = &adjoint {
                s.push_str(&format!("adjoint:  {adj}\n"));
            }
            if let Some(idx) = report.get("index") {
                s.push_str(&format!("index:    {idx}\n"));
            }
            s
        }
        other => bail!("unsupported format '{other}' (use json or text)"),
    };
    emit(&args.out, &content)
}

fn cmd_diagram(args: DiagramArgs) -> Result<()> {
    let lambda = parse_lattice(&args.lambda)?;
    let tilde = parse_lattice(&args.tilde)?;
    let data = diagram::diagram_data(&lambda, &tilde)?;
    let content = match args.format.as_str() {
        "svg" => diagram::render_svg(&data),
        "ascii" => diagram::render_ascii(&data),
        other => bail!("unsupported format '{other}' (use svg or ascii)"),
    };
    emit(&args.out, &content)
}

/// Seed for the unit-phase rule used when materializing |Z phi| = 1
/// windows from the indicator spec.
fn phase_rule_from_env() -> PhaseRule {
    match std::env::var("GABINV_SEED") {
        Ok(v) => match v.parse::<u64>() {
            Ok(seed) => PhaseRule::RandomUnit { seed },
            Err(_) => PhaseRule::One,
        },
        Err(_) => PhaseRule::One,
    }
}

/// Realizes a window spec as a vector of C^L for the finite model.
fn realize_window(spec: &WindowSpec, split: ZakSplit) -> Result<Vec<Complex64>> {
    spec.validate()?;
    match spec {
        WindowSpec::FiniteVector { l, .. } => {
            if *l != split.l {
                bail!("window has L = {l}, model expects L = {}", split.l);
            }
            Ok(spec.finite_vector().expect("finite vector"))
        }
        WindowSpec::ExplicitZak { p, q, values } => {
            if *p != split.n || *q != split.m {
                bail!(
                    "explicit Zak grid is {p}x{q}, the model cell is {}x{}",
                    split.n,
                    split.m
                );
            }
            let grid = ZakGrid::new_finite(
                split,
                values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
            );
            Ok(inverse_finite_zak(&grid)?)
        }
        WindowSpec::Indicator { width, amplitude } => {
            if (*width - 1.0).abs() < 1e-12 {
                // chi_[0,1) analog: |Z phi| = 1 on the whole cell.
                let w = window_from_mask(&vec![true; split.l], split, &phase_rule_from_env())?;
                let mut v = w.finite_vector().expect("finite vector");
                for z in &mut v {
                    *z *= *amplitude;
                }
                Ok(v)
            } else {
                // Sampled indicator at continuous time t = n/N.
                Ok((0..split.l)
                    .map(|n| {
                        let t = n as f64 / split.n as f64;
                        if t < *width {
                            Complex64::new(*amplitude, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect())
            }
        }
        WindowSpec::Gaussian { sigma } => {
            // Periodized sampling at t = n/N, normalized to unit norm.
            let norm_const = (std::f64::consts::SQRT_2 / sigma).sqrt();
            let period = split.m as f64;
            let j_max = (sigma * 8.0 / period).ceil() as i64 + 2;
            let mut v: Vec<Complex64> = (0..split.l)
                .map(|n| {
                    let t = n as f64 / split.n as f64;
                    let mut acc = 0.0;
                    for j in -j_max..=j_max {
                        let tj = t + j as f64 * period;
                        acc +=
                            norm_const * (-std::f64::consts::PI * tj * tj / (sigma * sigma)).exp();
                    }
                    Complex64::new(acc, 0.0)
                })
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for z in &mut v {
                    *z /= norm;
                }
            }
            Ok(v)
        }
    }
}

fn load_window(path: &PathBuf) -> Result<WindowSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read window file {}", path.display()))?;
    Ok(parse_window(&text, false)?)
}

/// Continuous lattice -> sample lattice diag(N, M) * Lambda.
fn to_sample_lattice(lambda: &RationalLattice, split: ZakSplit) -> Result<RationalLattice> {
    use gabinv::qmat::{rat_int, QMat};
    let mut scale = QMat::zeros(2, 2);
    scale[(0, 0)] = rat_int(split.n as i64);
    scale[(1, 1)] = rat_int(split.m as i64);
    Ok(RationalLattice::canonical_basis(
        &scale.mul(lambda.basis()),
    )?)
}

fn build_model(args: &ModelArgs) -> Result<(FiniteGaborModel, RationalLattice)> {
    let lambda = parse_lattice(&args.lambda)?;
    let tilde = parse_lattice(&args.tilde)?;
    let split = ZakSplit::new(args.l, args.n)?;
    let spec = load_window(&args.window)?;
    let window = realize_window(&spec, split)?;
    let sample_lattice = to_sample_lattice(&lambda, split)?;
    let model = FiniteGaborModel::new(split, sample_lattice, window)
        .map_err(|e| anyhow!("cannot build the finite model: {e}"))?;
    Ok((model, tilde))
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    // Continuous mode: condition (d) on an analytic grid.
    if let (Some(p), Some(q)) = (args.p, args.q) {
        if args.oracle || args.decompose {
            bail!("--oracle/--decompose need the finite model (omit --p/--q)");
        }
        let lambda = parse_lattice(&args.model.lambda)?;
        let tilde = parse_lattice(&args.model.tilde)?;
        let spec = load_window(&args.model.window)?;
        let grid = analytic_zak(&spec, p, q)?;
        let ctx = gabinv::invariance::InvarianceContext::new(&[p, q], &lambda, &tilde)?;
        let cond = gabinv::invariance::condition_d(&grid, &ctx, args.model.tau)?;
        let report = json!({
            "lambda": lambda.to_string(),
            "lambda_tilde": tilde.to_string(),
            "N": cond.order,
            "condition_d": cond.holds,
            "witnesses": serde_json::to_value(&cond.witnesses)?,
            "max_energized_cosets": cond.max_energized_cosets,
            "resolution": {"res": [p, q], "tau": args.model.tau, "tol": args.model.tol},
        });
        return emit_report(&args.model.out, &args.format, &report);
    }
    let (model, tilde) = build_model(&args.model)?;
    let report = check_report(
        &model,
        &tilde,
        args.model.tau,
        args.model.tol,
        args.oracle,
        args.decompose,
    )?;
    let value = serde_json::to_value(&report)?;
    emit_report(&args.model.out, &args.format, &value)
}

fn emit_report(out: &Option<PathBuf>, format: &str, report: &serde_json::Value) -> Result<()> {
    let content = match format {
        "json" => serde_json::to_string_pretty(report)?,
        "text" => {
            let mut s = String::new();
            if let Some(v) = report.get("condition_d") {
                s.push_str(&format!("condition_d: {v}\n"));
            }
            if let Some(v) = report.get("oracle") {
                s.push_str(&format!("oracle:      {v}\n"));
            }
            if let Some(v) = report.get("N") {
                s.push_str(&format!("N:           {v}\n"));
            }
            if let Some(w) = report.get("witnesses").and_then(|w| w.as_array()) {
                s.push_str(&format!("witnesses:   {}\n", w.len()));
            }
            s
        }
        other => bail!("unsupported format '{other}' (use json or text)"),
    };
    emit(out, &content)
}

fn cmd_decompose(args: ModelArgs) -> Result<()> {
    let (model, tilde) = build_model(&args)?;
    let d = decompose(model.window(), &model, &tilde, args.tau, args.tol)?;
    let report = json!({
        "lambda": model.continuous_lattice().to_string(),
        "lambda_tilde": tilde.to_string(),
        "condition_held": d.condition_held,
        "norms": d.norms,
        "max_cross": d.max_cross,
        "sum_residual": d.sum_residual,
        "memberships": d.memberships,
    });
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<()> {
    let model_args = ModelArgs {
        lambda: args.lambda.clone(),
        tilde: "1,0;0,1".into(),
        window: args.window.clone(),
        l: args.l,
        n: args.n,
        tau: args.tau,
        tol: args.tol,
        out: None,
    };
    let (model, ambient) = build_model(&model_args)?;
    let sweep = invariance_set(&model, &ambient, args.tau, args.tol, args.oracle)?;
    let rows: Vec<serde_json::Value> = sweep
        .rows
        .iter()
        .map(|r| {
            json!({
                "lattice": r.lattice.to_string(),
                "condition_d": r.condition_d,
                "oracle": r.oracle,
            })
        })
        .collect();
    let report = json!({
        "lambda": model.continuous_lattice().to_string(),
        "rows": rows,
        "maximal": sweep.maximal.to_string(),
        "join_verified": sweep.join_verified,
    });
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let lambda = parse_lattice(&args.lambda)?;
    let split = ZakSplit::new(args.l, args.n)?;
    let spec = load_window(&args.window)?;
    let window = realize_window(&spec, split)?;
    let model = FiniteGaborModel::new(split, to_sample_lattice(&lambda, split)?, window)
        .map_err(|e| anyhow!("cannot build the finite model: {e}"))?;
    let report = if let Some(ab) = &args.ab {
        let parts: Vec<&str> = ab.split(',').collect();
        if parts.len() != 2 {
            bail!("--ab expects 'a,b'");
        }
        let a = parse_rat(parts[0])?;
        let b = parse_rat(parts[1])?;
        let sa = (&a * gabinv::qmat::rat_int(split.n as i64))
            .to_i64()
            .filter(|_| (&a * gabinv::qmat::rat_int(split.n as i64)).denom() == &1.into())
            .ok_or_else(|| anyhow!("shift does not land on a sample"))?;
        let sb = (&b * gabinv::qmat::rat_int(split.m as i64))
            .to_i64()
            .filter(|_| (&b * gabinv::qmat::rat_int(split.m as i64)).denom() == &1.into())
            .ok_or_else(|| anyhow!("shift does not land on a sample"))?;
        let invariant = gabinv::invariance::brute_force_invariant(&model, sa, sb, args.tol);
        json!({
            "lambda": model.continuous_lattice().to_string(),
            "ab": ab,
            "invariant": invariant,
        })
    } else if let Some(tilde_s) = &args.tilde {
        let tilde = parse_lattice(tilde_s)?;
        let invariant =
            gabinv::invariance::brute_force_lattice_invariant(&model, &tilde, args.tol)?;
        json!({
            "lambda": model.continuous_lattice().to_string(),
            "lambda_tilde": tilde.to_string(),
            "invariant": invariant,
        })
    } else {
        bail!("oracle needs --ab or --tilde");
    };
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}
