//! `ulam`: command-line front end for the ulam-core library.
//!
//! Exit codes: 0 ok, 1 input error, 2 not Ulam stable, 3 degenerate roots,
//! 4 bound violation, 5 tolerance unreachable.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use ulam_core::adversary::sharpness_experiment;
use ulam_core::constants::{best_constant, classical_constant, ConstantResult, DEFAULT_TOL};
use ulam_core::io::{parse_spec, read_series, write_shadow};
use ulam_core::oracle::{cross_check, OracleConfig, OracleReport};
use ulam_core::shadowing::{
    compare_paths, shadow_coefficients, shadow_direct, verify_shadow, VerifyConfig,
};
use ulam_core::vandermonde::{build, VandermondeData};
use ulam_core::{
    characteristic_roots, RecurrenceSpec, RootConfig, RootSet, SpectralClass, ToleranceConfig,
    Trajectory, UlamError,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_STABLE: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_BOUND: u8 = 4;
const EXIT_TOL: u8 = 5;

/// Relative error above which a `--verify` determinant check fails.
const VERIFY_DET_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "ulam",
    version,
    about = "Ulam stability constants for linear recurrences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roots, classification, classical and best constants.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cross-check against the brute-force oracles.
        #[arg(long)]
        verify: bool,
    },
    /// Certified best constant as JSON.
    Constant {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verify: bool,
    },
    /// Exact solution shadowing an approximate trajectory.
    Shadow {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        /// Declared residual level; exit 4 if the trajectory exceeds it.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Shadow CSV; the summary goes next to it with a .json extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also compare against the coefficient construction and the oracles.
        #[arg(long)]
        verify: bool,
    },
    /// Perturbation attaining the best constant.
    Adversary {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constants over a grid of root sets, as CSV.
    Sweep {
        /// Grid description (JSON).
        #[arg(long = "spec", alias = "grid")]
        grid: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<UlamError> for Failure {
    fn from(e: UlamError) -> Self {
        let code = match &e {
            UlamError::NotUlamStable { .. } => EXIT_NOT_STABLE,
            UlamError::DegenerateRoots { .. } => EXIT_DEGENERATE,
            UlamError::TolUnreachable { .. } => EXIT_TOL,
            _ => EXIT_INPUT,
        };
        let message = match &e {
            UlamError::NotUlamStable { modulus } => {
                format!("not Ulam stable: characteristic root with modulus {modulus} lies on the unit circle")
            }
            UlamError::NotApplicable(class) => {
                format!("not applicable: best constant needs every root outside the unit disc (spectrum is {class:?})")
            }
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> std::result::Result<RecurrenceSpec, Failure> {
    parse_spec(&read_text(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn check_tol(tol: f64) -> CmdResult {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(input_error(format!("--tol must be positive, got {tol}")))
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn verify_report(
    data: &VandermondeData,
    best: Option<&ConstantResult>,
) -> std::result::Result<Option<OracleReport>, Failure> {
    let cfg = OracleConfig::default();
    if data.order() > cfg.max_order {
        eprintln!(
            "verify: order {} above oracle limit {}, skipped",
            data.order(),
            cfg.max_order
        );
        return Ok(None);
    }
    Ok(Some(cross_check(data, best, &cfg)?))
}

fn oracle_ok(rep: &OracleReport) -> bool {
    rep.det_rel_error <= VERIFY_DET_TOL && rep.reduced_rel_error <= VERIFY_DET_TOL && rep.bracketed
}

fn oracle_json(rep: &OracleReport) -> serde_json::Value {
    json!({
        "det_rel_error": rep.det_rel_error,
        "reduced_rel_error": rep.reduced_rel_error,
        "reference": finite_or_null(rep.reference),
        "reference_long": finite_or_null(rep.reference_long),
        "bracketed": rep.bracketed,
        "pass": oracle_ok(rep),
    })
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn cmd_analyze(spec_path: &Path, tol: f64, out: Option<&Path>, verify: bool) -> CmdResult {
    check_tol(tol)?;
    let spec = load_spec(spec_path)?;
    let roots = characteristic_roots(&spec, &RootConfig::default())?;
    let mut text = String::new();
    text.push_str(&format!("order: {}\n", spec.order()));
    text.push_str("roots:\n");
    for (k, (r, m)) in roots.roots.iter().zip(&roots.moduli).enumerate() {
        text.push_str(&format!(
            "  r_{} = {} {:+}i  |r| = {}\n",
            k + 1,
            r.re,
            r.im,
            m
        ));
    }
    text.push_str(&format!("minimum separation: {}\n", roots.min_separation));
    text.push_str(&format!("classification: {:?}\n", roots.classification));
    print!("{text}");

    let mut report = json!({
        "roots": roots.roots.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
        "moduli": roots.moduli,
        "classification": roots.classification,
    });
    let outcome = analyze_constants(&roots, tol, verify, &mut report);
    if let Err(f) = &outcome {
        report["error"] = json!(f.message);
    }
    if let Some(path) = out {
        write_file(path, format!("{report}\n").as_bytes())?;
    }
    outcome
}

fn analyze_constants(
    roots: &RootSet,
    tol: f64,
    verify: bool,
    report: &mut serde_json::Value,
) -> CmdResult {
    let classical = classical_constant(roots)?;
    println!("classical constant: {}", classical.value);
    report["classical"] = json!(classical.value);
    match roots.classification {
        SpectralClass::NearDegenerate => {
            return Err(UlamError::DegenerateRoots {
                separation: roots.min_separation,
            }
            .into())
        }
        SpectralClass::HyperbolicMixed => {
            println!("best constant: not available (roots on both sides of the unit circle)");
            report["best"] = serde_json::Value::Null;
            return Ok(());
        }
        _ => {}
    }
    let data = build(roots)?;
    let kr = best_constant(roots, &data, tol)?;
    println!(
        "best constant: {} in [{}, {}] ({} terms, tail bound {:e})",
        kr.value,
        kr.lower(),
        kr.upper(),
        kr.terms_used,
        kr.tail_bound
    );
    report["best"] = serde_json::to_value(kr).expect("serialisable");
    if verify {
        if let Some(rep) = verify_report(&data, Some(&kr))? {
            println!(
                "verify: det error {:e}, reduced error {:e}, reference {} / {} bracketed: {}",
                rep.det_rel_error,
                rep.reduced_rel_error,
                rep.reference,
                rep.reference_long,
                rep.bracketed
            );
            report["verify"] = oracle_json(&rep);
            if !oracle_ok(&rep) {
                return Err(Failure {
                    code: EXIT_BOUND,
                    message: "verify: oracle cross-check failed".into(),
                });
            }
        }
    }
    Ok(())
}

fn cmd_constant(spec_path: &Path, tol: f64, out: Option<&Path>, verify: bool) -> CmdResult {
    check_tol(tol)?;
    let spec = load_spec(spec_path)?;
    let roots = characteristic_roots(&spec, &RootConfig::default())?;
    roots.require_outside()?;
    let data = build(&roots)?;
    let kr = best_constant(&roots, &data, tol)?;
    let mut body = serde_json::to_value(kr).expect("serialisable");
    let mut failed = false;
    if verify {
        if let Some(rep) = verify_report(&data, Some(&kr))? {
            failed = !oracle_ok(&rep);
            body["verify"] = oracle_json(&rep);
        }
    }
    let text = format!("{body}\n");
    print!("{text}");
    if let Some(path) = out {
        write_file(path, text.as_bytes())?;
    }
    if failed {
        return Err(Failure {
            code: EXIT_BOUND,
            message: "verify: oracle cross-check failed".into(),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct ShadowSummary {
    eps: f64,
    bound: f64,
    max_deviation: f64,
    cert_error_max: f64,
    residual: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths_agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_gap: Option<f64>,
}

fn cmd_shadow(
    spec_path: &Path,
    traj_path: &Path,
    declared_eps: Option<f64>,
    tol: f64,
    out: Option<&Path>,
    verify: bool,
) -> CmdResult {
    check_tol(tol)?;
    if let Some(e) = declared_eps {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(input_error(format!("--eps must be non-negative, got {e}")));
        }
    }
    let spec = load_spec(spec_path)?;
    let file = fs::File::open(traj_path)
        .map_err(|e| input_error(format!("{}: {e}", traj_path.display())))?;
    let series =
        read_series(file).map_err(|e| input_error(format!("{}: {e}", traj_path.display())))?;
    if series.dim() != spec.dim() {
        return Err(UlamError::DimensionMismatch {
            expected: spec.dim(),
            got: series.dim(),
        }
        .into());
    }
    let traj = Trajectory::new(series);
    if traj.len() <= spec.order() {
        return Err(UlamError::InvalidLength {
            needed: spec.order() + 1,
            got: traj.len(),
        }
        .into());
    }
    let roots = characteristic_roots(&spec, &RootConfig::default())?;
    roots.require_outside()?;
    let data = build(&roots)?;
    let kr = best_constant(&roots, &data, tol)?;
    let result = shadow_direct(&spec, &roots, &data, &traj, &kr)?;
    let report = verify_shadow(&spec, &traj, &result, &VerifyConfig::default());

    let within_declared = declared_eps.map_or(true, |e| result.eps <= e);
    let mut pass = report.pass && within_declared;
    let mut summary = ShadowSummary {
        eps: result.eps,
        bound: result.bound,
        max_deviation: result.max_deviation,
        cert_error_max: report.cert_error_max,
        residual: report.residual,
        pass,
        paths_agree: None,
        path_gap: None,
    };
    if verify {
        let coeff = shadow_coefficients(&spec, &roots, &data, &traj)?;
        let cmp = compare_paths(&result, &coeff, spec.norm());
        summary.paths_agree = Some(cmp.agree);
        summary.path_gap = Some(cmp.max_gap);
        pass &= cmp.agree;
        if let Some(rep) = verify_report(&data, Some(&kr))? {
            pass &= oracle_ok(&rep);
        }
        summary.pass = pass;
    }
    let text = format!(
        "{}\n",
        serde_json::to_string(&summary).expect("serialisable")
    );
    print!("{text}");
    if let Some(path) = out {
        let mut buf = Vec::new();
        write_shadow(&mut buf, &result)?;
        write_file(path, &buf)?;
        write_file(&path.with_extension("json"), text.as_bytes())?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_BOUND,
            message: if !within_declared {
                format!(
                    "trajectory residual {} exceeds declared eps {}",
                    result.eps,
                    declared_eps.unwrap_or(0.0)
                )
            } else {
                format!(
                    "shadow check failed: residual {:e}, deviation {} vs bound {} + cert {}",
                    report.residual, report.max_deviation, report.bound, report.cert_error_max
                )
            },
        })
    }
}

fn cmd_adversary(spec_path: &Path, eps: f64, tol: f64, out: Option<&Path>) -> CmdResult {
    check_tol(tol)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(input_error(format!("--eps must be positive, got {eps}")));
    }
    let spec = load_spec(spec_path)?;
    let roots = characteristic_roots(&spec, &RootConfig::default())?;
    roots.require_outside()?;
    let data = build(&roots)?;
    let kr = best_constant(&roots, &data, DEFAULT_TOL)?;
    let rep = sharpness_experiment(&spec, &roots, &data, &kr, eps, tol, None)?;
    let text = format!("{}\n", serde_json::to_string(&rep).expect("serialisable"));
    print!("{text}");
    if let Some(path) = out {
        write_file(path, text.as_bytes())?;
    }
    if rep.gap <= tol * rep.kr_value {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_BOUND,
            message: format!("gap {} exceeds tol * K_R = {}", rep.gap, tol * rep.kr_value),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Grid {
    p: usize,
    /// One axis per root; the grid is their cartesian product.
    #[serde(default)]
    axes: Vec<Axis>,
    #[serde(default)]
    random: Option<RandomPoints>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Axis {
    moduli: Vec<f64>,
    /// Radians; defaults to the positive real axis.
    #[serde(default = "zero_angle")]
    angles: Vec<f64>,
}

fn zero_angle() -> Vec<f64> {
    vec![0.0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomPoints {
    count: usize,
    modulus_min: f64,
    modulus_max: f64,
}

fn polar(m: f64, theta: f64) -> Complex64 {
    let z = Complex64::from_polar(m, theta);
    let snap = |x: f64| if x.abs() <= 1e-15 * m { 0.0 } else { x };
    Complex64::new(snap(z.re), snap(z.im))
}

fn grid_points(grid: &Grid, seed: u64) -> std::result::Result<Vec<Vec<Complex64>>, Failure> {
    if grid.p == 0 {
        return Err(input_error("grid field `p`: must be a positive integer"));
    }
    if !grid.axes.is_empty() && grid.axes.len() != grid.p {
        return Err(input_error(format!(
            "grid field `axes`: has {} entries but p = {}",
            grid.axes.len(),
            grid.p
        )));
    }
    let mut points: Vec<Vec<Complex64>> = if grid.axes.is_empty() {
        Vec::new()
    } else {
        vec![Vec::new()]
    };
    for axis in &grid.axes {
        let values: Vec<Complex64> = axis
            .moduli
            .iter()
            .flat_map(|&m| axis.angles.iter().map(move |&t| polar(m, t)))
            .collect();
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&z| {
                    let mut next = prefix.clone();
                    next.push(z);
                    next
                })
            })
            .collect();
    }
    if let Some(random) = &grid.random {
        if !(random.modulus_min > 0.0 && random.modulus_min <= random.modulus_max) {
            return Err(input_error(
                "grid field `random`: need 0 < modulus_min <= modulus_max",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random.count {
            let point = (0..grid.p)
                .map(|_| {
                    let m = rng.gen_range(random.modulus_min..=random.modulus_max);
                    polar(m, rng.gen_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            points.push(point);
        }
    }
    Ok(points)
}

enum SweepRow {
    Row(String),
    Skipped(String),
}

fn sweep_point(index: usize, roots: &[Complex64], tol: f64) -> SweepRow {
    let set = RootSet::from_roots(roots, &ToleranceConfig::default());
    let evaluated = (|| -> ulam_core::Result<(f64, ConstantResult)> {
        let classical = classical_constant(&set)?;
        let data = build(&set)?;
        let kr = best_constant(&set, &data, tol)?;
        Ok((classical.value, kr))
    })();
    match evaluated {
        Ok((classical, kr)) => {
            let mut cells = vec![index.to_string()];
            for z in roots {
                cells.push(z.re.to_string());
                cells.push(z.im.to_string());
            }
            cells.push(classical.to_string());
            cells.push(kr.value.to_string());
            cells.push(kr.tail_bound.to_string());
            cells.push((kr.value / classical).to_string());
            SweepRow::Row(cells.join(","))
        }
        Err(e) => SweepRow::Skipped(format!("sweep: point {index} skipped: {e}")),
    }
}

fn thread_count() -> std::result::Result<Option<usize>, Failure> {
    match std::env::var("ULAM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| {
                input_error(format!(
                    "ULAM_THREADS must be a positive integer, got `{v}`"
                ))
            }),
    }
}

fn cmd_sweep(grid_path: &Path, tol: f64, out: Option<&Path>, seed: u64) -> CmdResult {
    check_tol(tol)?;
    let grid: Grid = serde_json::from_str(&read_text(grid_path)?)
        .map_err(|e| input_error(format!("{}: {e}", grid_path.display())))?;
    let points = grid_points(&grid, seed)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| input_error(format!("thread pool: {e}")))?;
    let mut rows: Vec<(usize, SweepRow)> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, roots)| (i, sweep_point(i, roots, tol)))
            .collect()
    });
    rows.sort_by_key(|(i, _)| *i);

    let mut header = vec!["index".to_string()];
    for k in 1..=grid.p {
        header.push(format!("r_{k}_re"));
        header.push(format!("r_{k}_im"));
    }
    header.extend(["classical", "kr", "tail_bound", "ratio"].map(String::from));
    let mut text = header.join(",");
    text.push('\n');
    for (_, row) in rows {
        match row {
            SweepRow::Row(line) => {
                text.push_str(&line);
                text.push('\n');
            }
            SweepRow::Skipped(msg) => eprintln!("{msg}"),
        }
    }
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Analyze {
            spec,
            tol,
            out,
            verify,
        } => cmd_analyze(&spec, tol, out.as_deref(), verify),
        Command::Constant {
            spec,
            tol,
            out,
            verify,
        } => cmd_constant(&spec, tol, out.as_deref(), verify),
        Command::Shadow {
            spec,
            traj,
            eps,
            tol,
            out,
            verify,
        } => cmd_shadow(&spec, &traj, eps, tol, out.as_deref(), verify),
        Command::Adversary {
            spec,
            eps,
            tol,
            out,
        } => cmd_adversary(&spec, eps, tol, out.as_deref()),
        Command::Sweep {
            grid,
            tol,
            out,
            seed,
        } => cmd_sweep(&grid, tol, out.as_deref(), seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
