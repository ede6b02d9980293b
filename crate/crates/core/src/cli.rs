//! Command-line front end. `run` parses arguments, dispatches to a
//! subcommand and maps failures onto documented exit codes.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::concentration::{
    bin_vorticity, default_local_radii, fit_decay_exponent, log_radii, max_levels,
    maximal_global_sheet, maximal_local, nearest_parameter_index, BinMode, MaximalCurve,
    DEFAULT_ND,
};
use crate::config::SimulationConfig;
use crate::error::Error;
use crate::evolve::{run_with, RunEvent};
use crate::fixtures::DiscVortex;
use crate::io::{
    invariant_row, read_snapshot, time_label, write_csv, write_snapshot_in, INVARIANT_COLUMNS,
};
use crate::sheet::{discretize, VortexSheet};
use crate::structure::{
    s2_direct, s2_identity_squared, theorem_bound, DirectQuadrature, SheetField, StructureReport,
    VelocitySource,
};
use crate::verify::{run_checks, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_DRIFT: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// A failure together with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::InvalidSheet(_) | Error::Config(_) => EXIT_CONFIG,
            Error::Io { .. } | Error::CorruptSnapshot { .. } => EXIT_IO,
            Error::BlowUp { .. } => EXIT_BLOWUP,
            Error::DriftExceeded { .. } => EXIT_DRIFT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "vortex-blob",
    version,
    about = "Vortex-blob sheet simulator and concentration analysis"
)]
pub struct Cli {
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, env = "VORTEX_BLOB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation from a JSON config, writing snapshots and invariants.csv.
    Simulate(ConfigArgs),
    /// Write only the t = 0 snapshot for a JSON config.
    Init(ConfigArgs),
    /// Global maximal function by dyadic square windows.
    AnalyzeGlobal(GlobalArgs),
    /// Vorticity in discs about tracked material points.
    AnalyzeLocal(LocalArgs),
    /// Second-order structure function, by quadrature and by the pair identity.
    Structure(StructureArgs),
    /// Check kernel properties and the averaging identities.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    pub config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    pub snapshot: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ND)]
    pub nd: usize,
    /// Number of dyadic levels; defaults to the most the grid allows.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    pub fit_lo: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub fit_hi: f64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    pub snapshot: PathBuf,
    /// Sheet parameters, e.g. `0.9pi,0.965pi,pi`.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub alphas: Vec<String>,
    /// Radii as `lo:hi:count` (log spaced) or a comma list; default 24 points in [1e-3, 1].
    #[arg(long)]
    pub radii: Option<String>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    /// Snapshot to analyse; omit when using `--fixture`.
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    pub snapshot: Option<PathBuf>,
    /// Built-in synthetic field instead of a snapshot.
    #[arg(long, value_parser = ["disc"])]
    pub fixture: Option<String>,
    /// Radii as `lo:hi:count` (log spaced) or a comma list.
    #[arg(long)]
    pub radii: String,
    #[arg(long, default_value_t = 128)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 512)]
    pub nd: usize,
    /// Inflation of the integration box; default `2r + 4ε`.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = VerifyOptions::default().ring_n_quad)]
    pub ring_n_quad: usize,
    #[arg(long, default_value_t = VerifyOptions::default().sigma_n_quad)]
    pub sigma_n_quad: usize,
    /// Multiplies the constant of Σ; a negative control for the checks.
    #[arg(long, hide = true)]
    pub tamper_sigma: Option<f64>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: Cli) -> CliResult {
    let threads = cli.threads;
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::usage(format!("cannot build thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command, threads))
        }
        _ => dispatch(cli.command, threads),
    }
}

fn dispatch(command: Command, threads: Option<usize>) -> CliResult {
    match command {
        Command::Simulate(a) => cmd_simulate(&a, threads),
        Command::Init(a) => cmd_init(&a),
        Command::AnalyzeGlobal(a) => cmd_analyze_global(&a),
        Command::AnalyzeLocal(a) => cmd_analyze_local(&a),
        Command::Structure(a) => cmd_structure(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

fn load_config(args: &ConfigArgs) -> CliResult<SimulationConfig> {
    let mut config = SimulationConfig::load(&args.config).map_err(|e| match e {
        // a config that cannot be read is still a config problem
        Error::Io { .. } => CliError {
            code: EXIT_CONFIG,
            message: e.to_string(),
        },
        other => other.into(),
    })?;
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

pub fn cmd_simulate(args: &ConfigArgs, threads: Option<usize>) -> CliResult {
    let mut config = load_config(args)?;
    if let Some(n) = threads {
        config.threads = n;
    }
    ensure_dir(&config.output_dir)?;
    let dir = config.output_dir.clone();
    let mut records = Vec::new();
    let mut snapshots = 0usize;
    let outcome = run_with(&config, |event| {
        match event {
            RunEvent::Snapshot(sheet) => {
                write_snapshot_in(&dir, sheet)?;
                snapshots += 1;
            }
            RunEvent::Invariants(r) => records.push(invariant_row(r)),
        }
        Ok(())
    });
    // the invariant history is written even when the run aborts
    write_csv(&dir.join("invariants.csv"), &INVARIANT_COLUMNS, &records)?;
    outcome?;
    let last = records
        .last()
        .expect("the initial record is always present");
    println!(
        "wrote {snapshots} snapshots to {}; final rel. drift H {:.3e}, W {:.3e}",
        dir.display(),
        last[4],
        last[5]
    );
    Ok(())
}

pub fn cmd_init(args: &ConfigArgs) -> CliResult {
    let config = load_config(args)?;
    let sheet = discretize(config.kind, config.n_nodes - 1, config.eps)?;
    ensure_dir(&config.output_dir)?;
    let path = write_snapshot_in(&config.output_dir, &sheet)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn curve_rows(curve: &MaximalCurve) -> Vec<[f64; 2]> {
    curve
        .radii
        .iter()
        .zip(&curve.values)
        .map(|(&r, &m)| [r, m])
        .collect()
}

pub fn cmd_analyze_global(args: &GlobalArgs) -> CliResult {
    let sheet = read_snapshot(&args.snapshot)?;
    let levels = args.levels.unwrap_or_else(|| max_levels(args.nd));
    let curve = maximal_global_sheet(&sheet, args.nd, levels)?;
    ensure_dir(&args.output_dir)?;
    let path = args
        .output_dir
        .join(format!("maxfn_t{}.csv", time_label(sheet.time())));
    write_csv(&path, &["r", "M_r"], curve_rows(&curve))?;
    println!("wrote {}", path.display());
    match fit_decay_exponent(&curve, args.fit_lo, args.fit_hi) {
        Ok(fit) => println!(
            "exponent {:.6} (prefactor {:.6}) over r in [{}, {}]",
            fit.exponent, fit.prefactor, args.fit_lo, args.fit_hi
        ),
        Err(e) => eprintln!("warning: no exponent fitted: {e}"),
    }
    Ok(())
}

/// Parses `0.9`, `pi`, `0.9pi`, `0.9*pi` or the same with `π`.
pub fn parse_alpha(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, times_pi) = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(rest) => (rest.trim_end_matches('*').trim(), true),
        None => (t, false),
    };
    let value = if number.is_empty() && times_pi {
        1.0
    } else {
        number
            .parse::<f64>()
            .map_err(|_| format!("cannot parse alpha {text:?}"))?
    };
    Ok(if times_pi { value * PI } else { value })
}

/// Parses `lo:hi:count` (log spaced) or a comma-separated list.
pub fn parse_radii(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("bad radius {:?}", parts[0]))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("bad radius {:?}", parts[1]))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("bad count {:?}", parts[2]))?;
        if !(lo > 0.0 && hi > lo) || count < 2 {
            return Err(format!(
                "radius range {text:?} needs 0 < lo < hi and count >= 2"
            ));
        }
        return Ok(log_radii(lo, hi, count));
    }
    let radii: Vec<f64> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad radius {s:?}"))
        })
        .collect::<Result<_, _>>()?;
    if radii.is_empty() {
        return Err("empty radius list".into());
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err("radii must be positive".into());
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err("radii must be strictly increasing".into());
    }
    Ok(radii)
}

pub fn cmd_analyze_local(args: &LocalArgs) -> CliResult {
    let alphas = args
        .alphas
        .iter()
        .filter(|a| !a.trim().is_empty())
        .map(|a| parse_alpha(a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::usage)?;
    if alphas.is_empty() {
        return Err(CliError::usage("at least one alpha is required"));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=PI).contains(*a)) {
        return Err(CliError::usage(format!("alpha {a} lies outside [0, pi]")));
    }
    let radii = match &args.radii {
        Some(text) => parse_radii(text).map_err(CliError::usage)?,
        None => default_local_radii(),
    };
    let sheet = read_snapshot(&args.snapshot)?;
    ensure_dir(&args.output_dir)?;
    let tag = time_label(sheet.time());
    let mut tracked = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let index = nearest_parameter_index(alpha, &sheet)?;
        let curve = maximal_local(&sheet, index, &radii)?;
        let path = args
            .output_dir
            .join(format!("local_t{tag}_a{:.4}pi.csv", alpha / PI));
        write_csv(&path, &["r", "local_mass"], curve_rows(&curve))?;
        println!("wrote {}", path.display());
        let p = sheet.positions()[index];
        tracked.push([alpha, index as f64, sheet.alphas()[index], p.x, p.y]);
    }
    let path = args.output_dir.join(format!("tracked_t{tag}.csv"));
    write_csv(&path, &["alpha", "index", "alpha_node", "x", "y"], &tracked)?;
    println!("wrote {}", path.display());
    Ok(())
}

const STRUCTURE_COLUMNS: [&str; 6] = [
    "r",
    "s2_direct",
    "s2_identity",
    "bound_rhs",
    "t",
    "s2_identity_sq_raw",
];

/// Lattice points per bin side used to smear the disc fixture.
const FIXTURE_OVERSAMPLING: usize = 4;

pub fn cmd_structure(args: &StructureArgs) -> CliResult {
    let radii = parse_radii(&args.radii).map_err(CliError::usage)?;
    let quad = DirectQuadrature {
        grid_n: args.grid_n,
        margin: args.margin,
        ..Default::default()
    };
    let r_max = *radii
        .last()
        .expect("parse_radii never returns an empty list");
    ensure_dir(&args.output_dir)?;

    let (rows, name) = if args.fixture.is_some() {
        let disc = DiscVortex::unit();
        let cloud = disc.to_sheet(FIXTURE_OVERSAMPLING * args.nd, 1e-3)?;
        let curve = disc.maximal_curve(&log_radii(r_max * 1e-6, r_max, 241));
        let rows = structure_rows(
            &disc,
            &cloud,
            &curve,
            disc.circulation().abs(),
            &radii,
            args.nd,
            &quad,
        )?;
        (rows, "structure_disc.csv".to_string())
    } else {
        let path = args
            .snapshot
            .as_ref()
            .expect("clap requires a snapshot without --fixture");
        let sheet = read_snapshot(path)?;
        let mut curve = maximal_global_sheet(&sheet, args.nd, max_levels(args.nd))?;
        // M_s never exceeds the total variation, so the curve may be closed off there
        let (_, half) = crate::concentration::bounding_square(sheet.positions())?;
        let top = (std::f64::consts::SQRT_2 * half).max(r_max);
        if top > *curve.radii.last().expect("at least one level") {
            curve.radii.push(top);
            curve.values.push(sheet.total_variation());
        }
        let field = SheetField::new(&sheet);
        let rows = structure_rows(
            &field,
            &sheet,
            &curve,
            sheet.total_variation(),
            &radii,
            args.nd,
            &quad,
        )?;
        (rows, format!("structure_t{}.csv", time_label(sheet.time())))
    };
    let path = args.output_dir.join(name);
    write_csv(&path, &STRUCTURE_COLUMNS, &rows)?;
    for r in &rows {
        println!(
            "r {:.4e}  direct {:.6e}  identity {:.6e}  bound {:.6e}",
            r[0], r[1], r[2], r[3]
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn structure_rows<S: VelocitySource>(
    source: &S,
    cloud: &VortexSheet,
    curve: &MaximalCurve,
    total_variation: f64,
    radii: &[f64],
    nd: usize,
    quad: &DirectQuadrature,
) -> CliResult<Vec<[f64; 6]>> {
    let bins = bin_vorticity(cloud, nd, BinMode::Signed)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let raw = s2_identity_squared(&bins, r)?;
        let bound = theorem_bound(curve, total_variation, r)?;
        if let Some(msg) = &bound.diagnostic {
            eprintln!("warning: r = {r}: {msg}");
        }
        let report = StructureReport {
            radius: r,
            s2_direct: s2_direct(source, r, quad)?,
            s2_identity: raw.max(0.0).sqrt(),
            bound_rhs: bound.value,
            time: cloud.time(),
        };
        rows.push([
            report.radius,
            report.s2_direct,
            report.s2_identity,
            report.bound_rhs,
            report.time,
            raw,
        ]);
    }
    Ok(rows)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let mut opts = VerifyOptions {
        ring_n_quad: args.ring_n_quad,
        sigma_n_quad: args.sigma_n_quad,
        ..Default::default()
    };
    if let Some(factor) = args.tamper_sigma {
        opts.sigma_constant *= factor;
    }
    let report = run_checks(&opts);
    println!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError {
            code: EXIT_VERIFY,
            message: format!("failed checks: {}", names.join(", ")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_forms() {
        assert_eq!(parse_alpha("pi").unwrap(), PI);
        assert_eq!(parse_alpha("π").unwrap(), PI);
        assert_eq!(parse_alpha("0.9pi").unwrap(), 0.9 * PI);
        assert_eq!(parse_alpha("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_alpha("1.25").unwrap(), 1.25);
        assert!(parse_alpha("pie").is_err());
        assert!(parse_alpha("").is_err());
    }

    #[test]
    fn radii_forms() {
        assert_eq!(parse_radii("0.25,0.5,1").unwrap(), vec![0.25, 0.5, 1.0]);
        let r = parse_radii("1e-3:1:4").unwrap();
        assert_eq!(r.len(), 4);
        assert!((r[1] - 1e-2).abs() < 1e-15);
        assert!(parse_radii("").is_err());
        assert!(parse_radii("0.5,0.25").is_err());
        assert!(parse_radii("0,1").is_err());
        assert!(parse_radii("1:0.1:5").is_err());
    }

    #[test]
    fn error_codes() {
        let code = |e: Error| CliError::from(e).code;
        assert_eq!(code(Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(code(Error::Domain("x".into())), EXIT_CONFIG);
        assert_eq!(
            code(Error::CorruptSnapshot {
                path: "p".into(),
                reason: "r".into()
            }),
            EXIT_IO
        );
        assert_eq!(code(Error::BlowUp { step: 1, time: 0.0 }), EXIT_BLOWUP);
        assert_eq!(
            code(Error::DriftExceeded {
                time: 0.0,
                drift: 1.0,
                tolerance: 0.1
            }),
            EXIT_DRIFT
        );
    }

    #[test]
    fn help_and_bad_usage() {
        assert_eq!(run(["vortex-blob", "--help"]), EXIT_OK);
        assert_eq!(run(["vortex-blob", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(
            run(["vortex-blob", "structure", "--fixture", "disc"]),
            EXIT_CONFIG
        );
    }
}
