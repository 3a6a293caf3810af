//! `heis`: apply transforms to CSV signals, generate test signals and run
//! the verification suites.

use clap::{Args, Parser, Subcommand};
use heis_core::config::RunConfig;
use heis_core::grids::{Field, SampledLine, TorusField};
use heis_core::io::{read_path, write_path, AnyField};
use heis_core::ladders::{hermite_state, vacuum_gaussian, vacuum_theta_with};
use heis_core::transforms::*;
use heis_core::verify::suites::{run_suite, Suite};
use heis_core::Error;
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_GUARD: u8 = 4;

#[derive(Parser)]
#[command(name = "heis", version, about = "Heisenberg group transforms on sampled signals")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

/// Configuration sources, lowest precedence first: defaults, `HEIS_CONFIG`,
/// `--config`, individual flags.
#[derive(Args)]
struct ConfigArgs {
    /// JSON config file (defaults to $HEIS_CONFIG)
    #[arg(long, global = true, allow_hyphen_values = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    hbar: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    line_l: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    line_n: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    plane_lx: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    plane_ly: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    plane_nx: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    plane_ny: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    torus_nu: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    torus_nv: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    ntrunc: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta_eps: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    seed: Option<String>,
}

#[derive(Args)]
struct Io {
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct PeelIo {
    input: PathBuf,
    output: PathBuf,
    /// Apply the inverse peeling
    #[arg(long)]
    inverse: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Line → plane, Gaussian window
    Prefsb(Io),
    /// Line → plane, peeled (analytic) picture
    Fsb(Io),
    /// Line → torus
    Zak(Io),
    /// Torus → line
    Izak(Io),
    /// Torus → plane, theta window
    Pretheta(Io),
    /// Plane → torus, normalised inverse of `pretheta`
    Ipretheta(Io),
    /// Line → line, momentum picture
    Fourier(Io),
    /// Line → line, normalised inverse of `fourier`
    Ifourier(Io),
    PeelFsb(PeelIo),
    PeelSchrodinger(PeelIo),
    PeelLattice(PeelIo),
    /// Run a verification suite and report the defects
    Verify {
        /// group, representations, ladders, zak, fsb, theta, peeling, contravariant or all
        suite: String,
        /// Write the reports as a JSON array
        #[arg(long)]
        report: Option<PathBuf>,
        /// Tolerance override `name=value`, by check name or class
        #[arg(long = "tol")]
        tol: Vec<String>,
    },
    /// Write a test signal: gaussian, hermite:<n>, indicator or theta-vacuum
    Gen { signal: String, output: PathBuf },
}

/// An error together with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn config(e: Error) -> Self {
        Self::new(EXIT_CONFIG, e.to_string())
    }

    fn input(e: Error) -> Self {
        Self::new(EXIT_MALFORMED, e.to_string())
    }

    /// Errors raised while computing.
    fn compute(e: Error) -> Self {
        let code = match &e {
            e if e.is_numerical_guard() => EXIT_GUARD,
            Error::InvalidParameter(_) | Error::OrderTooLarge(_) => EXIT_CONFIG,
            _ => EXIT_MALFORMED,
        };
        Self::new(code, e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn load_config(args: &ConfigArgs) -> Outcome<RunConfig> {
    let path = args.config.clone().or_else(|| std::env::var_os("HEIS_CONFIG").map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => RunConfig::from_path(&p).map_err(Failure::config)?,
        None => RunConfig::default(),
    };
    let flags = [
        ("hbar", &args.hbar),
        ("kappa", &args.kappa),
        ("m", &args.m),
        ("line_l", &args.line_l),
        ("line_n", &args.line_n),
        ("plane_lx", &args.plane_lx),
        ("plane_ly", &args.plane_ly),
        ("plane_nx", &args.plane_nx),
        ("plane_ny", &args.plane_ny),
        ("torus_nu", &args.torus_nu),
        ("torus_nv", &args.torus_nv),
        ("ntrunc", &args.ntrunc),
        ("theta_eps", &args.theta_eps),
        ("seed", &args.seed),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(Failure::config)?;
        }
    }
    cfg.validate().map_err(Failure::config)?;
    Ok(cfg)
}

fn read_line(path: &Path) -> Outcome<SampledLine> {
    match read_path(path).map_err(Failure::input)? {
        AnyField::Line(f) => Ok(f),
        other => Err(Failure::new(EXIT_MALFORMED, format!("expected a line CSV (t,re,im), got a {} field", other.kind()))),
    }
}

fn read_plane(path: &Path) -> Outcome<heis_core::grids::PlaneField> {
    match read_path(path).map_err(Failure::input)? {
        AnyField::Plane(f) => Ok(f),
        other => Err(Failure::new(EXIT_MALFORMED, format!("expected a plane CSV (x,y,re,im), got a {} field", other.kind()))),
    }
}

/// Reads a torus; its `# m=` header sets `m` unless `--m` says otherwise.
fn read_torus(path: &Path, cfg: &mut RunConfig, explicit_m: bool) -> Outcome<TorusField> {
    match read_path(path).map_err(Failure::input)? {
        AnyField::Torus(f) => {
            if explicit_m && f.m != cfg.m {
                return Err(Failure::input(Error::IndexMismatch { field: f.m, params: cfg.m }));
            }
            cfg.m = f.m;
            Ok(f)
        }
        other => Err(Failure::new(EXIT_MALFORMED, format!("expected a torus CSV (u,v,re,im), got a {} field", other.kind()))),
    }
}

fn direction(inverse: bool) -> PeelDirection {
    if inverse {
        PeelDirection::Inverse
    } else {
        PeelDirection::Forward
    }
}

fn transform(command: &Command, mut cfg: RunConfig, explicit_m: bool) -> Outcome<(AnyField, PathBuf)> {
    let c = Failure::compute;
    let p = cfg.repr().map_err(Failure::config)?;
    let line = cfg.line_grid().map_err(Failure::config)?;
    let (gx, gy) = cfg.plane_grids().map_err(Failure::config)?;
    let (nu, nv) = (cfg.torus_nu, cfg.torus_nv);
    let out = match command {
        Command::Prefsb(io) => {
            let f = read_line(&io.input)?;
            (AnyField::Plane(covariant_pre_fsb(&p, &FiducialSpec::Gaussian, &f, gx, gy).map_err(c)?), io)
        }
        Command::Fsb(io) => {
            let f = read_line(&io.input)?;
            (AnyField::Plane(fsb_transform(&p, &f, gx, gy).map_err(c)?), io)
        }
        Command::Zak(io) => {
            let f = read_line(&io.input)?;
            let lp = cfg.lattice().map_err(Failure::config)?;
            (AnyField::Torus(covariant_zak(&lp, &f, nu, nv, cfg.ntrunc).map_err(c)?), io)
        }
        Command::Izak(io) => {
            let g = read_torus(&io.input, &mut cfg, explicit_m)?;
            let lp = cfg.lattice().map_err(Failure::config)?;
            (AnyField::Line(contravariant_zak_inverse(&lp, &g, line).map_err(c)?), io)
        }
        Command::Pretheta(io) => {
            let g = read_torus(&io.input, &mut cfg, explicit_m)?;
            let lp = cfg.lattice().map_err(Failure::config)?;
            (AnyField::Plane(covariant_pre_theta_eps(&lp, &g, gx, gy, cfg.theta_eps).map_err(c)?), io)
        }
        Command::Ipretheta(io) => {
            let f = read_plane(&io.input)?;
            let lp = cfg.lattice().map_err(Failure::config)?;
            let trunc = cfg.theta_truncation().map_err(Failure::config)?;
            // M∘W = (‖Φ‖²/m)·I on the chosen torus grid
            let norm2 = vacuum_theta_with(&lp, nu, nv, trunc).map_err(c)?.norm().powi(2);
            let back = contravariant_pre_theta_inverse_eps(&lp, &ReconstructionSpec::ThetaVacuum, &f, nu, nv, cfg.theta_eps)
                .map_err(c)?
                .scale(Complex64::new(lp.m as f64 / norm2, 0.0));
            (AnyField::Torus(back), io)
        }
        Command::Fourier(io) => {
            let f = read_line(&io.input)?;
            (AnyField::Line(covariant_fourier_inverse(&p, &f, f.grid).map_err(c)?), io)
        }
        Command::Ifourier(io) => {
            let f = read_line(&io.input)?;
            let back = contravariant_fourier(&p, &f, f.grid).map_err(c)?.scale(Complex64::new(p.hbar, 0.0));
            (AnyField::Line(back), io)
        }
        Command::PeelFsb(io) => {
            let f = read_plane(&io.input)?;
            let out = peel_fsb(&p, &f, direction(io.inverse)).map_err(c)?;
            return Ok((AnyField::Plane(out), io.output.clone()));
        }
        Command::PeelSchrodinger(io) => {
            let f = read_line(&io.input)?;
            let out = peel_schrodinger(&p, &f, direction(io.inverse)).map_err(c)?;
            return Ok((AnyField::Line(out), io.output.clone()));
        }
        Command::PeelLattice(io) => {
            let g = read_torus(&io.input, &mut cfg, explicit_m)?;
            let lp = cfg.lattice().map_err(Failure::config)?;
            let out = peel_lattice(&lp, &g, direction(io.inverse)).map_err(c)?;
            return Ok((AnyField::Torus(out), io.output.clone()));
        }
        Command::Verify { .. } | Command::Gen { .. } => unreachable!("not a transform"),
    };
    Ok((out.0, out.1.output.clone()))
}

fn verify(suite: &str, report: Option<&Path>, tol: &[String], mut cfg: RunConfig) -> Outcome<bool> {
    let suite: Suite = suite.parse().map_err(Failure::config)?;
    for item in tol {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::new(EXIT_CONFIG, format!("--tol expects name=value, got {item:?}")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Failure::new(EXIT_CONFIG, format!("cannot parse tolerance {item:?}")))?;
        cfg.tolerances.insert(key.to_string(), value);
    }
    cfg.validate().map_err(Failure::config)?;
    let reports = run_suite(suite, &cfg).map_err(Failure::compute)?;
    for r in &reports {
        println!("{} {:<55} {:.3e} (tol {:.1e})", if r.pass { "PASS" } else { "FAIL" }, r.name, r.value, r.tolerance);
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} failed", reports.len(), failed);
    if let Some(path) = report {
        let json = serde_json::to_string_pretty(&reports).expect("reports serialise");
        std::fs::write(path, json).map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    }
    Ok(failed == 0)
}

fn generate(signal: &str, output: &Path, cfg: &RunConfig) -> Outcome<()> {
    let c = Failure::compute;
    let p = cfg.repr().map_err(Failure::config)?;
    let line = cfg.line_grid().map_err(Failure::config)?;
    let field = match signal.split_once(':') {
        Some(("hermite", n)) => {
            let n: usize = n.parse().map_err(|_| Failure::new(EXIT_CONFIG, format!("bad Hermite order {n:?}")))?;
            AnyField::Line(hermite_state(&p, n, line).map_err(c)?)
        }
        None if signal == "gaussian" => AnyField::Line(vacuum_gaussian(&p, line)),
        None if signal == "indicator" => AnyField::Line(
            SampledLine::sample_real(line, |t| if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 }).map_err(c)?,
        ),
        None if signal == "theta-vacuum" => {
            let lp = cfg.lattice().map_err(Failure::config)?;
            let trunc = cfg.theta_truncation().map_err(Failure::config)?;
            AnyField::Torus(vacuum_theta_with(&lp, cfg.torus_nu, cfg.torus_nv, trunc).map_err(c)?)
        }
        _ => return Err(Failure::new(EXIT_CONFIG, format!("unknown signal {signal:?}"))),
    };
    write_path(&field, output).map_err(|e| Failure::new(EXIT_MALFORMED, e.to_string()))
}

fn run(cli: Cli) -> Outcome<bool> {
    let cfg = load_config(&cli.config)?;
    match &cli.command {
        Command::Verify { suite, report, tol } => verify(suite, report.as_deref(), tol, cfg),
        Command::Gen { signal, output } => generate(signal, output, &cfg).map(|_| true),
        other => {
            let (field, output) = transform(other, cfg, cli.config.m.is_some())?;
            write_path(&field, &output).map_err(|e| Failure::new(EXIT_MALFORMED, e.to_string()))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(f) => {
            eprintln!("heis: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
