//! `specnet`: build spectral networks, scan phases, check GMN, compute
//! non-abelianized monodromy and render documents.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use specnet_core::io::{
    canonical_json, emit_network, parse_config, parse_network, render_svg, IoError, MonodromyRecord, NetworkDocument,
    RunConfig, SolverMode,
};
use specnet_core::network::ScanConfig;
use specnet_core::novikov::{LocalSystemSpec, LoopSpec};
use specnet_core::{
    build_network, find_unobstructed_theta, gmn_check, nonabelianize, solve_factors, Coeff, NetworkError, NetworkState,
    NovikovError, SpinFrame, TransportConfig, C64,
};

#[derive(Debug, Parser)]
#[command(name = "specnet", version, about = "Spectral networks and non-abelianization")]
struct Cli {
    /// More log output on standard error (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the network and emit its document.
    Build(RunArgs),
    /// Search for an unobstructed phase near --theta.
    ScanTheta {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Report the GMN conditions for the input.
    CheckGmn {
        #[arg(long)]
        input: PathBuf,
    },
    /// Build, solve the wall factors and transport around loops.
    Nonabelianize {
        #[command(flatten)]
        run: RunArgs,
        /// `circle:cx,cy,r` or `poly:x,y;x,y;...`, separated by `|`.
        #[arg(long)]
        loops: Option<String>,
        /// Basepoint `x,y`; defaults to the first point of the first loop.
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Render a network document as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    mass_cutoff: Option<f64>,
    #[arg(long)]
    truncation: Option<f64>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    seed_radius: Option<f64>,
    #[arg(long)]
    domain_radius: Option<f64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
    #[error("{0}")]
    Usage(String),
}

/// Successful outcomes; `Obstructed` maps to exit code 2.
enum Outcome {
    Done,
    Obstructed,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = parse_config(&read(&args.input)?)?;
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    if let Some(v) = args.mass_cutoff {
        cfg.mass_cutoff = v;
    }
    if let Some(v) = args.truncation {
        cfg.truncation = Some(v);
    }
    if let Some(v) = args.max_steps {
        cfg.max_steps = v;
    }
    if let Some(v) = args.seed_radius {
        cfg.seed_radius = v;
    }
    if let Some(v) = args.domain_radius {
        cfg.domain_radius = v;
    }
    if let Some(p) = &args.out_json {
        cfg.out_json = Some(p.display().to_string());
    }
    if let Some(p) = &args.out_svg {
        cfg.out_svg = Some(p.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &RunConfig, json: &str) -> Result<(), CliError> {
    write_or_print(cfg.out_json.as_deref().map(Path::new), json)?;
    if let Some(svg) = &cfg.out_svg {
        let doc = parse_network(json)?;
        write_or_print(Some(Path::new(svg)), &render_svg(&doc))?;
    }
    Ok(())
}

fn report_obstructions(state: &NetworkState) {
    let o = &state.obstructions;
    for t in &o.closed_trees {
        warn!(
            "closed tree {} of mass {:.9} between turning points {:?}",
            t.tree, t.mass, t.turning_points
        );
    }
    for c in &o.cyclic_collisions {
        warn!("cyclic collision {} of mass {:.9}", c.collision, c.mass);
    }
    warn!(
        "obstructed at theta = {}; suggested step {:.3e}",
        state.theta, o.suggested_theta_step
    );
}

/// Builds, turning an obstruction at the start into a report.
fn build(cfg: &RunConfig) -> Result<NetworkState, CliError> {
    let data = cfg.spectral_data()?;
    match build_network(&data, cfg.network_config()) {
        Ok(s) => Ok(s),
        Err(NetworkError::ObstructedAtStart(s)) => Ok(*s),
        Err(e) => Err(e.into()),
    }
}

fn with_factors<K: Coeff>(
    cfg: &RunConfig,
    state: &NetworkState,
    loops: &[LoopSpec],
    basepoint: Option<C64>,
) -> Result<String, CliError> {
    let tc = TransportConfig::default();
    let c = cfg.truncation();
    let frame = SpinFrame::new(state, &tc)?;
    let factors = solve_factors::<K>(state, &frame, c, &tc)?;
    let records = if loops.is_empty() {
        None
    } else {
        let b = basepoint.unwrap_or_else(|| loops[0].start());
        let ms = nonabelianize(state, &frame, &factors, &LocalSystemSpec::default(), b, loops, c, &tc)?;
        Some(
            loops
                .iter()
                .zip(&ms)
                .map(|(l, m)| MonodromyRecord::new(l, b, m))
                .collect(),
        )
    };
    Ok(emit_network(state, Some(&factors), records))
}

fn document(
    cfg: &RunConfig,
    state: &NetworkState,
    loops: &[LoopSpec],
    basepoint: Option<C64>,
) -> Result<String, CliError> {
    match cfg.solver {
        SolverMode::Rational => with_factors::<BigRational>(cfg, state, loops, basepoint),
        SolverMode::Complex => with_factors::<Complex64>(cfg, state, loops, basepoint),
    }
}

fn run_build(args: &RunArgs) -> Result<Outcome, CliError> {
    let cfg = load(args)?;
    let state = build(&cfg)?;
    info!("{} walls, {} collisions", state.walls.len(), state.collisions.len());
    if !state.obstructions.is_empty() {
        report_obstructions(&state);
        emit(&cfg, &emit_network::<BigRational>(&state, None, None))?;
        return Ok(Outcome::Obstructed);
    }
    let json = match document(&cfg, &state, &[], None) {
        Ok(j) => j,
        Err(e) => {
            warn!("wall factors not attached: {e}");
            emit_network::<BigRational>(&state, None, None)
        }
    };
    emit(&cfg, &json)?;
    Ok(Outcome::Done)
}

fn run_scan(args: &RunArgs, epsilon: f64) -> Result<Outcome, CliError> {
    let cfg = load(args)?;
    let data = cfg.spectral_data()?;
    match find_unobstructed_theta(&data, cfg.theta, epsilon, cfg.network_config(), ScanConfig::default()) {
        Ok((theta, probes)) => {
            for p in &probes {
                info!("probe theta {}: obstructed = {}", p.theta, p.obstructed);
            }
            println!("{theta}");
            Ok(Outcome::Done)
        }
        Err(NetworkError::NotFound { probes }) => {
            warn!("all {} probes obstructed", probes.len());
            Ok(Outcome::Obstructed)
        }
        Err(e) => Err(e.into()),
    }
}

fn run_gmn(input: &Path) -> Result<Outcome, CliError> {
    let cfg = parse_config(&read(input)?)?;
    let report = gmn_check(&cfg.spectral_data()?);
    let value = serde_json::to_value(&report).expect("reports serialize");
    print!("{}", canonical_json(&value));
    if report.verdict {
        Ok(Outcome::Done)
    } else {
        Err(CliError::Usage("input fails the GMN check".into()))
    }
}

fn parse_point(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Usage(format!("basepoint must be x,y: {s:?}"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

fn run_nonabelianize(args: &RunArgs, loops: Option<&str>, basepoint: Option<&str>) -> Result<Outcome, CliError> {
    let mut cfg = load(args)?;
    if let Some(l) = loops {
        cfg.loops = Some(l.to_string());
        cfg.validate()?;
    }
    let specs = cfg.loop_specs()?;
    if specs.is_empty() {
        return Err(CliError::Usage(
            "no loops given (--loops or \"loops\" in the config)".into(),
        ));
    }
    let base = match basepoint {
        Some(b) => Some(parse_point(b)?),
        None => cfg.basepoint.map(|b| b.value()),
    };
    let state = build(&cfg)?;
    if !state.obstructions.is_empty() {
        report_obstructions(&state);
        emit(&cfg, &emit_network::<BigRational>(&state, None, None))?;
        return Ok(Outcome::Obstructed);
    }
    emit(&cfg, &document(&cfg, &state, &specs, base)?)?;
    Ok(Outcome::Done)
}

fn run_render(input: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let doc: NetworkDocument = parse_network(&read(input)?)?;
    write_or_print(out, &render_svg(&doc))?;
    Ok(Outcome::Done)
}

fn init_threads() {
    let Ok(v) = std::env::var("SPECNET_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring SPECNET_THREADS={v:?}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    init_threads();
    let result = match &cli.command {
        Command::Build(a) => run_build(a),
        Command::ScanTheta { run, epsilon } => run_scan(run, *epsilon),
        Command::CheckGmn { input } => run_gmn(input),
        Command::Nonabelianize { run, loops, basepoint } => {
            run_nonabelianize(run, loops.as_deref(), basepoint.as_deref())
        }
        Command::Render { input, out_svg } => run_render(input, out_svg.as_deref()),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Obstructed) => ExitCode::from(2),
        Err(e) => {
            error!("{e}");
            ExitCode::from(1)
        }
    }
}
