//! Command-line runner: identity suites over the ambient structure and
//! the example catalog, classification, reconstruction exports, and
//! isometry alignment.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or two
//! immersions are not congruent, 2 for malformed input.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use s3s3::{
    all_checks, ambient_checks, case1a_chart_records, classify, construct_example,
    example_checks, integrate_case1b, isometry_align, AnalysisConfig, ChartGrid,
    ExampleParams, FileImmersion, FrameStateS3, GeomError, GridSpec, Immersion, Quat,
    RunConfig, SampledImmersionFile, TorusGrid, TorusInit, VerificationReport,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "verify_cli",
    version,
    about = "Numerical verification and reconstruction for Lagrangian submanifolds of the nearly Kähler S³ × S³"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args)]
struct CommonOpts {
    /// Seed for the random sample draws
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Tolerance for pointwise operator identities
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_algebraic: f64,
    /// Tolerance for identities verified through first-order jets
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_jet: f64,
    /// Tolerance for finite-difference cross-checks
    #[arg(long, global = true, default_value_t = 1e-5)]
    tol_fd: f64,
    /// Finite-difference step
    #[arg(long, global = true, default_value_t = 1e-4)]
    fd_step: f64,
    /// Chart lattice `lo:hi:n`, either one spec for all axes or three
    /// comma-separated per-axis specs
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Report format: json, markdown, or csv
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Write the report or export here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an identity suite and emit a verification report
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Print the classification label of an example or a sampled file
    Classify {
        /// `example:<name>` or a path to a sampled-immersion JSON file
        source: String,
    },
    /// Integrate a structure system and export the sampled immersion
    Reconstruct {
        /// `case1a` (frame flow on S³) or `case1b` (torus march)
        system: String,
    },
    /// Align two sampled immersions by an ambient isometry
    Align {
        /// `example:<name>` or a sampled-immersion JSON file
        a: String,
        /// `example:<name>` or a sampled-immersion JSON file
        b: String,
    },
}

#[derive(Subcommand)]
enum VerifyTarget {
    /// Ambient operator identities at seeded random samples
    Ambient,
    /// One catalog example: structural residuals plus the frozen table
    Example { name: String },
    /// The ambient suite followed by every catalog example
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Well-formed input that fails a geometric gate is a check failure;
/// everything else that errors is malformed input.
fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<GeomError>() {
        Some(
            GeomError::IntegrationAborted(_)
            | GeomError::RankDeficient { .. }
            | GeomError::NotLagrangian { .. }
            | GeomError::AbNotCommuting { .. }
            | GeomError::RouteMismatch { .. }
            | GeomError::InconsistentAngles { .. },
        ) => EXIT_CHECK_FAILURE,
        _ => EXIT_BAD_INPUT,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = build_config(&cli.opts)?;
    match cli.command {
        Command::Verify { target } => run_verify(&target, cfg, &cli.opts),
        Command::Classify { source } => run_classify(&source, &cfg, &cli.opts),
        Command::Reconstruct { system } => run_reconstruct(&system, &cli.opts),
        Command::Align { a, b } => run_align(&a, &b, &cfg, &cli.opts),
    }
}

fn build_config(opts: &CommonOpts) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    cfg.seed = opts.seed;
    cfg.tol_algebraic = opts.tol_algebraic;
    cfg.tol_jet = opts.tol_jet;
    cfg.tol_fd = opts.tol_fd;
    cfg.fd_step = opts.fd_step;
    cfg.format = opts.format.parse()?;
    if let Some(spec) = &opts.grid {
        cfg.grid = parse_grid(spec)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_grid(spec: &str) -> Result<ChartGrid> {
    let axis = |s: &str| -> Result<(f64, f64, usize)> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            anyhow::bail!("grid axis spec {s:?} is not of the form lo:hi:n");
        }
        Ok((
            parts[0].parse().with_context(|| format!("bad grid bound {:?}", parts[0]))?,
            parts[1].parse().with_context(|| format!("bad grid bound {:?}", parts[1]))?,
            parts[2].parse().with_context(|| format!("bad grid count {:?}", parts[2]))?,
        ))
    };
    let specs: Vec<&str> = spec.split(',').collect();
    let axes: Vec<(f64, f64, usize)> = match specs.len() {
        1 => vec![axis(specs[0])?; 3],
        3 => specs.iter().map(|s| axis(s)).collect::<Result<_>>()?,
        n => anyhow::bail!("grid spec has {n} axes; expected 1 or 3"),
    };
    let mut grid = ChartGrid::default();
    for a in 0..3 {
        grid.min[a] = axes[a].0;
        grid.max[a] = axes[a].1;
        grid.counts[a] = axes[a].2;
    }
    grid.validate()?;
    Ok(grid)
}

fn emit(opts: &CommonOpts, content: &str) -> Result<()> {
    match &opts.out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run_verify(target: &VerifyTarget, cfg: RunConfig, opts: &CommonOpts) -> Result<u8> {
    let checks = match target {
        VerifyTarget::Ambient => ambient_checks(&cfg)?,
        VerifyTarget::Example { name } => example_checks(name, &cfg)?,
        VerifyTarget::All => all_checks(&cfg)?,
    };
    let report = VerificationReport::new(cfg, checks);
    emit(opts, &report.render(cfg.format)?)?;
    if let Some(fail) = report.first_failure() {
        let location = if fail.worst_location.is_empty() {
            String::new()
        } else {
            format!(" at {}", fail.worst_location)
        };
        eprintln!(
            "first failing check: {} (residual {:.3e} exceeds {:.1e}){location}",
            fail.id, fail.max_residual, fail.tol
        );
        return Ok(EXIT_CHECK_FAILURE);
    }
    Ok(0)
}

enum Source {
    Example(String),
    File(PathBuf),
}

fn parse_source(s: &str) -> Source {
    match s.strip_prefix("example:") {
        Some(name) => Source::Example(name.to_string()),
        None => Source::File(PathBuf::from(s)),
    }
}

fn analysis_config(opts: &CommonOpts, file_based: bool) -> AnalysisConfig {
    let mut cfg = if file_based { AnalysisConfig::file_tier() } else { AnalysisConfig::default() };
    cfg.fd_step = opts.fd_step;
    cfg
}

fn read_file(path: &Path) -> Result<SampledImmersionFile> {
    SampledImmersionFile::read_from(path)
        .with_context(|| format!("reading sampled immersion {}", path.display()))
}

fn run_classify(source: &str, cfg: &RunConfig, opts: &CommonOpts) -> Result<u8> {
    let label = match parse_source(source) {
        Source::Example(name) => {
            let ex = construct_example(&name, &ExampleParams::default())?;
            let an_cfg = analysis_config(opts, false);
            classify(&ex, &cfg.grid.points(), &an_cfg)?.label
        }
        Source::File(path) => {
            let imm = FileImmersion::new(read_file(&path)?)?;
            let center_idx = imm.grid().counts.map(|n| n / 2);
            let center = imm.grid().node_point(center_idx);
            let an_cfg = analysis_config(opts, true);
            classify(&imm, &[center], &an_cfg)?.label
        }
    };
    emit(opts, &format!("{label}\n"))?;
    Ok(0)
}

fn run_reconstruct(system: &str, opts: &CommonOpts) -> Result<u8> {
    let (grid, records) = match system {
        "case1a" => {
            let grid = GridSpec::centered([0.2, 0.3, 0.15], 5e-3, 5);
            let records = case1a_chart_records(&FrameStateS3::standard(), &grid, 1e-3)?;
            (grid, records)
        }
        "case1b" => {
            let march = TorusGrid::cube(0.3, 5e-3, 1)?;
            let state = integrate_case1b(&march, &TorusInit::default())?;
            let grid = GridSpec::centered([0.25, 0.1, 0.2], 5e-3, 5);
            let node = |axis: usize, i: usize| {
                ((grid.origin[axis] / 5e-3).round() as usize) + i
            };
            let mut records = Vec::with_capacity(grid.len());
            for i in 0..grid.counts[0] {
                for j in 0..grid.counts[1] {
                    for k in 0..grid.counts[2] {
                        records.push(state.factor_point(node(0, i), node(1, j), node(2, k)));
                    }
                }
            }
            (grid, records)
        }
        other => anyhow::bail!("unknown system {other:?}; expected case1a or case1b"),
    };
    let file = SampledImmersionFile::from_records(&grid, &records)?;
    emit(opts, &file.to_json()?)?;
    Ok(0)
}

/// Matched sample sets for alignment. A file fixes the chart nodes; an
/// example paired with a file is sampled at that file's nodes, and two
/// examples are sampled on the configured lattice.
fn alignment_samples(
    a: &Source,
    b: &Source,
    cfg: &RunConfig,
) -> Result<(Vec<(Quat<f64>, Quat<f64>)>, Vec<(Quat<f64>, Quat<f64>)>)> {
    let file_records = |f: &SampledImmersionFile| {
        f.records
            .iter()
            .map(|r| (Quat::from_array(r.p), Quat::from_array(r.q)))
            .collect::<Vec<_>>()
    };
    let sample_example = |name: &str, points: &[[f64; 3]]| -> Result<Vec<_>> {
        let ex = construct_example(name, &ExampleParams::default())?;
        Ok(points
            .iter()
            .map(|&x| {
                let jet = ex.jet(x);
                (jet.p.value(), jet.q.value())
            })
            .collect())
    };
    let nodes = |f: &SampledImmersionFile| -> Vec<[f64; 3]> {
        f.records.iter().map(|r| r.t).collect()
    };
    match (a, b) {
        (Source::File(pa), Source::File(pb)) => {
            let fa = read_file(pa)?;
            let fb = read_file(pb)?;
            if fa.grid != fb.grid {
                anyhow::bail!("the two files sample different chart grids");
            }
            Ok((file_records(&fa), file_records(&fb)))
        }
        (Source::File(pa), Source::Example(nb)) => {
            let fa = read_file(pa)?;
            let sb = sample_example(nb, &nodes(&fa))?;
            Ok((file_records(&fa), sb))
        }
        (Source::Example(na), Source::File(pb)) => {
            let fb = read_file(pb)?;
            let sa = sample_example(na, &nodes(&fb))?;
            Ok((sa, file_records(&fb)))
        }
        (Source::Example(na), Source::Example(nb)) => {
            let points = cfg.grid.points();
            Ok((sample_example(na, &points)?, sample_example(nb, &points)?))
        }
    }
}

fn run_align(a: &str, b: &str, cfg: &RunConfig, opts: &CommonOpts) -> Result<u8> {
    let (sa, sb) = alignment_samples(&parse_source(a), &parse_source(b), cfg)?;
    let result = isometry_align(&sa, &sb)?;
    let body = serde_json::json!({
        "a": result.isometry.a.as_array(),
        "b": result.isometry.b.as_array(),
        "c": result.isometry.c.as_array(),
        "deviation": result.deviation,
        "congruent": result.congruent,
    });
    emit(opts, &format!("{}\n", serde_json::to_string_pretty(&body)?))?;
    if !result.congruent {
        eprintln!("not congruent: deviation {:.3e}", result.deviation);
        return Ok(EXIT_CHECK_FAILURE);
    }
    Ok(0)
}
