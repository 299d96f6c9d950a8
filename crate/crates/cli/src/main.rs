use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use toric_core::config::{load_config, NormalizationChoice};
use toric_core::expr::compile_expression;
use toric_core::fd::{compare_with_fd, DEFAULT_STEP, DEFAULT_STEP_THIRD};
use toric_core::ode::{integrate_iv, IntegratorConfig, OdeForm, OdeParamsIV, OdeStateIV, Termination, TrajectoryIV};
use toric_core::verify::{run_verification, write_report, ReportFormat, Verdict};
use toric_core::Error;

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;

#[derive(Parser)]
#[command(name = "toric", version, about = "Curvature and Ricci-soliton checks for toric 4-metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    N0,
    N1,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Consistent,
    AsPrinted,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a family described by a TOML config and emit a residual report.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Override the grid, as NX,NY.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long, value_enum)]
        normalization: Option<Norm>,
    },
    /// Integrate the case-(iv) profile ODE and write the trajectory as CSV.
    SolveOdeIv {
        #[arg(long, allow_hyphen_values = true)]
        a0: f64,
        #[arg(long, allow_hyphen_values = true)]
        b0: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Initial data z,f,f',f''.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_init)]
        init: OdeStateIV,
        #[arg(long, allow_hyphen_values = true)]
        z_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "consistent")]
        form: Form,
        /// Local error target per unit of z.
        #[arg(long)]
        tol: Option<f64>,
        /// Use fixed steps of this size instead of adaptive ones.
        #[arg(long)]
        fixed_step: Option<f64>,
    },
    /// Compare the jet of an expression in x, y with finite differences.
    JetCheck {
        expression: String,
        /// Evaluation point x,y.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: (f64, f64),
        /// Step for first and second differences.
        #[arg(long)]
        h: Option<f64>,
    },
}

fn parse_numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v[..] {
        [nx, ny] => Ok((nx, ny)),
        _ => Err("expected NX,NY".into()),
    }
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_init(s: &str) -> Result<OdeStateIV, String> {
    let v = parse_numbers(s, 4)?;
    Ok(OdeStateIV {
        z: v[0],
        f: v[1],
        f1: v[2],
        f2: v[3],
    })
}

fn exit_for(e: &Error) -> u8 {
    if e.is_configuration() {
        EXIT_CONFIG
    } else {
        EXIT_CONSTRUCTION
    }
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn verify(
    config: &Path,
    format: Format,
    out: Option<&Path>,
    tol: Option<f64>,
    grid: Option<(usize, usize)>,
    normalization: Option<Norm>,
) -> Result<u8, Error> {
    let mut cfg = match load_config(config) {
        Err(Error::Io(e)) => {
            return Err(Error::Config {
                field: config.display().to_string(),
                line: None,
                msg: e.to_string(),
            })
        }
        other => other?,
    };
    if let Some(t) = tol {
        cfg.tolerance = t;
    }
    if let Some(g) = grid {
        cfg.grid = g;
    }
    if let Some(n) = normalization {
        cfg.normalization = match n {
            Norm::N0 => NormalizationChoice::N0,
            Norm::N1 => NormalizationChoice::N1,
            Norm::Auto => NormalizationChoice::Auto,
        };
    }
    cfg.validate()?;
    let report = run_verification(&cfg)?;
    let format = match format {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    let mut w = sink(out)?;
    write_report(&report, format, &mut w)?;
    w.flush()?;
    eprintln!("{}: {:?}", cfg, report.verdict);
    for e in report.equations.iter().filter(|e| e.checked) {
        eprintln!("  {:<24} max {:.3e}  mean {:.3e}", e.name, e.max, e.mean);
    }
    Ok(if report.verdict == Verdict::Pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn write_trajectory(t: &TrajectoryIV, out: Option<&Path>) -> Result<(), Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(out)?);
    w.write_record(["z", "f", "f1", "f2", "f3"])?;
    for n in &t.nodes {
        w.write_record([n.z, n.f, n.f1, n.f2, n.f3].map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve_ode(
    params: OdeParamsIV,
    init: OdeStateIV,
    z_end: f64,
    out: Option<&Path>,
    tol: Option<f64>,
    fixed_step: Option<f64>,
) -> Result<u8, Error> {
    let mut cfg = IntegratorConfig {
        fixed_step,
        ..Default::default()
    };
    if let Some(t) = tol {
        cfg.tol = t;
    }
    let traj = integrate_iv(&params, &init, z_end, &cfg)?;
    write_trajectory(&traj, out)?;
    let end = traj.end();
    eprintln!("{} nodes, end z = {}, f = {}: {:?}", traj.nodes.len(), end.z, end.f, traj.termination);
    Ok(match traj.termination {
        Termination::Completed => EXIT_PASS,
        _ => EXIT_CONSTRUCTION,
    })
}

fn jet_check(src: &str, point: (f64, f64), h: Option<f64>) -> Result<u8, Error> {
    let field = compile_expression(src)?;
    let h = h.unwrap_or(DEFAULT_STEP);
    let h3 = h * DEFAULT_STEP_THIRD / DEFAULT_STEP;
    let rows = compare_with_fd(&field, point, h, h3)?;
    println!("{:<6} {:>24} {:>24} {:>10}  ok", "entry", "jet", "finite diff", "rel err");
    for r in &rows {
        println!(
            "{:<6} {:>24.16e} {:>24.16e} {:>10.2e}  {}",
            r.name,
            r.ad,
            r.fd,
            r.rel_err,
            if r.ok { "yes" } else { "NO" }
        );
    }
    Ok(if rows.iter().all(|r| r.ok) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify {
            config,
            format,
            out,
            tol,
            grid,
            normalization,
        } => verify(&config, format, out.as_deref(), tol, grid, normalization),
        Command::SolveOdeIv {
            a0,
            b0,
            lambda,
            init,
            z_end,
            out,
            form,
            tol,
            fixed_step,
        } => {
            let form = match form {
                Form::Consistent => OdeForm::Consistent,
                Form::AsPrinted => OdeForm::AsPrinted,
            };
            let params = OdeParamsIV::new(a0, b0, lambda).with_form(form);
            solve_ode(params, init, z_end, out.as_deref(), tol, fixed_step)
        }
        Command::JetCheck { expression, point, h } => jet_check(&expression, point, h),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
