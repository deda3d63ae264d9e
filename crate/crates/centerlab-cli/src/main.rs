//! `centerlab`: center-focus analysis of planar polynomial systems.

use std::io::{self, Read, Write};
use std::process::ExitCode;

use centerlab::perturb::{ConditionMode, Orientation};
use centerlab_cli::commands::*;
use centerlab_cli::report;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "centerlab", version, about = "Center conditions, first integrals and return maps for planar polynomial systems")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Leave wall-clock timings out of the report (makes the output reproducible).
    #[arg(long, global = true)]
    no_timings: bool,
    /// Bind a parameter to a rational value, e.g. `--set a=3/2`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_set, global = true)]
    set: Vec<(String, centerlab::exactalg::Q)>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Cw,
    Ccw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    AllOrders,
    FirstOrder,
}

#[derive(Args)]
struct FileArg {
    /// System file (`xdot = ...; ydot = ...`), or `-` for stdin.
    file: String,
}

#[derive(Args)]
struct ReturnOpts {
    /// Starting distances on the transversal, comma separated.
    #[arg(long, value_delimiter = ',')]
    x0: Vec<f64>,
    /// `x`, `y`, or a ray angle in radians.
    #[arg(long, default_value = "x", value_parser = parse_transversal, allow_hyphen_values = true)]
    transversal: centerlab::numeric::Transversal,
}

#[derive(Subcommand)]
enum Cmd {
    /// Liapunov constants and center conditions.
    Liapunov {
        #[command(flatten)]
        file: FileArg,
        /// none, minimal, general:D, nilpotent, degenerate or hamiltonian.
        #[arg(long, default_value = "none", value_parser = parse_perturb)]
        perturb: PerturbChoice,
        #[arg(long, value_enum, default_value_t = OrientationArg::Cw)]
        orientation: OrientationArg,
        #[arg(long, value_enum, default_value_t = ModeArg::AllOrders)]
        mode: ModeArg,
        /// Highest even degree of the formal integral.
        #[arg(long, default_value_t = 8)]
        max_degree: u32,
    },
    /// Check a candidate first integral of Darboux type.
    Verify {
        #[command(flatten)]
        file: FileArg,
        /// e.g. `(x^2+y^2)/2 + x^3`, `(1+x)^(a) * exp((y)/(x))`.
        #[arg(long)]
        integral: String,
    },
    /// Hamiltonian test and reversibility with respect to a line through the origin.
    Reversible {
        #[command(flatten)]
        file: FileArg,
    },
    /// Center test for quasi-homogeneous systems.
    Qhcenter {
        #[command(flatten)]
        file: FileArg,
        /// Weights `p,q`; by default the smallest signature found.
        #[arg(long, value_parser = parse_signature)]
        signature: Option<(u32, u32)>,
        /// `name=start:stop:step`.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
    },
    /// Numeric Poincaré return map.
    Returnmap {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        opts: ReturnOpts,
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
    },
    /// Everything that applies to a fully numeric system.
    Classify {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        opts: ReturnOpts,
    },
}

fn parse_signature(arg: &str) -> Result<(u32, u32), String> {
    let (p, q) = arg.split_once(',').ok_or("expected p,q")?;
    let p = p.trim().parse().map_err(|_| format!("bad weight '{p}'"))?;
    let q = q.trim().parse().map_err(|_| format!("bad weight '{q}'"))?;
    Ok((p, q))
}

fn read_input(file: &str) -> Res<String> {
    let mut text = String::new();
    if file == "-" {
        io::stdin().read_to_string(&mut text).map_err(|e| Failure::other(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(file).map_err(|e| Failure::other(format!("{file}: {e}")))?;
    }
    Ok(text)
}

fn run(cli: Cli) -> Res<report::AnalysisReport> {
    let file = match &cli.cmd {
        Cmd::Liapunov { file, .. } | Cmd::Verify { file, .. } | Cmd::Reversible { file } | Cmd::Qhcenter { file, .. } | Cmd::Returnmap { file, .. } | Cmd::Classify { file, .. } => &file.file,
    };
    let c = Common { file: file.clone(), text: read_input(file)?, set: cli.set.clone(), timings: !cli.no_timings };
    match &cli.cmd {
        Cmd::Liapunov { perturb, orientation, mode, max_degree, .. } => cmd_liapunov(
            &c,
            &LiapunovArgs {
                perturb: *perturb,
                orientation: match orientation {
                    OrientationArg::Cw => Orientation::Clockwise,
                    OrientationArg::Ccw => Orientation::CounterClockwise,
                },
                mode: match mode {
                    ModeArg::AllOrders => ConditionMode::AllOrders,
                    ModeArg::FirstOrder => ConditionMode::FirstOrder,
                },
                max_degree: *max_degree,
            },
        ),
        Cmd::Verify { integral, .. } => cmd_verify(&c, integral),
        Cmd::Reversible { .. } => cmd_reversible(&c),
        Cmd::Qhcenter { signature, sweep, .. } => cmd_qhcenter(&c, *signature, sweep.as_ref()),
        Cmd::Returnmap { opts, sweep, .. } => cmd_returnmap(&c, &ReturnArgs { x0: opts.x0.clone(), transversal: opts.transversal }, sweep.as_ref()),
        Cmd::Classify { opts, .. } => cmd_classify(&c, &ReturnArgs { x0: opts.x0.clone(), transversal: opts.transversal }),
    }
}

/// Runs `f` on a pool of `CENTERLAB_THREADS` workers when the variable is set.
#[cfg(feature = "parallel")]
fn with_threads<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match std::env::var("CENTERLAB_THREADS") {
        Ok(n) => {
            let n: usize = n.trim().parse().map_err(|_| Failure::other(format!("CENTERLAB_THREADS must be a positive integer, got '{n}'")))?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Failure::other(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    Ok(f())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_OTHER as u8 } else { 0 });
        }
    };
    let format = cli.format;
    let out = with_threads(|| run(cli)).and_then(|r| r);
    match out {
        Ok(r) => {
            let v = serde_json::to_value(&r).expect("report serializes");
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&v).expect("report serializes") + "\n",
                Format::Text => report::render_text(&v),
            };
            let mut stdout = io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_OTHER as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
