use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entroflow::report::demo::{demo_times, ou_demo, ou_demo_files, HeatDemo};
use entroflow::report::{init_thread_pool, run_stages, scenario, ExitStatus, ScenarioConfig, Stages};

#[derive(Parser)]
#[command(name = "entroflow", version, about = "Entropy decay, curvature and log-Sobolev checks for linear Fokker-Planck flows")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: curvature, bounds, orbit pair and inequality suites.
    Run(ScenarioArgs),
    /// Estimate the curvature profile and verify the criterion.
    Curvature(ScenarioArgs),
    /// Tabulate c(s,t), d(t) and the decay envelope.
    Bounds(ScenarioArgs),
    /// Inequality suites only.
    Check(ScenarioArgs),
    /// Ornstein-Uhlenbeck relative entropy alpha(t) between two point starts.
    OuDemo {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Write CSV files for all three regimes here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heat-flow intermediate asymptotics from two bumps.
    HeatDemo {
        /// Write asymptotics.csv and summary.toml here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ScenarioArgs {
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn fail(status: ExitStatus, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("entroflow: {msg}");
    exit(status)
}

fn scenario_command(args: &ScenarioArgs, stages: Stages) -> ExitCode {
    let config = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(ExitStatus::BadConfig, e),
    };
    let dir = scenario::output_dir(&config, args.out.as_deref());
    let outcome = run_stages(&config, &dir, stages);
    report(&outcome.summary, &dir);
    exit(outcome.status)
}

fn report(summary: &scenario::Summary, dir: &Path) {
    for c in &summary.checks {
        println!("{:<28} {}", c.name, if c.pass { "pass" } else { "FAIL" });
    }
    if let Some(e) = &summary.error {
        eprintln!("entroflow: {e}");
    }
    println!("{} -> {} ({})", summary.scenario, dir.display(), summary.status);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        return fail(ExitStatus::BadConfig, e);
    }
    match cli.command {
        Command::Run(a) => scenario_command(&a, Stages::ALL),
        Command::Curvature(a) => scenario_command(&a, Stages::CURVATURE),
        Command::Bounds(a) => scenario_command(&a, Stages::BOUNDS),
        Command::Check(a) => scenario_command(&a, Stages::CHECK),
        Command::OuDemo { lambda, x, y, t_max, points, out } => {
            let times = match demo_times(t_max, points) {
                Ok(t) => t,
                Err(e) => return fail(ExitStatus::BadConfig, e),
            };
            let result = match out {
                Some(dir) => ou_demo_files(&dir, lambda, x, y, &times),
                None => {
                    let stdout = io::stdout().lock();
                    let mut w = io::BufWriter::new(stdout);
                    ou_demo(&mut w, lambda, x, y, &times).and_then(|_| w.flush().map_err(Into::into))
                }
            };
            match result {
                Ok(()) => exit(ExitStatus::Pass),
                Err(e) => fail(ExitStatus::from_error(&e), e),
            }
        }
        Command::HeatDemo { out } => {
            let demo = match HeatDemo::run() {
                Ok(d) => d,
                Err(e) => return fail(ExitStatus::from_error(&e), e),
            };
            let written = match &out {
                Some(dir) => demo.write_files(dir),
                None => demo.report.write_csv(io::stdout().lock()),
            };
            if let Err(e) = written {
                return fail(ExitStatus::BadConfig, e);
            }
            for c in demo.checks() {
                eprintln!("{:<28} {}", c.name, if c.pass { "pass" } else { "FAIL" });
            }
            exit(demo.status())
        }
    }
}
