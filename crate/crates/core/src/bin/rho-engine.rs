use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rho_engine::demos::{run_demo, write_report, DemoConfig, DemoId, OutputFormat};

#[derive(Parser)]
#[command(name = "rho-engine", version, about = "Density-operator demonstrations with CSV/JSON reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one demo and write its report
    Run(RunArgs),
    /// List the demos
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Demo id, e.g. FreeParticle or well-dual
    demo: DemoId,
    #[arg(long)]
    grid_n: Option<usize>,
    /// Ring circumference
    #[arg(long)]
    length: Option<f64>,
    /// Well half-width
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long)]
    mode_n: Option<i64>,
    #[arg(long, env = "RHO_ENGINE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    members: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

impl From<RunArgs> for DemoConfig {
    fn from(a: RunArgs) -> Self {
        DemoConfig {
            demo: a.demo,
            grid_n: a.grid_n,
            length: a.length,
            a: a.a,
            mass: a.mass,
            hbar: a.hbar,
            mode_n: a.mode_n,
            seed: a.seed,
            members: a.members,
            dt: a.dt,
            t_final: a.t_final,
            format: a.format,
            out: a.out,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for d in DemoId::ALL {
                println!("{:<18}{}", d.name(), d.anchor());
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            let cfg = DemoConfig::from(args);
            let report = match run_demo(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = write_report(&report, cfg.format, cfg.out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.pass {
                eprintln!("{}: PASS", report.demo_id);
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: FAIL ({})", report.demo_id, report.failed_checks().join(", "));
                ExitCode::FAILURE
            }
        }
    }
}
