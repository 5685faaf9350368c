use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bosegas::potentials::RadialPotential;
use bosegas::report::{render, run_scan, PartialConfig};
use bosegas::scattering::{solve_zero_energy, ScatterOptions};
use bosegas::thermo::{legendre_transform, GridFunction};
use bosegas::{Error, Result};

#[derive(Parser)]
#[command(name = "bosegas", version, about = "Energy bounds for the dilute Bose gas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep densities and tabulate lower and upper bounds.
    Scan(ScanArgs),
    /// Solve the zero-energy scattering equation and print its JSON record.
    Scatter {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        potential: String,
        /// Also write the (r, u, u') grid to this path.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Legendre transform of a two-column grid function on a uniform μ grid.
    Legendre {
        input: PathBuf,
        #[arg(long)]
        mu_min: f64,
        #[arg(long)]
        mu_max: f64,
        #[arg(long, default_value_t = 101)]
        mu_points: usize,
    },
}

#[derive(Args)]
struct ScanArgs {
    /// TOML file with the same keys; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    rho_min: Option<f64>,
    #[arg(long)]
    rho_max: Option<f64>,
    #[arg(long)]
    rho_points: Option<usize>,
    /// Logarithmic density spacing.
    #[arg(long)]
    rho_log: bool,
    /// Comma-separated subset of lower, upper_first, upper_second (or all).
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

fn scan(args: ScanArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => PartialConfig::from_file(p)?,
        None => PartialConfig::default(),
    };
    let cli = PartialConfig {
        dim: args.dim,
        potential: args.potential,
        rho_min: args.rho_min,
        rho_max: args.rho_max,
        rho_points: args.rho_points,
        rho_log: args.rho_log.then_some(true),
        bounds: args.bounds,
        out: args.out,
        format: args.format,
    };
    let cfg = cli.or(file).finish()?;
    let rows = run_scan(&cfg)?;
    for out in &cfg.outputs {
        let text = render(&rows, out.format)?;
        match &out.path {
            Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scan(args) => scan(args),
        Command::Scatter { dim, potential, grid } => {
            let pot: RadialPotential = potential.parse()?;
            let sol = solve_zero_energy(&pot, dim, ScatterOptions::default())?;
            if let Some(p) = grid {
                sol.write_grid(&p)?;
            }
            println!("{}", sol.json_record()?);
            Ok(())
        }
        Command::Legendre { input, mu_min, mu_max, mu_points } => {
            let g = GridFunction::from_file(&input)?;
            let k = mu_points.max(2);
            let mus: Vec<f64> = (0..k).map(|i| mu_min + (mu_max - mu_min) * i as f64 / (k - 1) as f64).collect();
            let conj = legendre_transform(&g, &mus)?;
            println!("{}", serde_json::to_string_pretty(&conj.to_json()).map_err(|e| Error::Parse(e.to_string()))?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
