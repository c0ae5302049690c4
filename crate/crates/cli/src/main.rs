use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbp_hodge::{Grid1D, ProjectionOrder, Solver};
use sbp_hodge_cli::config::{break_operator_from_env, ConfigFile, ExperimentConfig};
use sbp_hodge_cli::experiments::{convergence, mhd, oscillations, remainder, theorems, write_json};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "sbp-hodge",
    version,
    about = "Discrete Helmholtz Hodge decomposition experiments"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key-value config file (TOML, or JSON for .json paths)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Interior order of the SBP operator (2, 4, 6 or 8)
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Nodes per direction; comma separated for several grids
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Space dimension (2 or 3)
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// lsqr or lsmr
    #[arg(long, global = true)]
    solver: Option<Solver>,
    /// grad-first or curl-first
    #[arg(long, global = true)]
    projection_order: Option<ProjectionOrder>,
    /// Krylov tolerance (atol = btol)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for CSV and JSON files
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check kernel dimensions and orthogonality relations with a dense oracle
    VerifyTheorems,
    /// Dump the grid oscillation vector of a 1D operator
    Oscillations,
    /// Decompose the planar test problem and report the remainder
    Remainder,
    /// Convergence study for the planar (2D) or spatial (3D) test problem
    Convergence,
    /// Separate Alfvén and magnetosonic currents
    Mhd(MhdArgs),
}

#[derive(Args)]
struct MhdArgs {
    /// Wavenumber k1 in units of pi
    #[arg(long)]
    k1: Option<f64>,
    /// Wavenumber k3 in units of pi
    #[arg(long)]
    k3: Option<f64>,
    #[arg(long)]
    eps_a: Option<f64>,
    #[arg(long)]
    eps_m: Option<f64>,
    /// Additionally sweep k1 = k3 over these values (units of pi)
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<f64>>,
}

enum Failure {
    Usage(anyhow::Error),
    Check(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn defaults_for(command: &Command, dim: Option<usize>) -> ExperimentConfig {
    let base = ExperimentConfig::default();
    match command {
        Command::VerifyTheorems => base,
        Command::Oscillations => ExperimentConfig {
            sizes: vec![51],
            ..base
        },
        Command::Remainder => ExperimentConfig {
            order: 6,
            sizes: vec![60],
            ..base
        },
        Command::Convergence if dim == Some(3) => ExperimentConfig {
            dim: 3,
            sizes: vec![9, 13, 17, 21],
            solver: Solver::Lsmr,
            projection_order: ProjectionOrder::CurlFirst,
            tol: 1e-12,
            ..base
        },
        Command::Convergence => ExperimentConfig {
            sizes: vec![17, 33, 49, 65],
            tol: 1e-12,
            ..base
        },
        Command::Mhd(_) => ExperimentConfig {
            order: 6,
            sizes: vec![101],
            ..base
        },
    }
}

fn parse_field<T: std::str::FromStr<Err = String>>(
    value: Option<String>,
) -> anyhow::Result<Option<T>> {
    value
        .map(|v| v.parse().map_err(anyhow::Error::msg))
        .transpose()
}

fn resolve(cli: &Cli, file: &ConfigFile) -> anyhow::Result<ExperimentConfig> {
    let c = &cli.common;
    let dim = c.dim.or(file.dim);
    let d = defaults_for(&cli.command, dim);
    let cfg = ExperimentConfig {
        order: c.order.or(file.order).unwrap_or(d.order),
        sizes: c
            .n
            .clone()
            .or_else(|| file.n.clone().map(|s| s.into_vec()))
            .unwrap_or(d.sizes),
        dim: dim.unwrap_or(d.dim),
        x_min: file.x_min.unwrap_or(d.x_min),
        x_max: file.x_max.unwrap_or(d.x_max),
        solver: c
            .solver
            .or(parse_field(file.solver.clone())?)
            .unwrap_or(d.solver),
        projection_order: c
            .projection_order
            .or(parse_field(file.projection_order.clone())?)
            .unwrap_or(d.projection_order),
        tol: c.tol.or(file.tol).unwrap_or(d.tol),
        out: c.out.clone().or(file.out.clone()),
        seed: c.seed.or(file.seed).unwrap_or(d.seed),
        break_operator: break_operator_from_env(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.common.config {
        Some(path) => ConfigFile::load(path).map_err(Failure::Usage)?,
        None => ConfigFile::default(),
    };
    let cfg = resolve(&cli, &file).map_err(Failure::Usage)?;
    let out = cfg.out.clone();

    match &cli.command {
        Command::VerifyTheorems => {
            let report = theorems::verify_theorems(&cfg)?;
            if let Some(dir) = &out {
                write_json(dir, "theorems.json", &report)?;
            }
            print_json(&report)?;
            if let Some(failed) = report.first_failure() {
                return Err(Failure::Check(format!(
                    "{}: {}",
                    failed.name, failed.detail
                )));
            }
        }
        Command::Oscillations => {
            let grid =
                Grid1D::new(cfg.x_min, cfg.x_max, cfg.sizes[0]).map_err(anyhow::Error::from)?;
            let dump = oscillations::oscillations(cfg.order, grid, cfg.break_operator)?;
            match &out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(anyhow::Error::from)?;
                    let name = format!("oscillations_order{}_n{}.csv", dump.order, dump.n);
                    let file =
                        std::fs::File::create(dir.join(name)).map_err(anyhow::Error::from)?;
                    dump.write_csv(file)?;
                }
                None => dump.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Remainder => {
            if cfg.dim != 2 {
                return Err(Failure::Usage(anyhow::anyhow!(
                    "remainder runs on 2D grids only"
                )));
            }
            let run = remainder::remainder(&cfg)?;
            if let Some(dir) = &out {
                run.write(dir)?;
            }
            print_json(&run.summary)?;
        }
        Command::Convergence => {
            let table = convergence::convergence(&cfg, cfg.dim)?;
            if let Some(dir) = &out {
                table.write(dir)?;
            }
            print_json(&table)?;
        }
        Command::Mhd(args) => {
            let mhd_cfg = mhd::MhdConfig {
                k1: args.k1.or(file.k1).unwrap_or(5.0) * PI,
                k3: args.k3.or(file.k3).unwrap_or(5.0) * PI,
                eps_a: args.eps_a.or(file.eps_a).unwrap_or(1e-2),
                eps_m: args.eps_m.or(file.eps_m).unwrap_or(1e-5),
                n: cfg.sizes[0],
                order: cfg.order,
                projection_order: cfg.projection_order,
            };
            mhd_cfg.validate().map_err(Failure::Usage)?;
            let run = mhd::mhd(&mhd_cfg, cfg.solver, cfg.krylov(), cfg.break_operator)?;
            if let Some(dir) = &out {
                run.write(dir)?;
            }
            print_json(&run.report)?;
            if let Some(ks) = &args.k_sweep {
                let ks: Vec<f64> = ks.iter().map(|k| k * PI).collect();
                let reports =
                    mhd::k_sweep(&mhd_cfg, &ks, cfg.solver, cfg.krylov(), cfg.break_operator)?;
                if let Some(dir) = &out {
                    mhd::write_sweep_csv(&dir.join("k_sweep.csv"), &reports)?;
                }
                print_json(&reports)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}
