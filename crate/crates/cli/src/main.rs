//! `photodiss simulate | validate | slice`.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
//! 3 numerical instability, 4 partial run (member failures or interruption).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use log::{error, info, warn};

use photodiss::runner::{self, BackendSelection, Experiment, RunOptions};
use photodiss::units::FEMTOSECOND;
use photodiss::Error;

#[derive(Parser)]
#[command(name = "photodiss", version, about = "Thermal-ensemble photodissociation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its outputs.
    Simulate(SimulateArgs),
    /// Check a configuration and print the derived run parameters.
    Validate { config: PathBuf },
    /// Print a 1-D slice of a distribution file.
    Slice(SliceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment file; not needed with --resume.
    #[arg(required_unless_present = "resume")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendSelection>,
    /// Number of RPW realizations K.
    #[arg(long)]
    realizations: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue the run recorded in this manifest.
    #[arg(long, value_name = "MANIFEST")]
    resume: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["theta0", "pmp"])))]
struct SliceArgs {
    file: PathBuf,
    /// `𝒟(P, θ = 0)` against P.
    #[arg(long)]
    theta0: bool,
    /// `𝒟(P_mp, θ)` against θ at the most probable momentum.
    #[arg(long)]
    pmp: bool,
}

fn parse_backend(s: &str) -> Result<BackendSelection, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Unit(_) | Error::Domain(_) | Error::Unbound { .. } => 2,
        Error::Instability { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Validate { config } => validate(config),
        Command::Slice(args) => slice(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<u8, Error> {
    let options = RunOptions {
        workers: args.workers,
        stop_after: None,
    };
    let outcome = if let Some(manifest) = &args.resume {
        if args.backend.is_some() || args.realizations.is_some() || args.seed.is_some() || args.out.is_some() {
            warn!("--resume uses the stored configuration; other overrides are ignored");
        }
        runner::resume(manifest, &options)?
    } else {
        let path = args.config.expect("clap enforces a config without --resume");
        let mut config = runner::load_config(&path)?;
        if let Some(b) = args.backend {
            config.ensemble.backend = b;
            if b != BackendSelection::Both {
                config.ensemble.rpw_mode = runner::RpwMode::Propagate;
            }
        }
        if let Some(k) = args.realizations {
            config.ensemble.realizations = k;
            config.ensemble.k_ladder = None;
        }
        if let Some(s) = args.seed {
            config.ensemble.seed = s;
        }
        if let Some(out) = args.out {
            config.output.directory = out;
        }
        config.validate()?;
        runner::run(&config, &options)?
    };
    info!(
        "{}: {:?}, manifest {}",
        outcome.directory.display(),
        outcome.manifest.status,
        outcome.directory.join(runner::MANIFEST_FILE).display()
    );
    Ok(outcome.exit_code() as u8)
}

fn validate(path: PathBuf) -> Result<u8, Error> {
    let config = runner::load_config(&path)?;
    let exp = Experiment::build(&config)?;
    let sys = &exp.system;
    let grid = sys.grid();
    let bounds = exp.propagation.plan.bounds();
    let spec = exp.ensemble.spec();
    println!("config        {}", path.display());
    println!("hash          {}", config.hash());
    println!(
        "grid          {} points, r = [{:.4}, {:.4}] bohr, dr = {:.5} bohr",
        grid.len(),
        grid.r_min(),
        grid.r_max(),
        grid.dr()
    );
    println!(
        "channels      {} (j_max {}, m_max {:?})",
        sys.channels().len(),
        sys.channels().j_max(),
        sys.channels().m_max()
    );
    println!("spectrum      [{:.6e}, {:.6e}] hartree", bounds.e_min, bounds.e_max);
    println!(
        "propagation   {} steps of {} fs, Chebyshev order {}, t_final = {:.3} fs",
        exp.propagation.n_steps,
        exp.propagation.plan.dt() / FEMTOSECOND,
        exp.propagation.plan.order(),
        exp.propagation.t_final() / FEMTOSECOND
    );
    println!(
        "ensemble      T = {} K, initial j_max {}, {} states, pruned mass {:.3e}",
        spec.temperature_k,
        spec.j_max_initial,
        exp.ensemble.len(),
        exp.ensemble.pruned_mass()
    );
    println!(
        "backend       {:?}, K = {}, seed {}",
        config.ensemble.backend, config.ensemble.realizations, config.ensemble.seed
    );
    Ok(0)
}

fn slice(args: SliceArgs) -> Result<u8, Error> {
    let d = runner::read_distribution(&args.file)?;
    if args.theta0 {
        println!("# P(a.u.) D(P,theta=0)");
        for (p, v) in d.p_centers.iter().zip(d.theta0_slice()) {
            println!("{p} {v}");
        }
    } else {
        let k = d.most_probable_index()?;
        println!("# P_mp = {} a.u.", d.p_centers[k]);
        println!("# theta(rad) D(P_mp,theta)");
        for (t, v) in d.theta.iter().zip(d.angular_slice(k)) {
            println!("{t} {v}");
        }
    }
    Ok(0)
}
