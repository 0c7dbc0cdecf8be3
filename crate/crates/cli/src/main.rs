use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ember_core::dmet::{SolverKind, DEFAULT_EPS_OCC};
use ember_core::meanfield::ScfOptions;
use ember_core::pipeline::{self, Fragmentation, RunConfig};
use ember_core::{par, EmberError, ErrorKind};

#[derive(Parser)]
#[command(name = "ember", version, about = "Density matrix embedding with sampled-subspace impurity solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the embedding self-consistency for one molecule.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solver: Option<SolverKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Doubles-amplitude file for the ansatz (`{frag}` expands to the fragment index).
        #[arg(long)]
        amplitudes: Option<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Also run the exact solver and report the difference.
        #[arg(long)]
        compare_fci: bool,
    },
    /// Print impurity sizes without solving.
    Dims {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Merge the reports under a directory into a comparison table.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Write one impurity Hamiltonian (at zero chemical potential) as FCIDUMP.
    ExportFcidump {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        fragment: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn exit_code(e: &EmberError) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Convergence => 3,
        ErrorKind::Resource => 4,
        ErrorKind::Other => 1,
    }
}

fn threads_from_env() -> Result<Option<usize>, EmberError> {
    match std::env::var("EMBER_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(EmberError::Invalid(format!("EMBER_THREADS = '{v}' is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn execute(cmd: Command) -> Result<(), EmberError> {
    match cmd {
        Command::Run { config, solver, seed, amplitudes, output_dir, compare_fci } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if solver.is_some() {
                cfg.solver = solver;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            if amplitudes.is_some() {
                cfg.sampler.amplitudes = amplitudes;
            }
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            cfg.compare_fci |= compare_fci;
            let out = pipeline::cmd_run(&cfg)?;
            let r = &out.report;
            println!("molecule   {}", r.molecule);
            println!("solver     {}", r.solver);
            println!("E_HF       {:.10}", r.e_hf);
            println!("E_DMET     {:.10}", r.e_tot);
            if let Some(d) = r.delta_e {
                println!("dE         {}", pipeline::format_delta(d));
            }
            println!("mu*        {:.6e}", r.mu_star);
            println!("N_err      {:.3e}", r.n_err);
            println!("iterations {}", r.n_iterations);
            println!("wall (s)   {:.2}", r.wall_seconds);
            println!("output     {}", out.run_dir.display());
        }
        Command::Dims { bundle, json } => {
            let rows = pipeline::cmd_dims(&bundle, &Fragmentation::PerAtom, &ScfOptions::default(), DEFAULT_EPS_OCC)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows).map_err(|e| EmberError::Invalid(e.to_string()))?);
            } else {
                print!("{}", pipeline::format_dims(&rows));
            }
        }
        Command::Report { dir } => {
            let c = pipeline::compare_reports(&dir)?;
            c.write_csv(&dir.join("comparison.csv"), &dir.join("delta_series.csv"))?;
            print!("{}", c.table());
        }
        Command::ExportFcidump { bundle, fragment, output } => {
            let text = pipeline::cmd_export_fcidump(
                &bundle,
                fragment,
                &Fragmentation::PerAtom,
                &ScfOptions::default(),
                DEFAULT_EPS_OCC,
            )?;
            match output {
                Some(p) => std::fs::write(&p, text).map_err(|e| EmberError::io(&p, e))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|t| {
        if let Some(n) = t {
            par::init_global_threads(n);
        }
        execute(cli.command)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
