use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blowup_core::driver::{self, ExperimentConfig};
use blowup_core::{LabError, Result};

#[derive(Parser)]
#[command(name = "blowup-lab", version, about = "Self-similar wave-map blowup laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve perturbed blowup data at the nominal blowup time.
    Evolve(Common),
    /// Scan for eigenvalues of the linearized flow.
    Spectrum(Common),
    /// Extract the blowup time, re-evolve and fit the decay.
    Stability(Common),
    /// Sample the Strauss and Schauder ratio harnesses.
    Norms(Common),
    /// Run closed-form consistency checks.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Target dimension d (overrides `dim`).
    #[arg(long)]
    dim: Option<usize>,
    /// Seed for random families (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(d) = self.dim {
            cfg.dim = d;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve(c) => {
            let cfg = c.load()?;
            let traj = driver::run_evolve(&cfg)?;
            println!("evolved to tau = {} ({} snapshots) -> {}", traj.final_tau(), traj.times.len(), cfg.out_dir.display());
        }
        Command::Spectrum(c) => {
            let cfg = c.load()?;
            for e in driver::run_spectrum(&cfg)? {
                println!("n = {}: {} eigenvalue(s), gauge residual {:e}", e.n, e.roots.len(), e.gauge_residual);
                for r in &e.roots {
                    println!("  lambda = {:.12} {:+.3e}i  |M| = {:.2e}  step = {:.2e}", r.lambda.re, r.lambda.im, r.mismatch_abs, r.newton_step);
                }
            }
        }
        Command::Stability(c) => {
            let cfg = c.load()?;
            let report = driver::run_stability(&cfg)?;
            for (k, v) in report.entries() {
                println!("{k} = {v}");
            }
        }
        Command::Norms(c) => {
            let cfg = c.load()?;
            let r = driver::run_norms(&cfg)?;
            println!("strauss alpha=0: max {:e}, min {:e}", r.strauss[0].max, r.strauss[0].min);
            println!("strauss alpha=1: max {:e}, min {:e}", r.strauss[1].max, r.strauss[1].min);
            println!("strauss dilation spread {:e}", r.dilation_spread);
            println!("schauder: max {:e}, min {:e}", r.schauder.max, r.schauder.min);
        }
        Command::Selftest(c) => {
            let cfg = c.load()?;
            let st = driver::run_selftest(&cfg)?;
            for (name, value, tol, ok) in &st.checks {
                println!("{} {name}: {value:e} (tolerance {tol:e})", if *ok { "PASS" } else { "FAIL" });
            }
            if !st.passed() {
                return Err(LabError::Solver("self-test failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
