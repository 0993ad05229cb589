use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fraclab::config::ExperimentConfig;
use fraclab::experiment::{run, Command};

/// Fractal measures, Fourier asymptotics and Hardy-type inequalities at desk scale.
#[derive(Parser, Debug)]
#[command(name = "fraclab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment config (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "FRACLAB_THREADS")]
    threads: Option<usize>,

    /// Seed for sampled point clouds; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Maximum number of atoms in a cylinder approximation.
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Similarity dimension of the configured system.
    Dimension,
    /// Neighbourhood volumes, covering/packing counts, Minkowski content.
    Geometry,
    /// Fourier transform sweep along the first axis.
    Fourier,
    /// Normalized ball and Gaussian series, B and M norms.
    Asymptotics,
    /// Left-hand functionals only.
    Hardy,
    /// Full verdicts; exit 1 if any is unstable or above the ceiling.
    Verify,
    /// Everything above.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Dimension => Command::Dimension,
            Cmd::Geometry => Command::Geometry,
            Cmd::Fourier => Command::Fourier,
            Cmd::Asymptotics => Command::Asymptotics,
            Cmd::Hardy => Command::Hardy,
            Cmd::Verify => Command::Verify,
            Cmd::All => Command::All,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        config.output = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(budget) = cli.budget {
        config.budget = budget;
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        pool = pool.num_threads(threads.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(4);
        }
    };

    let command = Command::from(cli.command);
    match pool.install(|| run(command, &config)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            println!("wrote {} files under {}", outcome.written.len(), config.output.display());
            if outcome.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
