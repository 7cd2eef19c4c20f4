use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zzbound_cli::{cmd_bound, cmd_sweep, cmd_verify, CliError, RunOptions};
use zzbound_core::Execution;

#[derive(Parser)]
#[command(
    name = "zzbound",
    version,
    about = "Ziv-Zakai-type lower bounds on Bayesian estimation error"
)]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Z1 and Z2; writes curves.csv and summary.json.
    Bound { config: PathBuf },

    /// Certify the bounds against a simulated posterior-mean risk; writes verify.json.
    Verify {
        config: PathBuf,
        /// Multiply both bounds before certifying (negative-control hook).
        #[arg(long, default_value_t = 1.0, hide = true)]
        bound_scale: f64,
    },

    /// Recompute the bounds over a list of values of one numeric field; writes sweep.csv.
    Sweep {
        config: PathBuf,
        /// Field to vary: sigma, R or p.
        #[arg(long)]
        field: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        /// Also simulate the posterior-mean risk for each value.
        #[arg(long)]
        oracle: bool,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let opts = RunOptions {
        out_dir: cli.out_dir,
        seed: cli.seed,
        execution: Execution::Parallel,
    };
    match cli.command {
        Command::Bound { config } => {
            let s = cmd_bound(&config, &opts)?;
            println!("Z1 = {}  Z2 = {}  bcrb = {}  (t_max = {})", s.z1, s.z2, s.bcrb, s.t_max);
            Ok(0)
        }
        Command::Verify { config, bound_scale } => {
            let r = cmd_verify(&config, &opts, bound_scale)?;
            println!(
                "risk = {} ± {}  Z1 = {}  Z2 = {}  certified = {}",
                r.risk, r.std_error, r.z1, r.z2, r.certified
            );
            Ok(if r.certified { 0 } else { 4 })
        }
        Command::Sweep {
            config,
            field,
            values,
            oracle,
        } => {
            let rows = cmd_sweep(&config, &field, &values, oracle, &opts)?;
            for row in rows {
                println!("{} = {}: Z1 = {}  Z2 = {}", field, row.value, row.z1, row.z2);
            }
            Ok(0)
        }
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_threads(threads, move || run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
