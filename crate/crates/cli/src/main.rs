use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tprod_cli::commands::{self, BoundArgs};
use tprod_cli::Outcome;

#[derive(Parser)]
#[command(name = "tprod", version, about = "Tail bounds for sums of random T-product tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one bound, or print the expectation-bound constants with `constants`.
    #[command(allow_negative_numbers = true)]
    Bound(BoundCli),
    /// Run a domination experiment from a TOML config.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; overrides the config's `output`.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check the supporting inequalities on random instances.
    Lemmas {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every shipped experiment.
    Report {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BoundCli {
    /// Theorem id such as `azuma` or `chernoff2-upper`, or `constants`.
    theorem: String,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Column count for rectangular bounds.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long)]
    theta: Option<f64>,
    /// Vector threshold, comma separated.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    #[arg(long = "T", default_value_t = 1.0)]
    t_cap: f64,
    #[arg(long, default_value_t = 1)]
    n_sum: usize,
    #[arg(long)]
    mu_max: Option<f64>,
    #[arg(long)]
    mu_min: Option<f64>,
    #[arg(long)]
    mu_bar_max: Option<f64>,
    #[arg(long)]
    mu_bar_min: Option<f64>,
}

impl From<BoundCli> for (String, BoundArgs) {
    fn from(c: BoundCli) -> Self {
        (
            c.theorem,
            BoundArgs {
                m: c.m,
                n: c.n,
                p: c.p,
                sigma2: c.sigma2,
                theta: c.theta,
                b: c.b,
                t_cap: c.t_cap,
                n_sum: c.n_sum,
                mu_max: c.mu_max,
                mu_min: c.mu_min,
                mu_bar_max: c.mu_bar_max,
                mu_bar_min: c.mu_bar_min,
            },
        )
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    let result = match cli.command {
        Command::Bound(b) => {
            let (theorem, args) = b.into();
            commands::cmd_bound(&theorem, &args, &mut out)
        }
        Command::Simulate { config, seed, output } => {
            commands::cmd_simulate(&config, seed, output.as_deref(), &mut out, &mut err)
        }
        Command::Lemmas { filter, seed } => commands::cmd_lemmas(filter.as_deref(), seed, &mut out),
        Command::Report { seed, output } => commands::cmd_report(seed, output.as_deref(), &mut out, &mut err),
    };
    let outcome = result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {}", format!("{e:#}").replace('\n', " "));
        Outcome::Usage
    });
    let _ = out.flush();
    ExitCode::from(outcome.code() as u8)
}
