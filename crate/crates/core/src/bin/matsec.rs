use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use matsec::experiment::{self, exit_code, Settings, VerifyMode};
use matsec::Result;

/// Matroid secretary experiments.
#[derive(Parser)]
#[command(name = "matsec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials and write one CSV row per trial.
    Run(ConfigArgs),
    /// Check the selection lower bounds or the matroid axioms.
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        /// Estimate instead of enumerating (uses --trials runs).
        #[arg(long)]
        monte_carlo: bool,
        /// Exhaustively check the matroid axioms (n <= 12).
        #[arg(long, conflicts_with = "monte_carlo")]
        axioms: bool,
    },
    /// Print the offline optimum of an instance.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long)]
    vertices: Option<String>,
    #[arg(long)]
    left: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long)]
    instance: Option<String>,
    /// uniform-random, exponential-spread, adversarial-geometric, or a file.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    base: Option<String>,
    /// full, bucketing-fixed, aided-wrapped, or classical-baseline.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// random, increasing, decreasing, or worst-of-<k>.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Declared sampling probability for sample-based algorithms.
    #[arg(long = "p-s")]
    p_s: Option<String>,
}

impl ConfigArgs {
    fn settings(&self) -> Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::read(path)?,
            None => Settings::new(),
        };
        let flags = [
            ("family", &self.family),
            ("n", &self.n),
            ("k", &self.k),
            ("blocks", &self.blocks),
            ("vertices", &self.vertices),
            ("left", &self.left),
            ("degree", &self.degree),
            ("instance", &self.instance),
            ("weights", &self.weights),
            ("base", &self.base),
            ("algorithm", &self.algorithm),
            ("tau", &self.tau),
            ("delta", &self.delta),
            ("order", &self.order),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("output", &self.output),
            ("workers", &self.workers),
            ("p_s", &self.p_s),
        ];
        let mut overrides = Settings::new();
        for (key, value) in flags {
            if let Some(v) = value {
                overrides.set(key, v.clone());
            }
        }
        settings.overlay(&overrides);
        Ok(settings)
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let config = args.settings()?.to_config()?;
            let out = experiment::run(&config)?;
            if config.output.is_none() {
                print!("{}", out.csv);
                eprint!("{}", out.summary_text());
            } else {
                print!("{}", out.summary_text());
            }
            Ok(true)
        }
        Command::Verify {
            config,
            monte_carlo,
            axioms,
        } => {
            let config = config.settings()?.to_config()?;
            let mode = if axioms {
                VerifyMode::Axioms
            } else if monte_carlo {
                VerifyMode::MonteCarlo
            } else {
                VerifyMode::Exact
            };
            let out = experiment::verify(&config, mode)?;
            match &config.output {
                Some(path) => {
                    std::fs::write(path, out.to_text())?;
                    print!("{}", out.summary_text());
                }
                None => {
                    print!("{}", out.to_text());
                    eprint!("{}", out.summary_text());
                }
            }
            Ok(out.passed())
        }
        Command::Opt { instance, weights } => {
            let (basis, total) = experiment::opt(&instance, &weights)?;
            let list: Vec<String> = basis.iter().map(|e| e.to_string()).collect();
            println!("elements={}", list.join(" "));
            println!("weight={total}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(6)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
