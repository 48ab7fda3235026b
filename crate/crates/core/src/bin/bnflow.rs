use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bnflow::pipeline::{exit_code, Pipeline, PipelineConfig};

#[derive(Parser)]
#[command(name = "bnflow", version, about = "Bayesian-network model building pipeline")]
struct Cli {
    /// Pipeline configuration file
    #[arg(long, global = true, default_value = "bnflow.ini")]
    config: PathBuf,
    /// Output directory (overrides run.out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides run.seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Information-theoretic score tables and a proposed drop-list
    Select,
    /// Learn candidate structures
    Learn,
    /// Bayes factors and ranking against the naive benchmark
    Compare,
    /// Cross-validate surviving structures and choose one
    Cv,
    /// Refit the chosen structure and predict the test set
    FitPredict,
    /// Bundle all phase outputs into report.md
    Report,
}

fn run(cli: &Cli) -> bnflow::Result<()> {
    let mut config = PipelineConfig::from_file(&cli.config)?;
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    let p = Pipeline::new(config, cli.out.clone())?;
    match cli.command {
        Command::Select => {
            let s = p.select()?;
            println!("proposed drop-list: {:?}", s.drop_list());
        }
        Command::Learn => {
            for m in p.learn()? {
                println!("{}: {} edges", m.label, m.dag.edge_count());
            }
        }
        Command::Compare => {
            let c = p.compare()?;
            for (label, s) in &c.ranking.entries {
                println!("{label}: log ML {s:.3}");
            }
        }
        Command::Cv => println!("chosen: {}", p.cv()?.best),
        Command::FitPredict => {
            let f = p.fit_predict()?;
            let m = &f.evaluation.metrics;
            println!("{}: accuracy {:.4}, rmse {:.4} on {} cases", f.chosen, m.accuracy, m.rmse, m.cases);
        }
        Command::Report => println!("{}", p.report()?.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
