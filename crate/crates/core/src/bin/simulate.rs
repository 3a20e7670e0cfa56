use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ctsim::experiment::{parse_config, run_experiment, ExperimentKind};

/// Run an identity-based transit-choice experiment.
///
/// The config is a YAML experiment file, or a `manifest.json` from an earlier
/// run to replay it.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Experiment file (YAML) or manifest to replay.
    config: PathBuf,

    /// Output directory.
    #[arg(long, env = "CTSIM_OUT_DIR")]
    out: Option<PathBuf>,

    /// Master seed; replication k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    replications: Option<usize>,

    /// baseline | init | conformity
    #[arg(long)]
    experiment: Option<ExperimentKind>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let mut spec = match parse_config(&cli.config) {
        Ok(spec) => spec,
        Err(e) => {
            // an unreadable config is the caller's mistake too
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(out) = cli.out {
        spec.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        spec.simulation.master_seed = seed;
    }
    if let Some(k) = cli.replications {
        spec.replications = k;
    }
    if let Some(kind) = cli.experiment {
        spec.experiment = kind;
    }

    match run_experiment(&spec) {
        Ok(report) => {
            println!("run\tepochs\tstabilized\tpublic_transit_pct");
            for (run, s) in &report.runs {
                let pct: f64 = s.public_transit_share.parse().unwrap_or(f64::NAN);
                println!(
                    "{}\t{}\t{}\t{:.2}",
                    run.name,
                    s.epochs_run,
                    s.stabilized_fraction,
                    100.0 * pct
                );
            }
            println!("wrote {}", report.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &ctsim::Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_config_error() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}
