use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use voterlab::harness::{run_criteria, run_experiment, ExperimentConfig, ExperimentKind};
use voterlab::profile::RhoProfile;

#[derive(Parser)]
#[command(name = "voterlab", about = "Voter-model occupation-time laboratory", version)]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here as well as printing it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Initial density profile as inline JSON, e.g.
/// '{"family":"constant","level":0.5}'.
fn parse_profile(text: &str) -> Result<RhoProfile, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Compute dimension constants (Green function, escape probability, ...).
    Constants {
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6")]
        dims: Vec<usize>,
    },
    /// Neighbor-pair second moment across scales versus its limit.
    PairLimit {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_parser = parse_profile,
              default_value = r#"{"family":"constant","level":0.5}"#)]
        profile: RhoProfile,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Coordinates of the first site, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0,0,0")]
        x: Vec<i64>,
        /// Coordinates of the second site, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,0,0")]
        y: Vec<i64>,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        scales: Vec<u64>,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
    },
    /// Scaled occupation covariance across scales versus its limit.
    OccupationCov {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_parser = parse_profile,
              default_value = r#"{"family":"constant","level":0.5}"#)]
        profile: RhoProfile,
        #[arg(long, default_value_t = 0.5)]
        t1: f64,
        #[arg(long, default_value_t = 1.0)]
        t2: f64,
        #[arg(long, value_delimiter = ',', default_value = "400,1600")]
        scales: Vec<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Forward torus runs: scaled occupation mean and variance.
    Forward {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_parser = parse_profile,
              default_value = r#"{"family":"constant","level":0.5}"#)]
        profile: RhoProfile,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 25)]
        n: u64,
        /// Torus side (odd); 0 picks the smallest side with negligible
        /// wrap-around.
        #[arg(long, default_value_t = 0)]
        side: usize,
        #[arg(long, default_value_t = 100)]
        replicas: u64,
    },
    /// Limit covariance matrix on a time grid.
    LimitTable {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_parser = parse_profile,
              default_value = r#"{"family":"constant","level":0.5}"#)]
        profile: RhoProfile,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0")]
        times: Vec<f64>,
    },
    /// L2 distance of the lattice two-point kernel to its continuum limit.
    BConvergence {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_delimiter = ',', default_value = "25,100,400")]
        scales: Vec<u64>,
    },
    /// Draws from the d = 3 limit field; empirical versus exact variance.
    ZetaSample {
        #[arg(long, value_parser = parse_profile,
              default_value = r#"{"family":"constant","level":0.5}"#)]
        profile: RhoProfile,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0")]
        times: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        replicas: u64,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the verification suite (all criteria, or a subset).
    Verify {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        only: Vec<usize>,
    },
}

fn experiment(command: Command) -> Result<ExperimentKind, String> {
    Ok(match command {
        Command::Constants { dims } => ExperimentKind::Constants { dims },
        Command::PairLimit {
            d,
            profile,
            s,
            x,
            y,
            scales,
            replicas,
        } => ExperimentKind::PairLimit {
            d,
            profile,
            s,
            x,
            y,
            scales,
            replicas,
        },
        Command::OccupationCov {
            d,
            profile,
            t1,
            t2,
            scales,
            samples,
        } => ExperimentKind::OccupationCov {
            d,
            profile,
            t1,
            t2,
            scales,
            samples,
        },
        Command::Forward {
            d,
            profile,
            t,
            n,
            side,
            replicas,
        } => {
            let side = if side == 0 {
                voterlab::forward::choose_torus_side(d, t * n as f64, 1e-3)
            } else {
                side
            };
            ExperimentKind::ForwardVariance {
                d,
                profile,
                t,
                n,
                side,
                replicas,
            }
        }
        Command::LimitTable { d, profile, times } => {
            ExperimentKind::LimitTable { d, profile, times }
        }
        Command::BConvergence { t, scales } => ExperimentKind::BConvergence { t, scales },
        Command::ZetaSample {
            profile,
            times,
            replicas,
        } => ExperimentKind::ZetaSample {
            profile,
            times,
            replicas,
        },
        Command::Run { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| e.to_string())?;
            let parsed: ExperimentConfig = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            parsed.experiment
        }
        Command::Verify { .. } => unreachable!("handled before dispatch"),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let seed = cli.seed;
    let out = cli.out.clone();
    if let Command::Verify { only } = &cli.command {
        return match run_criteria(seed, only) {
            Ok(results) if results.iter().all(|r| r.pass) => ExitCode::SUCCESS,
            Ok(_) => ExitCode::FAILURE,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }
    match experiment(cli.command) {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        Ok(kind) => {
            let config = ExperimentConfig {
                seed,
                experiment: kind,
            };
            match run_experiment(&config) {
                Ok(report) => {
                    report.print();
                    if let Some(path) = out {
                        if let Err(e) = report.save(&path) {
                            eprintln!("error writing report: {e}");
                            return ExitCode::FAILURE;
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
