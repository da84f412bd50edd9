use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landing_core::domain::parse_wakes;
use landing_core::ga::{decode, evolve};
use landing_core::metrics::distance;
use landing_core::simulator::{generate_dataset, label_dataset};
use landing_core::{DatasetParams, FitnessConfig, GaParams, MetricKind, SequencerConfig, WindowStep};
use landing_harness::analysis::{count_below, cross_metric_history, evaluate_model};
use landing_harness::{io, run_experiment, ExperimentConfig, HarnessError, PerMetric, Result};

#[derive(Parser)]
#[command(name = "landing", version, about = "Landing-sequence simulator and PFSM-society trainer")]
struct Cli {
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random peak-traffic arrival sequences.
    GenData {
        #[arg(long, default_value_t = 200)]
        sequences: usize,
        #[arg(long, default_value_t = 20)]
        aircraft: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        gap_min: f64,
        #[arg(long, default_value_t = 60.0)]
        gap_max: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label arrivals with the reference FCFS/CPS sequencer.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = landing_core::simulator::DEFAULT_SAVINGS_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the distance between two wake strings.
    Distance {
        #[arg(long)]
        metric: MetricKind,
        a: String,
        b: String,
    },
    /// Train a society model on sequence pairs.
    Train {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        metric: MetricKind,
        #[arg(long, default_value_t = 100)]
        pop: usize,
        #[arg(long, default_value_t = 1000)]
        gens: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        crossover_rate: f64,
        #[arg(long, default_value_t = 1.0 / 90.0)]
        mutation_rate: f64,
        #[arg(long, default_value_t = 1)]
        elitism: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Evaluate a model on sequence pairs with maximum-likelihood decoding.
    Evaluate {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Count thresholds for Levenshtein, Hamming and Position.
        #[arg(long, value_delimiter = ',', default_values_t = [6, 6, 8])]
        thresholds: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full experiment from a JSON configuration.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn config_err(e: landing_core::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData { sequences, aircraft, seed, gap_min, gap_max, out } => {
            let params = DatasetParams {
                n_sequences: sequences,
                n_aircraft: aircraft,
                gap_min,
                gap_max,
                seed,
                ..DatasetParams::default()
            };
            let arrivals = generate_dataset(&params).map_err(config_err)?;
            io::write_file(&out, io::arrivals_csv(&arrivals))?;
            println!("wrote {} sequences to {}", arrivals.len(), out.display());
        }
        Command::Simulate { input, threshold, out } => {
            let (ids, arrivals): (Vec<u64>, Vec<_>) = io::read_arrivals(&input)?.into_iter().unzip();
            let cfg = SequencerConfig { savings_threshold: threshold, ..SequencerConfig::default() };
            let mut pairs = label_dataset(&arrivals, &cfg).map_err(config_err)?;
            for (p, id) in pairs.iter_mut().zip(ids) {
                p.id = id;
            }
            io::write_file(&out, io::pairs_csv(&pairs))?;
            let cps = pairs.iter().filter(|p| p.decision == landing_core::Decision::UsedCps).count();
            println!("labelled {} sequences ({cps} CPS) to {}", pairs.len(), out.display());
        }
        Command::Distance { metric, a, b } => {
            for s in [&a, &b] {
                parse_wakes(s).map_err(|e| HarnessError::data("<argument>", e))?;
            }
            let d = distance(metric, &a, &b).map_err(|e| HarnessError::data("<argument>", e))?;
            println!("{d}");
        }
        Command::Train {
            pairs,
            metric,
            pop,
            gens,
            repeats,
            step,
            seed,
            crossover_rate,
            mutation_rate,
            elitism,
            out,
            history,
        } => {
            let data = io::read_pairs(&pairs)?;
            let step = WindowStep::new(step).map_err(config_err)?;
            let cfg = FitnessConfig { metric, repeats, step };
            let params = GaParams {
                population: pop,
                generations: gens,
                crossover_rate,
                mutation_rate,
                elitism,
                seed,
            };
            let evo = evolve(&data, &cfg, &params).map_err(config_err)?;
            io::write_json(&out, &io::model_json(&decode(&evo.best)))?;
            if let Some(path) = history {
                let trace = cross_metric_history(&evo.history, &data, step)?;
                io::write_file(&path, io::history_csv(&trace))?;
            }
            println!("best fitness {} at generation {}", evo.best_fitness, evo.best_generation);
        }
        Command::Evaluate { pairs, model, step, thresholds, out } => {
            let [lev, ham, pos] = thresholds[..] else {
                return Err(HarnessError::Config("--thresholds takes three comma-separated values".into()));
            };
            let data = io::read_pairs(&pairs)?;
            let model = io::read_model(&model)?;
            let step = WindowStep::new(step).map_err(config_err)?;
            let eval = evaluate_model(&model, &data, step)?;
            let thresholds = PerMetric { levenshtein: lev, hamming: ham, position: pos };
            let counts = count_below(&eval.pairs, &thresholds);
            let modes = eval.modes;
            io::write_json(
                &out,
                &serde_json::json!({
                    "pairs": eval.pairs,
                    "modes": eval.modes,
                    "summaries": eval.summaries,
                    "thresholds": thresholds,
                    "counts_below": counts,
                }),
            )?;
            let show = |m: Option<usize>| m.map_or("-".to_string(), |v| v.to_string());
            println!(
                "modes lev {} ham {} pos {}",
                show(modes.levenshtein),
                show(modes.hamming),
                show(modes.position)
            );
        }
        Command::Report { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| HarnessError::Config("no output directory: pass --out-dir or set output_dir".into()))?;
            let report = run_experiment(&cfg, &dir)?;
            for c in &report.results.champions {
                println!(
                    "{}: training fitness {} (run {}, generation {})",
                    c.metric, c.training_fitness, c.run, c.generation
                );
            }
            println!("report written to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
