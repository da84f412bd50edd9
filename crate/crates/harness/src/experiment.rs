//! The end-to-end experiment: generate, label, split, train one set of runs
//! per metric, pick champions and evaluate them on held-out pairs.

use std::path::{Path, PathBuf};

use landing_core::ga::{self, decode, evolve, TrainingSet};
use landing_core::seeding::derive_seed;
use landing_core::simulator::{generate_dataset, label_dataset};
use landing_core::{
    Chromosome, DatasetParams, Evolution, FitnessConfig, GaParams, MetricKind, Pair, SequencerConfig, WindowStep,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    count_below, cross_metric_history, evaluate_individual, pearson, split_dataset, Evaluation, PerMetric, TraceRow,
};
use crate::error::{HarnessError, Result};
use crate::io;

const TAG_DATASET: u64 = 11;
const TAG_RUN: u64 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub n_sequences: usize,
    pub n_aircraft: usize,
    pub gap_min: f64,
    pub gap_max: f64,
    /// Draw weights for H, L, S.
    pub wake_weights: [f64; 3],
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let d = DatasetParams::<f64>::default();
        DatasetConfig {
            n_sequences: d.n_sequences,
            n_aircraft: d.n_aircraft,
            gap_min: d.gap_min,
            gap_max: d.gap_max,
            wake_weights: d.wake_weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        let d = GaParams::default();
        GaConfig {
            population: d.population,
            generations: d.generations,
            crossover_rate: d.crossover_rate,
            mutation_rate: d.mutation_rate,
            elitism: d.elitism,
        }
    }
}

impl GaConfig {
    pub fn params(&self, seed: u64) -> GaParams {
        GaParams {
            population: self.population,
            generations: self.generations,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            elitism: self.elitism,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: usize,
    pub test: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { train: 100, test: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every other stream derives from it.
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub savings_threshold: f64,
    /// Sampled landings per pair in the fitness.
    pub repeats: usize,
    /// Window step.
    pub step: usize,
    pub ga: GaConfig,
    pub split: SplitConfig,
    pub runs_per_metric: usize,
    /// Metrics to train champions for.
    pub metrics: Vec<MetricKind>,
    /// Test-set count thresholds; by default each champion's own modes.
    pub thresholds: Option<PerMetric<usize>>,
    /// Output directory, unless given on the command line.
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            dataset: DatasetConfig::default(),
            savings_threshold: landing_core::simulator::DEFAULT_SAVINGS_THRESHOLD,
            repeats: 10,
            step: 1,
            ga: GaConfig::default(),
            split: SplitConfig::default(),
            runs_per_metric: 10,
            metrics: MetricKind::ALL.to_vec(),
            thresholds: None,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(path: &Path, text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(path, &io::read_file(path)?)
    }

    pub fn dataset_params(&self) -> DatasetParams {
        DatasetParams {
            n_sequences: self.dataset.n_sequences,
            n_aircraft: self.dataset.n_aircraft,
            gap_min: self.dataset.gap_min,
            gap_max: self.dataset.gap_max,
            wake_weights: self.dataset.wake_weights,
            seed: derive_seed(self.seed, &[TAG_DATASET]),
        }
    }

    pub fn fitness(&self, metric: MetricKind) -> Result<FitnessConfig> {
        let cfg = FitnessConfig {
            metric,
            repeats: self.repeats,
            step: WindowStep::new(self.step)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// GA seed of run `run` for `metric`.
    pub fn run_seed(&self, metric: MetricKind, run: usize) -> u64 {
        derive_seed(self.seed, &[TAG_RUN, metric.index() as u64, run as u64])
    }

    pub fn validate(&self) -> Result<()> {
        let config = |e: landing_core::Error| HarnessError::Config(e.to_string());
        self.dataset_params().validate().map_err(config)?;
        self.ga.params(0).validate().map_err(config)?;
        self.fitness(MetricKind::Levenshtein).map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(0.0..1.0).contains(&self.savings_threshold) {
            return Err(HarnessError::Config("savings_threshold must lie in [0, 1)".into()));
        }
        if self.split.train + self.split.test > self.dataset.n_sequences {
            return Err(HarnessError::Config("split.train + split.test exceeds dataset.n_sequences".into()));
        }
        if self.split.train == 0 {
            return Err(HarnessError::Config("split.train must be positive".into()));
        }
        if self.runs_per_metric == 0 {
            return Err(HarnessError::Config("runs_per_metric must be positive".into()));
        }
        if self.metrics.is_empty() {
            return Err(HarnessError::Config("metrics must not be empty".into()));
        }
        if self.metrics.iter().enumerate().any(|(i, m)| self.metrics[..i].contains(m)) {
            return Err(HarnessError::Config("metrics must not repeat".into()));
        }
        Ok(())
    }
}

/// One finished GA run with its cross-metric trace on the training pairs.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metric: MetricKind,
    pub run: usize,
    pub seed: u64,
    pub evolution: Evolution,
    pub trace: Vec<TraceRow>,
}

impl RunOutcome {
    pub fn dir_name(&self) -> String {
        format!("{}_{:02}", self.metric.name(), self.run)
    }

    /// Correlation of the Levenshtein trace with the Hamming and Position
    /// traces; `None` where a trace is constant.
    pub fn trace_correlations(&self) -> [Option<f64>; 2] {
        let col = |k: usize| self.trace.iter().map(|r| r.eval[k] as f64).collect::<Vec<_>>();
        [pearson(&col(0), &col(1)).ok(), pearson(&col(0), &col(2)).ok()]
    }
}

/// A champion's fitness under every metric on the training pairs, drawn from
/// the same streams as its recorded fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMetricRow {
    pub champion: MetricKind,
    pub run: usize,
    pub generation: usize,
    pub fitness: PerMetric<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChampionResult {
    pub metric: MetricKind,
    pub run: usize,
    pub generation: usize,
    pub training_fitness: usize,
    pub thresholds: PerMetric<usize>,
    pub counts_below: PerMetric<usize>,
    pub test: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub seed: u64,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub champions: Vec<ChampionResult>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub pairs: Vec<Pair>,
    pub runs: Vec<RunOutcome>,
    pub cross_metric: Vec<CrossMetricRow>,
    pub results: Results,
}

impl ExperimentReport {
    pub fn champion(&self, metric: MetricKind) -> Option<&ChampionResult> {
        self.results.champions.iter().find(|c| c.metric == metric)
    }
}

fn train_run(cfg: &ExperimentConfig, train: &[Pair], metric: MetricKind, run: usize) -> Result<RunOutcome> {
    let seed = cfg.run_seed(metric, run);
    let step = WindowStep::new(cfg.step)?;
    let evolution = evolve(train, &cfg.fitness(metric)?, &cfg.ga.params(seed))?;
    let trace = cross_metric_history(&evolution.history, train, step)?;
    Ok(RunOutcome { metric, run, seed, evolution, trace })
}

/// Lowest recorded fitness; ties go to the earliest run.
fn champion_of(runs: &[RunOutcome], metric: MetricKind) -> &RunOutcome {
    runs.iter()
        .filter(|r| r.metric == metric)
        .min_by_key(|r| (r.evolution.best_fitness, r.run))
        .expect("at least one run per metric")
}

fn best_chromosome(run: &RunOutcome) -> &Chromosome {
    &run.evolution.best
}

fn cross_metric(cfg: &ExperimentConfig, champion: &RunOutcome, train: &TrainingSet) -> Result<CrossMetricRow> {
    let gen = champion.evolution.best_generation;
    let key = ga::fitness_stream_key(champion.seed, gen, champion.evolution.history[gen].best_index);
    let model = decode(best_chromosome(champion));
    let mut fitness = [0; 3];
    for k in MetricKind::ALL {
        fitness[k.index()] = train.fitness(&model, &cfg.fitness(k)?, key)?;
    }
    Ok(CrossMetricRow {
        champion: champion.metric,
        run: champion.run,
        generation: gen,
        fitness: PerMetric { levenshtein: fitness[0], hamming: fitness[1], position: fitness[2] },
    })
}

/// Runs the whole experiment and writes its artifacts under `out_dir`.
/// Output bytes depend only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    cfg.validate()?;
    let arrivals = generate_dataset(&cfg.dataset_params()).map_err(|e| HarnessError::Config(e.to_string()))?;
    let pairs = label_dataset(
        &arrivals,
        &SequencerConfig { savings_threshold: cfg.savings_threshold, ..SequencerConfig::default() },
    )?;
    io::write_file(&out_dir.join("arrivals.csv"), io::arrivals_csv(&arrivals))?;
    io::write_file(&out_dir.join("pairs.csv"), io::pairs_csv(&pairs))?;
    let (train, test) = split_dataset(&pairs, cfg.split.train, cfg.split.test)?;

    let jobs: Vec<(MetricKind, usize)> =
        cfg.metrics.iter().flat_map(|&m| (0..cfg.runs_per_metric).map(move |r| (m, r))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(metric, run)| {
            let outcome = train_run(cfg, &train, metric, run)?;
            let dir = out_dir.join("runs").join(outcome.dir_name());
            io::write_file(&dir.join("history.csv"), io::history_csv(&outcome.trace))?;
            io::write_json(&dir.join("model.json"), &io::model_json(&decode(best_chromosome(&outcome))))?;
            Ok(outcome)
        })
        .collect::<Result<Vec<_>>>()?;

    let train_set = TrainingSet::new(&train)?;
    let step = WindowStep::new(cfg.step)?;
    let mut cross = Vec::new();
    let mut champions = Vec::new();
    for &metric in &cfg.metrics {
        let champ = champion_of(&runs, metric);
        cross.push(cross_metric(cfg, champ, &train_set)?);
        let test_eval = evaluate_individual(best_chromosome(champ), &test, step)?;
        let thresholds = cfg
            .thresholds
            .unwrap_or_else(|| PerMetric::from_fn(|k| test_eval.modes.get(k).unwrap_or(0)));
        champions.push(ChampionResult {
            metric,
            run: champ.run,
            generation: champ.evolution.best_generation,
            training_fitness: champ.evolution.best_fitness,
            counts_below: count_below(&test_eval.pairs, &thresholds),
            thresholds,
            test: test_eval,
        });
    }
    let results = Results { seed: cfg.seed, train_pairs: train.len(), test_pairs: test.len(), champions };
    write_report(out_dir, cfg, &runs, &cross, &results)?;
    Ok(ExperimentReport { pairs, runs, cross_metric: cross, results })
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn opt(v: Option<impl ToString>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_report(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    runs: &[RunOutcome],
    cross: &[CrossMetricRow],
    results: &Results,
) -> Result<()> {
    // the output location is not part of the experiment
    io::write_json(&out_dir.join("config.json"), &ExperimentConfig { output_dir: None, ..cfg.clone() })?;
    io::write_file(
        &out_dir.join("cross_metric.csv"),
        csv_table(
            &["champion", "run", "generation", "levenshtein", "hamming", "position"],
            cross.iter().map(|r| {
                let f = r.fitness.to_array();
                vec![r.champion.name().into(), r.run.to_string(), r.generation.to_string(), f[0].to_string(), f[1].to_string(), f[2].to_string()]
            }),
        ),
    )?;
    io::write_file(
        &out_dir.join("test_modes.csv"),
        csv_table(
            &["champion", "levenshtein", "hamming", "position"],
            results.champions.iter().map(|c| {
                let m = c.test.modes.to_array();
                vec![c.metric.name().into(), opt(m[0]), opt(m[1]), opt(m[2])]
            }),
        ),
    )?;
    io::write_file(
        &out_dir.join("counts_below.csv"),
        csv_table(
            &["champion", "lev_threshold", "ham_threshold", "pos_threshold", "levenshtein", "hamming", "position"],
            results.champions.iter().map(|c| {
                let t = c.thresholds.to_array();
                let n = c.counts_below.to_array();
                [t, n].concat().iter().fold(vec![c.metric.name().to_string()], |mut v, x| {
                    v.push(x.to_string());
                    v
                })
            }),
        ),
    )?;
    let summaries: Vec<_> = results
        .champions
        .iter()
        .map(|c| serde_json::json!({ "champion": c.metric.name(), "summaries": c.test.summaries }))
        .collect();
    io::write_json(&out_dir.join("test_summaries.json"), &summaries)?;
    io::write_file(
        &out_dir.join("traces.csv"),
        csv_table(
            &["metric", "run", "generation", "best_fitness", "mean_fitness", "lev_eval", "ham_eval", "pos_eval"],
            runs.iter().flat_map(|r| {
                r.trace.iter().map(move |t| {
                    vec![
                        r.metric.name().into(),
                        r.run.to_string(),
                        t.generation.to_string(),
                        t.best_fitness.to_string(),
                        t.mean_fitness.to_string(),
                        t.eval[0].to_string(),
                        t.eval[1].to_string(),
                        t.eval[2].to_string(),
                    ]
                })
            }),
        ),
    )?;
    io::write_file(
        &out_dir.join("correlations.csv"),
        csv_table(
            &["metric", "run", "lev_vs_ham", "lev_vs_pos"],
            runs.iter().map(|r| {
                let [h, p] = r.trace_correlations();
                vec![r.metric.name().into(), r.run.to_string(), opt(h), opt(p)]
            }),
        ),
    )?;
    io::write_json(&out_dir.join("results.json"), results)
}
