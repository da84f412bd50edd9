//! Evaluation of trained individuals and summary statistics over the results.

use landing_core::ga::{decode, mode};
use landing_core::{Chromosome, GenerationRecord, MetricKind, Model, Pair, TrainingSet, WindowStep};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Splits `pairs` in order: the first `train_n` train, the next `test_n` test.
pub fn split_dataset<P: Clone>(pairs: &[P], train_n: usize, test_n: usize) -> Result<(Vec<P>, Vec<P>)> {
    if train_n + test_n > pairs.len() {
        return Err(HarnessError::Config(format!(
            "split {train_n}/{test_n} needs {} pairs, only {} available",
            train_n + test_n,
            pairs.len()
        )));
    }
    Ok((pairs[..train_n].to_vec(), pairs[train_n..train_n + test_n].to_vec()))
}

/// Box-plot statistics of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    /// Values beyond 1.5 IQR from the quartiles, ascending.
    pub outliers: Vec<f64>,
    pub mean: f64,
    pub count: usize,
}

/// Quantile by linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl DistributionSummary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q25 = quantile(&sorted, 0.25);
        let q75 = quantile(&sorted, 0.75);
        let fence = 1.5 * (q75 - q25);
        Some(DistributionSummary {
            min: sorted[0],
            q25,
            median: quantile(&sorted, 0.5),
            q75,
            max: sorted[sorted.len() - 1],
            outliers: sorted.iter().copied().filter(|&v| v < q25 - fence || v > q75 + fence).collect(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            count: sorted.len(),
        })
    }

    pub fn of_counts(values: &[usize]) -> Option<Self> {
        Self::of(&values.iter().map(|&v| v as f64).collect::<Vec<_>>())
    }
}

/// One test pair's maximum-likelihood landing and its distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub seq_id: u64,
    pub landing_wakes: String,
    pub landing_ids: Vec<u32>,
    pub levenshtein: usize,
    pub hamming: usize,
    pub position: usize,
}

impl PairResult {
    pub fn distance(&self, kind: MetricKind) -> usize {
        match kind {
            MetricKind::Levenshtein => self.levenshtein,
            MetricKind::Hamming => self.hamming,
            MetricKind::Position => self.position,
        }
    }
}

/// A value per metric, serialized by metric name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerMetric<V> {
    pub levenshtein: V,
    pub hamming: V,
    pub position: V,
}

impl<V> PerMetric<V> {
    pub fn from_fn(mut f: impl FnMut(MetricKind) -> V) -> Self {
        PerMetric {
            levenshtein: f(MetricKind::Levenshtein),
            hamming: f(MetricKind::Hamming),
            position: f(MetricKind::Position),
        }
    }

    pub fn get(&self, kind: MetricKind) -> &V {
        match kind {
            MetricKind::Levenshtein => &self.levenshtein,
            MetricKind::Hamming => &self.hamming,
            MetricKind::Position => &self.position,
        }
    }

    pub fn to_array(&self) -> [V; 3]
    where
        V: Clone,
    {
        [self.levenshtein.clone(), self.hamming.clone(), self.position.clone()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub pairs: Vec<PairResult>,
    /// Most frequent value per metric; `None` when there are no pairs.
    pub modes: PerMetric<Option<usize>>,
    pub summaries: PerMetric<Option<DistributionSummary>>,
}

impl Evaluation {
    pub fn values(&self, kind: MetricKind) -> Vec<usize> {
        self.pairs.iter().map(|p| p.distance(kind)).collect()
    }
}

/// Lands every pair once with maximum-likelihood decoding and scores the
/// result against the reference under all three metrics.
pub fn evaluate_model(model: &Model, pairs: &[Pair], step: WindowStep) -> Result<Evaluation> {
    let set = TrainingSet::new(pairs)?;
    let orders = set.argmax_orders(model, step)?;
    let distances = set.argmax_distances(model, step)?;
    let results: Vec<PairResult> = pairs
        .iter()
        .zip(orders)
        .zip(distances)
        .map(|((p, order), d)| {
            let aircraft = p.arrival.aircraft();
            PairResult {
                seq_id: p.id,
                landing_wakes: order.iter().map(|&i| aircraft[i].wake.as_char()).collect(),
                landing_ids: order.iter().map(|&i| aircraft[i].id).collect(),
                levenshtein: d[0],
                hamming: d[1],
                position: d[2],
            }
        })
        .collect();
    let column = |k: MetricKind| results.iter().map(|r| r.distance(k)).collect::<Vec<_>>();
    Ok(Evaluation {
        modes: PerMetric::from_fn(|k| mode(&column(k)).ok()),
        summaries: PerMetric::from_fn(|k| DistributionSummary::of_counts(&column(k))),
        pairs: results,
    })
}

pub fn evaluate_individual(c: &Chromosome, pairs: &[Pair], step: WindowStep) -> Result<Evaluation> {
    evaluate_model(&decode(c), pairs, step)
}

/// Number of pairs whose distance is at most the threshold, per metric.
pub fn count_below(results: &[PairResult], thresholds: &PerMetric<usize>) -> PerMetric<usize> {
    PerMetric::from_fn(|k| results.iter().filter(|r| r.distance(k) <= *thresholds.get(k)).count())
}

/// One generation of a training trace: the recorded fitness plus the
/// maximum-likelihood modes of the generation's best individual.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub generation: usize,
    pub best_fitness: usize,
    pub mean_fitness: f64,
    /// Levenshtein, Hamming and Position modes.
    pub eval: [usize; 3],
}

fn argmax_modes(set: &TrainingSet, c: &Chromosome, step: WindowStep) -> Result<[usize; 3]> {
    let d = set.argmax_distances(&decode(c), step)?;
    let mut out = [0; 3];
    for k in 0..3 {
        out[k] = mode(&d.iter().map(|x| x[k]).collect::<Vec<_>>())?;
    }
    Ok(out)
}

/// Evaluates each generation's best individual on `pairs` under all three
/// metrics. Runs of an unchanged best genotype are evaluated once.
pub fn cross_metric_history(history: &[GenerationRecord], pairs: &[Pair], step: WindowStep) -> Result<Vec<TraceRow>> {
    if history.is_empty() {
        return Err(HarnessError::Config("empty training history".into()));
    }
    let set = TrainingSet::new(pairs)?;
    let starts: Vec<usize> = (0..history.len()).filter(|&i| i == 0 || history[i].best != history[i - 1].best).collect();
    let evals = starts
        .par_iter()
        .map(|&i| argmax_modes(&set, &history[i].best, step))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(history.len());
    let mut k = 0;
    for (i, r) in history.iter().enumerate() {
        if k + 1 < starts.len() && starts[k + 1] == i {
            k += 1;
        }
        rows.push(TraceRow {
            generation: r.generation,
            best_fitness: r.best_fitness,
            mean_fitness: r.mean_fitness,
            eval: evals[k],
        });
    }
    Ok(rows)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(HarnessError::Degenerate("series differ in length"));
    }
    if xs.len() < 2 {
        return Err(HarnessError::Degenerate("need at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(HarnessError::Degenerate("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use landing_core::simulator::label_dataset;
    use landing_core::{Arrival, Decision, SequencerConfig};

    #[test]
    fn split_examples() {
        let pairs: Vec<u32> = (0..200).collect();
        let (train, test) = split_dataset(&pairs, 100, 100).unwrap();
        assert_eq!(train, (0..100).collect::<Vec<_>>());
        assert_eq!(test, (100..200).collect::<Vec<_>>());
        assert_eq!(split_dataset(&[0, 1], 1, 1).unwrap(), (vec![0], vec![1]));
        assert!(split_dataset(&[0, 1], 2, 1).is_err());
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        // cov = 5/2, var x = 1, var y = 19/3
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        assert!((r - 2.5 / (19.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.99339).abs() < 1e-5);
        assert!(pearson(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(pearson(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn summary_of_known_sample() {
        let s = DistributionSummary::of(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((s.min, s.q25, s.median, s.q75, s.max), (1.0, 2.0, 3.0, 4.0, 100.0));
        assert_eq!(s.outliers, vec![100.0]);
        assert_eq!(s.mean, 22.0);
        assert_eq!(s.count, 5);
        let s = DistributionSummary::of(&[0.0, 10.0]).unwrap();
        assert_eq!((s.q25, s.median, s.q75), (2.5, 5.0, 7.5));
        assert!(DistributionSummary::of(&[]).is_none());
    }

    fn fcfs_pairs() -> Vec<Pair> {
        let arrivals: Vec<Arrival> = ["HLSHLS", "SSLLHH", "HHHLLL"]
            .iter()
            .map(|w| Arrival::from_wakes(w, &[0.0, 200.0, 400.0, 600.0, 800.0, 1000.0]).unwrap())
            .collect();
        let pairs = label_dataset(&arrivals, &SequencerConfig::default()).unwrap();
        assert!(pairs.iter().all(|p| p.decision == Decision::KeptFcfs));
        pairs
    }

    #[test]
    fn identity_scores_zero_and_counts_everything() {
        let pairs = fcfs_pairs();
        let eval = evaluate_individual(&Chromosome::identity(), &pairs, WindowStep::ONE).unwrap();
        assert_eq!(eval.modes, PerMetric { levenshtein: Some(0), hamming: Some(0), position: Some(0) });
        let counts = count_below(&eval.pairs, &PerMetric { levenshtein: 6, hamming: 6, position: 8 });
        assert_eq!(counts, PerMetric { levenshtein: 3, hamming: 3, position: 3 });
        assert_eq!(count_below(&[], &PerMetric::default()), PerMetric::default());
        assert_eq!(evaluate_individual(&Chromosome::identity(), &pairs, WindowStep::ONE).unwrap(), eval);
    }

    #[test]
    fn constant_history_gives_constant_traces() {
        let pairs = fcfs_pairs();
        let c = Chromosome::random(&mut landing_core::seeding::stream(3, &[]));
        let history: Vec<GenerationRecord> = (0..4)
            .map(|g| GenerationRecord { generation: g, best_fitness: 2, mean_fitness: 3.5, best_index: 0, best: c.clone() })
            .collect();
        let rows = cross_metric_history(&history, &pairs, WindowStep::ONE).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|w| w[0].eval == w[1].eval));
        assert_eq!(cross_metric_history(&history[..1], &pairs, WindowStep::ONE).unwrap().len(), 1);
        assert!(cross_metric_history(&[], &pairs, WindowStep::ONE).is_err());
    }
}
