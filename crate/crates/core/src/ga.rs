//! Genetic training of the society's transition probabilities.
//!
//! A chromosome holds one real gene per transition. Genes of one source
//! state form a group that normalises into that state's transition row.
//! Fitness is the mode over training pairs of the per-pair mode of sampled
//! distances to the reference landing order; lower is better.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use rand::Rng;
use rayon::prelude::*;

use crate::domain::WakeClass;
use crate::error::{Error, Result};
use crate::metrics::{self, MetricKind};
use crate::pfsm::{self, DecodingMode, PfsmId, SequencerScratch, SocietyModel, WindowStep, TOTAL_TRANSITIONS};
use crate::scalar::Scalar;
use crate::seeding::{self, derive_seed};
use crate::simulator::SequencePair;

pub const GENE_MIN: f64 = 0.0;
pub const GENE_MAX: f64 = 100.0;
pub const CHROMOSOME_LEN: usize = TOTAL_TRANSITIONS;

// stream tags
const TAG_INIT: u64 = 0x1;
const TAG_FITNESS: u64 = 0x2;
const TAG_OPERATORS: u64 = 0x3;

/// Genes of one source state of one machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneGroup {
    pub pfsm: PfsmId,
    pub source: usize,
    pub start: usize,
    pub len: usize,
}

impl GeneGroup {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Placement of transition groups along the chromosome: machine id
/// ascending, then source state ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChromosomeLayout {
    groups: Vec<GeneGroup>,
}

static CANONICAL_LAYOUT: LazyLock<ChromosomeLayout> = LazyLock::new(|| {
    let mut groups = Vec::new();
    let mut start = 0;
    for id in PfsmId::ALL {
        let n = id.states().len();
        for source in 0..n {
            groups.push(GeneGroup { pfsm: id, source, start, len: n });
            start += n;
        }
    }
    ChromosomeLayout { groups }
});

impl ChromosomeLayout {
    pub fn canonical() -> &'static ChromosomeLayout {
        &CANONICAL_LAYOUT
    }

    pub fn groups(&self) -> &[GeneGroup] {
        &self.groups
    }

    pub fn total_genes(&self) -> usize {
        self.groups.iter().map(|g| g.len).sum()
    }

    /// Layout format version recorded in serialized models.
    pub const VERSION: u32 = 1;
}

/// Real genes in `[0, 100]`, one per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome<T = f64> {
    genes: Vec<T>,
}

impl<T: Scalar> Chromosome<T> {
    pub fn new(genes: Vec<T>) -> Result<Self> {
        if genes.len() != CHROMOSOME_LEN {
            return Err(Error::InvalidParams(format!(
                "chromosome needs {CHROMOSOME_LEN} genes, got {}",
                genes.len()
            )));
        }
        let (lo, hi) = (T::lit(GENE_MIN), T::lit(GENE_MAX));
        if let Some(i) = genes.iter().position(|g| !(*g >= lo && *g <= hi)) {
            return Err(Error::InvalidParams(format!("gene {i} outside [0, 100]")));
        }
        Ok(Chromosome { genes })
    }

    /// Genes drawn uniformly from `[0, 100]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Chromosome {
            genes: (0..CHROMOSOME_LEN).map(|_| random_gene(rng)).collect(),
        }
    }

    pub fn genes(&self) -> &[T] {
        &self.genes
    }

    pub fn into_genes(self) -> Vec<T> {
        self.genes
    }

    /// A chromosome whose decoded model puts all mass on self-transitions.
    pub fn identity() -> Self {
        let mut genes = vec![T::zero(); CHROMOSOME_LEN];
        for g in ChromosomeLayout::canonical().groups() {
            genes[g.start + g.source] = T::lit(GENE_MAX);
        }
        Chromosome { genes }
    }
}

fn random_gene<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.gen_range(GENE_MIN..=GENE_MAX))
}

/// Normalises each gene group into a transition row. Zero-sum groups decode
/// to uniform rows.
pub fn decode<T: Scalar>(c: &Chromosome<T>) -> SocietyModel<T> {
    let layout = ChromosomeLayout::canonical();
    let mut groups = layout.groups().iter();
    SocietyModel::from_fn(|id, source| {
        let g = groups.next().expect("layout covers every row");
        debug_assert_eq!((g.pfsm, g.source), (id, source));
        let genes = &c.genes[g.range()];
        let sum = genes.iter().fold(T::zero(), |acc, &x| acc + x);
        if sum > T::zero() {
            genes.iter().map(|&x| x / sum).collect()
        } else {
            let n = T::from_usize(g.len).expect("small integer");
            vec![T::one() / n; g.len]
        }
    })
    .expect("normalised rows are valid")
}

/// Most frequent value; ties go to the smallest value.
pub fn mode(values: &[usize]) -> Result<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .fold(None, |best: Option<(usize, usize)>, (v, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((v, c)),
        })
        .map(|(v, _)| v)
        .ok_or_else(|| Error::InvalidParams("mode of an empty list".into()))
}

/// How a chromosome is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitnessConfig {
    pub metric: MetricKind,
    /// Sampled landing sequences per training pair.
    pub repeats: usize,
    pub step: WindowStep,
}

impl FitnessConfig {
    pub fn new(metric: MetricKind) -> Self {
        FitnessConfig {
            metric,
            repeats: 10,
            step: WindowStep::ONE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidParams("at least one evaluation per pair".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct PreparedPair {
    id: u64,
    wakes: Vec<WakeClass>,
    reference: Vec<u8>,
}

/// Training pairs reduced to what scoring needs: arrival wakes and the
/// reference wake string.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pairs: Vec<PreparedPair>,
}

impl TrainingSet {
    pub fn new<T: Scalar>(pairs: &[SequencePair<T>]) -> Result<Self> {
        let pairs = pairs
            .iter()
            .map(|p| {
                if p.arrival.len() < pfsm::WINDOW {
                    return Err(Error::SequenceTooShort {
                        len: p.arrival.len(),
                        min: pfsm::WINDOW,
                    });
                }
                Ok(PreparedPair {
                    id: p.id,
                    wakes: p.arrival.wakes(),
                    reference: p.reference.wake_string().into_bytes(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainingSet { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Per-pair modes of sampled distances, in pair order. Pair `i`, repeat
    /// `j` draws from the stream keyed `(stream_key, pair id, j)`.
    pub fn sampled_modes<T: Scalar>(
        &self,
        model: &SocietyModel<T>,
        cfg: &FitnessConfig,
        stream_key: u64,
    ) -> Result<Vec<usize>> {
        cfg.validate()?;
        let mut scratch = SequencerScratch::default();
        let mut order = Vec::new();
        let mut produced = Vec::new();
        let mut dists = Vec::with_capacity(cfg.repeats);
        self.pairs
            .iter()
            .map(|pair| {
                dists.clear();
                for j in 0..cfg.repeats {
                    let mut rng = seeding::stream(stream_key, &[pair.id, j as u64]);
                    pfsm::landing_order_into(
                        model,
                        &pair.wakes,
                        cfg.step,
                        DecodingMode::Sample,
                        &mut rng,
                        &mut scratch,
                        &mut order,
                    )?;
                    produced.clear();
                    produced.extend(order.iter().map(|&i| pair.wakes[i].as_byte()));
                    dists.push(metrics::distance(cfg.metric, &produced, &pair.reference)?);
                }
                mode(&dists)
            })
            .collect()
    }

    /// Stochastic fitness of a decoded model.
    pub fn fitness<T: Scalar>(
        &self,
        model: &SocietyModel<T>,
        cfg: &FitnessConfig,
        stream_key: u64,
    ) -> Result<usize> {
        mode(&self.sampled_modes(model, cfg, stream_key)?)
    }

    /// Maximum-likelihood landing orders as indices into each arrival.
    pub fn argmax_orders<T: Scalar>(&self, model: &SocietyModel<T>, step: WindowStep) -> Result<Vec<Vec<usize>>> {
        let mut scratch = SequencerScratch::default();
        // argmax decoding never draws
        let mut rng = seeding::stream(0, &[]);
        self.pairs
            .iter()
            .map(|pair| {
                let mut order = Vec::with_capacity(pair.wakes.len());
                pfsm::landing_order_into(
                    model,
                    &pair.wakes,
                    step,
                    DecodingMode::Argmax,
                    &mut rng,
                    &mut scratch,
                    &mut order,
                )?;
                Ok(order)
            })
            .collect()
    }

    /// Distances of maximum-likelihood landing strings to the references,
    /// one `[levenshtein, hamming, position]` triple per pair.
    pub fn argmax_distances<T: Scalar>(&self, model: &SocietyModel<T>, step: WindowStep) -> Result<Vec<[usize; 3]>> {
        let orders = self.argmax_orders(model, step)?;
        self.pairs
            .iter()
            .zip(orders)
            .map(|(pair, order)| {
                let produced: Vec<u8> = order.iter().map(|&i| pair.wakes[i].as_byte()).collect();
                let mut out = [0; 3];
                for kind in MetricKind::ALL {
                    out[kind.index()] = metrics::distance(kind, &produced, &pair.reference)?;
                }
                Ok(out)
            })
            .collect()
    }
}

/// Stochastic fitness of a chromosome on `pairs`, drawing from streams
/// derived from `stream_key`.
pub fn fitness<T: Scalar>(
    c: &Chromosome<T>,
    pairs: &[SequencePair<T>],
    cfg: &FitnessConfig,
    stream_key: u64,
) -> Result<usize> {
    TrainingSet::new(pairs)?.fitness(&decode(c), cfg, stream_key)
}

/// Binary tournament over two distinct individuals; the lower fitness wins
/// and ties are broken uniformly. Returns the winner's index.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[usize], rng: &mut R) -> usize {
    assert!(fitness.len() >= 2, "tournament needs at least two individuals");
    let a = rng.gen_range(0..fitness.len());
    let mut b = rng.gen_range(0..fitness.len() - 1);
    if b >= a {
        b += 1;
    }
    match fitness[a].cmp(&fitness[b]) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// With probability `rate`, swaps each locus between the offspring with
/// probability one half; otherwise returns copies of the parents.
pub fn uniform_crossover<T: Scalar, R: Rng + ?Sized>(
    p1: &Chromosome<T>,
    p2: &Chromosome<T>,
    rate: f64,
    rng: &mut R,
) -> (Chromosome<T>, Chromosome<T>) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    if rng.gen_bool(rate.clamp(0.0, 1.0)) {
        for (a, b) in c1.genes.iter_mut().zip(c2.genes.iter_mut()) {
            if rng.gen_bool(0.5) {
                std::mem::swap(a, b);
            }
        }
    }
    (c1, c2)
}

/// Replaces each gene, with probability `rate`, by a uniform draw from
/// `[0, 100]`.
pub fn mutate<T: Scalar, R: Rng + ?Sized>(c: &Chromosome<T>, rate: f64, rng: &mut R) -> Chromosome<T> {
    let rate = rate.clamp(0.0, 1.0);
    Chromosome {
        genes: c
            .genes
            .iter()
            .map(|&g| if rng.gen_bool(rate) { random_gene(rng) } else { g })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 100,
            generations: 1000,
            crossover_rate: 0.9,
            mutation_rate: 1.0 / CHROMOSOME_LEN as f64,
            elitism: 1,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return bad("population must be even and at least 2");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("rates must lie in [0, 1]");
        }
        if self.elitism > self.population {
            return bad("elitism cannot exceed the population size");
        }
        Ok(())
    }
}

/// Statistics of one evaluated generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord<T = f64> {
    pub generation: usize,
    pub best_fitness: usize,
    pub mean_fitness: f64,
    /// Population index of the best individual; with `generation` it keys
    /// the streams its fitness was drawn from.
    pub best_index: usize,
    /// Genotype of the generation's best individual.
    pub best: Chromosome<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution<T = f64> {
    /// Best chromosome by recorded fitness over the whole run.
    pub best: Chromosome<T>,
    pub best_fitness: usize,
    pub best_generation: usize,
    /// One record per evaluated generation, the initial population included.
    pub history: Vec<GenerationRecord<T>>,
}

/// Seed key of the fitness streams for individual `index` of `generation`.
pub fn fitness_stream_key(seed: u64, generation: usize, index: usize) -> u64 {
    derive_seed(seed, &[TAG_FITNESS, generation as u64, index as u64])
}

fn evaluate_population<T: Scalar>(
    population: &[Chromosome<T>],
    set: &TrainingSet,
    cfg: &FitnessConfig,
    seed: u64,
    generation: usize,
) -> Result<Vec<usize>> {
    population
        .par_iter()
        .enumerate()
        .map(|(i, c)| set.fitness(&decode(c), cfg, fitness_stream_key(seed, generation, i)))
        .collect()
}

/// Indices ordered by fitness, then by position.
fn ranked(fitness: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by_key(|&i| (fitness[i], i));
    idx
}

/// Generational GA with elitism, binary tournaments, uniform crossover and
/// uniform-reset mutation. Deterministic for a given seed regardless of the
/// size of the rayon thread pool it runs on.
pub fn evolve<T: Scalar>(
    pairs: &[SequencePair<T>],
    cfg: &FitnessConfig,
    params: &GaParams,
) -> Result<Evolution<T>> {
    evolve_with(pairs, cfg, params, |_, _| {})
}

/// [`evolve`] with a callback receiving each evaluated generation's record
/// and population.
pub fn evolve_with<T: Scalar>(
    pairs: &[SequencePair<T>],
    cfg: &FitnessConfig,
    params: &GaParams,
    mut on_generation: impl FnMut(&GenerationRecord<T>, &[Chromosome<T>]),
) -> Result<Evolution<T>> {
    params.validate()?;
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidParams("no training pairs".into()));
    }
    let set = TrainingSet::new(pairs)?;

    let mut init = seeding::stream(params.seed, &[TAG_INIT]);
    let mut population: Vec<Chromosome<T>> = (0..params.population).map(|_| Chromosome::random(&mut init)).collect();
    let mut history = Vec::with_capacity(params.generations + 1);
    let mut best: Option<(usize, usize, Chromosome<T>)> = None;

    for generation in 0..=params.generations {
        let fitness = evaluate_population(&population, &set, cfg, params.seed, generation)?;
        let order = ranked(&fitness);
        let leader = order[0];
        let record = GenerationRecord {
            generation,
            best_fitness: fitness[leader],
            mean_fitness: fitness.iter().sum::<usize>() as f64 / fitness.len() as f64,
            best_index: leader,
            best: population[leader].clone(),
        };
        if best.as_ref().is_none_or(|(f, _, _)| record.best_fitness < *f) {
            best = Some((record.best_fitness, generation, record.best.clone()));
        }
        on_generation(&record, &population);
        history.push(record);

        if generation == params.generations {
            break;
        }
        let mut rng = seeding::stream(params.seed, &[TAG_OPERATORS, generation as u64]);
        let mut next: Vec<Chromosome<T>> = order[..params.elitism].iter().map(|&i| population[i].clone()).collect();
        while next.len() < params.population {
            let a = tournament_select(&fitness, &mut rng);
            let b = tournament_select(&fitness, &mut rng);
            let (c1, c2) = uniform_crossover(&population[a], &population[b], params.crossover_rate, &mut rng);
            next.push(mutate(&c1, params.mutation_rate, &mut rng));
            if next.len() < params.population {
                next.push(mutate(&c2, params.mutation_rate, &mut rng));
            }
        }
        population = next;
    }

    let (best_fitness, best_generation, best) = best.expect("at least one generation");
    Ok(Evolution {
        best,
        best_fitness,
        best_generation,
        history,
    })
}
