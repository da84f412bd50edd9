//! Reference landing behaviour: random peak-traffic arrivals, first-come
//! first-served scheduling, one-position constrained shifting and the
//! savings rule that picks between them.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::domain::{
    Aircraft, ArrivalSequence, LandingSequence, ScheduleResult, SeparationMatrix, WakeClass,
    PEAK_GAP_BOUND_S,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding;

/// Regeneration attempts allowed per sequence when its wake string collides.
pub const MAX_UNIQUENESS_RETRIES: usize = 1000;

/// Default savings fraction above which the shifted schedule is adopted.
pub const DEFAULT_SAVINGS_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetParams<T = f64> {
    pub n_sequences: usize,
    pub n_aircraft: usize,
    /// Inclusive lower bound of the ETA gap, seconds.
    pub gap_min: T,
    /// Exclusive upper bound of the ETA gap, seconds.
    pub gap_max: T,
    /// Draw weights for H, L, S.
    pub wake_weights: [f64; 3],
    pub seed: u64,
}

impl<T: Scalar> Default for DatasetParams<T> {
    fn default() -> Self {
        DatasetParams {
            n_sequences: 200,
            n_aircraft: 20,
            gap_min: T::lit(1.0),
            gap_max: T::lit(60.0),
            wake_weights: [1.0 / 3.0; 3],
            seed: 0,
        }
    }
}

impl<T: Scalar> DatasetParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n_aircraft == 0 {
            return bad("n_aircraft must be at least 1");
        }
        if self.gap_min < T::zero() || !(self.gap_min < self.gap_max) {
            return bad("ETA gap bounds must satisfy 0 <= min < max");
        }
        if self.gap_max > T::lit(PEAK_GAP_BOUND_S) {
            return bad("ETA gap upper bound must not exceed 60 s");
        }
        if self.wake_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("wake weights must be non-negative");
        }
        if (self.wake_weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("wake weights must sum to 1");
        }
        Ok(())
    }
}

/// Draws `n_sequences` arrival sequences with pairwise distinct wake strings.
///
/// The first ETA of each sequence is 0; each later gap is uniform in
/// `[gap_min, gap_max)`.
pub fn generate_dataset<T: Scalar>(params: &DatasetParams<T>) -> Result<Vec<ArrivalSequence<T>>> {
    params.validate()?;
    let alphabet = params.wake_weights.iter().filter(|w| **w > 0.0).count() as u32;
    let capacity = (alphabet as f64).powi(params.n_aircraft.min(1000) as i32);
    if (params.n_sequences as f64) > capacity {
        return Err(Error::UniquenessInfeasible {
            requested: params.n_sequences,
            retries: 0,
        });
    }

    let mut rng = seeding::stream(params.seed, &[]);
    let wake_dist = WeightedIndex::new(params.wake_weights).expect("weights validated");
    let (lo, hi) = (params.gap_min.as_f64(), params.gap_max.as_f64());
    let mut seen = HashSet::with_capacity(params.n_sequences);
    let mut out = Vec::with_capacity(params.n_sequences);

    while out.len() < params.n_sequences {
        let mut retries = 0;
        let seq = loop {
            let mut eta = 0.0f64;
            let mut aircraft = Vec::with_capacity(params.n_aircraft);
            for id in 0..params.n_aircraft {
                if id > 0 {
                    eta += rng.gen_range(lo..hi);
                }
                let wake = WakeClass::ALL[wake_dist.sample(&mut rng)];
                aircraft.push(Aircraft::new(id as u32, wake, T::lit(eta)));
            }
            let seq = ArrivalSequence::new(aircraft)?;
            if seen.insert(seq.wake_string()) {
                break seq;
            }
            retries += 1;
            if retries > MAX_UNIQUENESS_RETRIES {
                return Err(Error::UniquenessInfeasible {
                    requested: params.n_sequences,
                    retries,
                });
            }
        };
        out.push(seq);
    }
    Ok(out)
}

/// Lands aircraft in the given order as early as ETAs and separations allow.
fn land_in_order<T: Scalar>(aircraft: &[Aircraft<T>], matrix: &SeparationMatrix) -> Vec<T> {
    let mut times: Vec<T> = Vec::with_capacity(aircraft.len());
    for (k, a) in aircraft.iter().enumerate() {
        let t = match k {
            0 => a.eta,
            _ => {
                let earliest = times[k - 1] + T::from_seconds(matrix.get(aircraft[k - 1].wake, a.wake));
                a.eta.max_of(earliest)
            }
        };
        times.push(t);
    }
    times
}

/// First-come first-served: land in arrival order.
pub fn fcfs_schedule<T: Scalar>(
    arrival: &ArrivalSequence<T>,
    matrix: &SeparationMatrix,
) -> Result<ScheduleResult<T>> {
    if arrival.is_empty() {
        return Err(Error::EmptySequence);
    }
    let landing_times = land_in_order(arrival.aircraft(), matrix);
    let makespan = *landing_times.last().expect("non-empty");
    Ok(ScheduleResult {
        order: arrival.as_landing(),
        landing_times,
        makespan,
    })
}

/// Sets of disjoint adjacent transpositions `(i, i+1)` of `0..n`, listed by
/// swap count and then lexicographically by swap positions.
fn one_shift_swap_sets(n: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(current.clone());
        for i in start..n.saturating_sub(1) {
            current.push(i);
            extend(i + 2, n, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(0, n, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn apply_swaps(n: usize, swaps: &[usize]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for &i in swaps {
        perm.swap(i, i + 1);
    }
    perm
}

/// Every permutation of `0..n` that moves no element by more than one
/// position, identity first, then by swap count and swap positions.
///
/// `perm[k]` is the arrival index landing at position `k`.
pub fn one_shift_permutations(n: usize) -> Vec<Vec<usize>> {
    one_shift_swap_sets(n)
        .iter()
        .map(|swaps| apply_swaps(n, swaps))
        .collect()
}

/// What the shifted schedule is optimised for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanObjective {
    /// Landing time of the final aircraft.
    #[default]
    Makespan,
    /// Final landing time minus the first landing time.
    FirstToLast,
}

impl SpanObjective {
    pub fn of<T: Scalar>(self, schedule: &ScheduleResult<T>) -> T {
        match self {
            SpanObjective::Makespan => schedule.makespan,
            SpanObjective::FirstToLast => schedule.first_to_last(),
        }
    }

    fn of_times<T: Scalar>(self, times: &[T]) -> T {
        let last = *times.last().expect("non-empty");
        match self {
            SpanObjective::Makespan => last,
            SpanObjective::FirstToLast => last - times[0],
        }
    }
}

/// 1-position constrained shifting minimising the makespan.
pub fn cps_schedule<T: Scalar>(
    arrival: &ArrivalSequence<T>,
    matrix: &SeparationMatrix,
) -> Result<ScheduleResult<T>> {
    cps_schedule_with(arrival, matrix, SpanObjective::Makespan)
}

/// 1-position constrained shifting. The first candidate in
/// [`one_shift_permutations`] order that attains the optimum wins.
pub fn cps_schedule_with<T: Scalar>(
    arrival: &ArrivalSequence<T>,
    matrix: &SeparationMatrix,
    objective: SpanObjective,
) -> Result<ScheduleResult<T>> {
    if arrival.is_empty() {
        return Err(Error::EmptySequence);
    }
    let src = arrival.aircraft();
    let n = src.len();
    let mut buf = src.to_vec();
    let mut best: Option<(T, Vec<usize>)> = None;
    for swaps in one_shift_swap_sets(n) {
        buf.copy_from_slice(src);
        for &i in &swaps {
            buf.swap(i, i + 1);
        }
        let span = objective.of_times(&land_in_order(&buf, matrix));
        if best.as_ref().is_none_or(|(b, _)| span < *b) {
            best = Some((span, swaps));
        }
    }
    let (_, swaps) = best.expect("identity is always a candidate");
    let order = LandingSequence::from_order(arrival, &apply_swaps(n, &swaps))?;
    let landing_times = land_in_order(order.aircraft(), matrix);
    let makespan = *landing_times.last().expect("non-empty");
    Ok(ScheduleResult {
        order,
        landing_times,
        makespan,
    })
}

/// Which schedule the reference sequencer adopted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    KeptFcfs,
    UsedCps,
}

impl Decision {
    pub fn label(self) -> &'static str {
        match self {
            Decision::KeptFcfs => "FCFS",
            Decision::UsedCps => "CPS",
        }
    }

    pub fn from_label(s: &str) -> Option<Decision> {
        match s {
            "FCFS" => Some(Decision::KeptFcfs),
            "CPS" => Some(Decision::UsedCps),
            _ => None,
        }
    }
}

/// An arrival sequence with the landing order the reference behaviour chose.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair<T = f64> {
    pub id: u64,
    pub arrival: ArrivalSequence<T>,
    pub reference: LandingSequence<T>,
    pub decision: Decision,
}

impl<T: Scalar> SequencePair<T> {
    /// Validates the pair invariants.
    pub fn new(
        id: u64,
        arrival: ArrivalSequence<T>,
        reference: LandingSequence<T>,
        decision: Decision,
    ) -> Result<Self> {
        if !reference.is_permutation_of(&arrival) {
            return Err(Error::NotAPermutation);
        }
        if decision == Decision::KeptFcfs && !reference.preserves_order_of(&arrival) {
            return Err(Error::InvalidParams(
                "an FCFS pair must keep the arrival order".into(),
            ));
        }
        Ok(SequencePair {
            id,
            arrival,
            reference,
            decision,
        })
    }
}

/// Settings of the reference behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequencerConfig<T = f64> {
    pub matrix: SeparationMatrix,
    pub savings_threshold: T,
    pub objective: SpanObjective,
}

impl<T: Scalar> Default for SequencerConfig<T> {
    fn default() -> Self {
        SequencerConfig {
            matrix: SeparationMatrix::FAA,
            savings_threshold: T::lit(DEFAULT_SAVINGS_THRESHOLD),
            objective: SpanObjective::Makespan,
        }
    }
}

/// Adopts the shifted schedule when it saves at least `savings_threshold`
/// of the FCFS makespan. The returned pair has id 0.
pub fn reference_sequencer<T: Scalar>(
    arrival: &ArrivalSequence<T>,
    matrix: &SeparationMatrix,
    savings_threshold: T,
) -> Result<SequencePair<T>> {
    reference_sequencer_with(
        arrival,
        &SequencerConfig {
            matrix: *matrix,
            savings_threshold,
            objective: SpanObjective::Makespan,
        },
    )
}

pub fn reference_sequencer_with<T: Scalar>(
    arrival: &ArrivalSequence<T>,
    config: &SequencerConfig<T>,
) -> Result<SequencePair<T>> {
    let threshold = config.savings_threshold;
    if threshold < T::zero() || threshold >= T::one() {
        return Err(Error::InvalidParams(
            "savings threshold must lie in [0, 1)".into(),
        ));
    }
    let fcfs = fcfs_schedule(arrival, &config.matrix)?;
    let cps = cps_schedule_with(arrival, &config.matrix, config.objective)?;
    let base = config.objective.of(&fcfs);
    let improved = config.objective.of(&cps);
    let use_cps = base > T::zero() && (base - improved) / base >= threshold;
    let (reference, decision) = if use_cps {
        (cps.order, Decision::UsedCps)
    } else {
        (fcfs.order, Decision::KeptFcfs)
    };
    SequencePair::new(0, arrival.clone(), reference, decision)
}

/// Labels every arrival sequence; pair ids are the dataset indices.
pub fn label_dataset<T: Scalar>(
    arrivals: &[ArrivalSequence<T>],
    config: &SequencerConfig<T>,
) -> Result<Vec<SequencePair<T>>> {
    arrivals
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut pair = reference_sequencer_with(a, config)?;
            pair.id = i as u64;
            Ok(pair)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn seq(wakes: &str, etas: &[f64]) -> ArrivalSequence {
        ArrivalSequence::from_wakes(wakes, etas).unwrap()
    }

    // Step-by-step recomputation straight from the FAA table.
    fn hand_fcfs(wakes: &str, etas: &[f64]) -> Vec<f64> {
        let table = [[96.0, 157.0, 196.0], [60.0, 69.0, 131.0], [60.0, 69.0, 82.0]];
        let idx = |c: char| "HLS".find(c).unwrap();
        let w: Vec<usize> = wakes.chars().map(idx).collect();
        let mut t = vec![etas[0]];
        for k in 1..w.len() {
            let prev = t[k - 1] + table[w[k - 1]][w[k]];
            t.push(if etas[k] > prev { etas[k] } else { prev });
        }
        t
    }

    #[test]
    fn fcfs_examples() {
        let m = SeparationMatrix::FAA;
        let r = fcfs_schedule(&seq("HL", &[0.0, 50.0]), &m).unwrap();
        assert_eq!(r.landing_times, vec![0.0, 157.0]);
        assert_eq!(r.landing_times, hand_fcfs("HL", &[0.0, 50.0]));
        assert_eq!(r.makespan, 157.0);

        let r = fcfs_schedule(&seq("H", &[0.0]), &m).unwrap();
        assert_eq!(r.landing_times, vec![0.0]);
        assert_eq!(r.makespan, 0.0);

        let etas = [0.0, 10.0, 20.0];
        let r = fcfs_schedule(&seq("HSL", &etas), &m).unwrap();
        assert_eq!(hand_fcfs("HSL", &etas), vec![0.0, 196.0, 265.0]);
        assert_eq!(r.landing_times, vec![0.0, 196.0, 265.0]);
        assert_eq!(r.makespan, 265.0);
        r.verify(&m).unwrap();
    }

    #[test]
    fn fcfs_rejects_empty() {
        let empty = ArrivalSequence::<f64>::new(vec![]).unwrap();
        assert_eq!(fcfs_schedule(&empty, &SeparationMatrix::FAA), Err(Error::EmptySequence));
        assert_eq!(cps_schedule(&empty, &SeparationMatrix::FAA), Err(Error::EmptySequence));
    }

    #[test]
    fn fcfs_waits_for_late_eta() {
        let r = fcfs_schedule(&seq("SS", &[0.0, 500.0]), &SeparationMatrix::FAA).unwrap();
        assert_eq!(r.landing_times, vec![0.0, 500.0]);
    }

    #[test]
    fn one_shift_small_cases() {
        assert_eq!(one_shift_permutations(1), vec![vec![0]]);
        assert_eq!(
            one_shift_permutations(3),
            vec![vec![0, 1, 2], vec![1, 0, 2], vec![0, 2, 1]]
        );
        assert_eq!(one_shift_permutations(4).len(), 5);
        assert_eq!(one_shift_permutations(5).len(), 8);
        assert_eq!(one_shift_permutations(20).len(), 10946);
    }

    #[test]
    fn cps_examples() {
        let m = SeparationMatrix::FAA;
        let r = cps_schedule(&seq("HSL", &[0.0, 10.0, 20.0]), &m).unwrap();
        assert_eq!(r.order.wake_string(), "SHL");
        assert_eq!(r.landing_times, vec![10.0, 70.0, 227.0]);
        assert_eq!(r.makespan, 227.0);
        r.verify(&m).unwrap();

        let r = cps_schedule(&seq("H", &[0.0]), &m).unwrap();
        assert_eq!(r.makespan, 0.0);

        let arrival = seq("LLL", &[0.0, 30.0, 59.0]);
        let r = cps_schedule(&arrival, &m).unwrap();
        assert!(r.order.preserves_order_of(&arrival));
    }

    #[test]
    fn first_to_last_objective() {
        let m = SeparationMatrix::FAA;
        let arrival = seq("HSL", &[0.0, 10.0, 20.0]);
        let r = cps_schedule_with(&arrival, &m, SpanObjective::FirstToLast).unwrap();
        // HSL 265, SHL 217, HLS 288
        assert_eq!(r.order.wake_string(), "SHL");
        assert_eq!(r.first_to_last(), 217.0);
    }

    #[test]
    fn reference_decisions() {
        let m = SeparationMatrix::FAA;
        let arrival = seq("HSL", &[0.0, 10.0, 20.0]);
        let p = reference_sequencer(&arrival, &m, 0.05).unwrap();
        assert_eq!(p.decision, Decision::UsedCps);
        assert_eq!(p.reference.wake_string(), "SHL");

        let p = reference_sequencer(&arrival, &m, 0.20).unwrap();
        assert_eq!(p.decision, Decision::KeptFcfs);
        assert_eq!(p.reference.wake_string(), "HSL");

        let homogeneous = seq("SSSS", &[0.0, 1.0, 2.0, 3.0]);
        let p = reference_sequencer(&homogeneous, &m, 0.05).unwrap();
        assert_eq!(p.decision, Decision::KeptFcfs);

        assert!(reference_sequencer(&arrival, &m, 1.0).is_err());
        assert!(reference_sequencer(&arrival, &m, -0.1).is_err());
    }

    #[test]
    fn exact_rational_schedules() {
        let etas: Vec<Rational64> = [0, 10, 20].iter().map(|&e| Rational64::from_integer(e)).collect();
        let arrival = ArrivalSequence::from_wakes("HSL", &etas).unwrap();
        let m = SeparationMatrix::FAA;
        let p = reference_sequencer(&arrival, &m, Rational64::new(1, 20)).unwrap();
        assert_eq!(p.decision, Decision::UsedCps);
        let cps = cps_schedule(&arrival, &m).unwrap();
        assert_eq!(cps.makespan, Rational64::from_integer(227));
        // savings are exactly 38/265
        let fcfs = fcfs_schedule(&arrival, &m).unwrap();
        assert_eq!(
            (fcfs.makespan - cps.makespan) / fcfs.makespan,
            Rational64::new(38, 265)
        );
    }

    #[test]
    fn dataset_contract() {
        let params = DatasetParams::<f64> {
            n_sequences: 1,
            n_aircraft: 3,
            seed: 11,
            ..DatasetParams::default()
        };
        let data = generate_dataset(&params).unwrap();
        assert_eq!(data.len(), 1);
        let a = data[0].aircraft();
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].eta, 0.0);
        for w in a.windows(2) {
            let gap = w[1].eta - w[0].eta;
            assert!((1.0..60.0).contains(&gap), "gap {gap}");
        }
        assert_eq!(generate_dataset(&params).unwrap(), data);
    }

    #[test]
    fn default_dataset_is_unique() {
        let params = DatasetParams::<f64> { seed: 5, ..DatasetParams::default() };
        let data = generate_dataset(&params).unwrap();
        assert_eq!(data.len(), 200);
        assert!(data.iter().all(|s| s.len() == 20));
        let distinct: HashSet<String> = data.iter().map(|s| s.wake_string()).collect();
        assert_eq!(distinct.len(), 200);
        for s in &data {
            assert!(s.max_gap() < 60.0);
        }
    }

    #[test]
    fn infeasible_uniqueness() {
        let params = DatasetParams::<f64> {
            n_sequences: 10,
            n_aircraft: 2,
            ..DatasetParams::default()
        };
        assert!(matches!(
            generate_dataset(&params),
            Err(Error::UniquenessInfeasible { .. })
        ));
        let single_class = DatasetParams::<f64> {
            n_sequences: 2,
            n_aircraft: 5,
            wake_weights: [1.0, 0.0, 0.0],
            ..DatasetParams::default()
        };
        assert!(generate_dataset(&single_class).is_err());
    }

    #[test]
    fn invalid_params() {
        let mut p = DatasetParams::<f64>::default();
        p.gap_max = 61.0;
        assert!(p.validate().is_err());
        let mut p = DatasetParams::<f64>::default();
        p.wake_weights = [0.5, 0.5, 0.5];
        assert!(p.validate().is_err());
        let mut p = DatasetParams::<f64>::default();
        p.gap_min = 70.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn fcfs_pair_must_keep_order() {
        let arrival = seq("HSL", &[0.0, 10.0, 20.0]);
        let shifted = LandingSequence::from_order(&arrival, &[1, 0, 2]).unwrap();
        assert!(SequencePair::new(0, arrival.clone(), shifted.clone(), Decision::KeptFcfs).is_err());
        assert!(SequencePair::new(0, arrival, shifted, Decision::UsedCps).is_ok());
    }
}
