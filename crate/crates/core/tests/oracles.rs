//! Brute-force oracles checked against the optimised implementations.

use landing_core::metrics::{hamming, levenshtein, position_distance};
use landing_core::seeding;
use landing_core::simulator::{cps_schedule, fcfs_schedule, generate_dataset, one_shift_permutations};
use landing_core::{Arrival, DatasetParams, SeparationMatrix};
use rand::Rng;

const TABLE: [[f64; 3]; 3] = [[96.0, 157.0, 196.0], [60.0, 69.0, 131.0], [60.0, 69.0, 82.0]];

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn fibonacci(n: usize) -> usize {
    let (mut a, mut b) = (1, 1);
    for _ in 2..n {
        (a, b) = (b, a + b);
    }
    b
}

fn one_shift_by_filter(n: usize) -> Vec<Vec<usize>> {
    all_permutations(n)
        .into_iter()
        .filter(|p| p.iter().enumerate().all(|(i, &v)| i.abs_diff(v) <= 1))
        .collect()
}

fn oracle_makespan(wakes: &[usize], etas: &[f64], perm: &[usize]) -> f64 {
    let mut t = etas[perm[0]];
    for k in 1..perm.len() {
        let earliest = t + TABLE[wakes[perm[k - 1]]][wakes[perm[k]]];
        t = if etas[perm[k]] > earliest { etas[perm[k]] } else { earliest };
    }
    t
}

/// Swap positions of a one-shift permutation, for the tie-break key.
fn swaps_of(perm: &[usize]) -> Vec<usize> {
    (0..perm.len()).filter(|&i| perm[i] == i + 1).collect()
}

#[test]
fn one_shift_counts_follow_fibonacci() {
    for n in 1..=8 {
        let mut mine = one_shift_permutations(n);
        let mut brute = one_shift_by_filter(n);
        mine.sort();
        brute.sort();
        assert_eq!(mine, brute, "n = {n}");
    }
    assert_eq!(one_shift_by_filter(3).len(), 3);
    assert_eq!(one_shift_by_filter(4).len(), 5);
    assert_eq!(one_shift_by_filter(5).len(), 8);
    for n in 1..=10 {
        assert_eq!(one_shift_permutations(n).len(), fibonacci(n + 1), "n = {n}");
    }
}

#[test]
fn cps_matches_exhaustive_search() {
    let m = SeparationMatrix::FAA;
    let mut rng = seeding::stream(1234, &[]);
    for n in 3..=8 {
        let candidates = one_shift_by_filter(n);
        for _ in 0..100 {
            let wakes: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let mut etas = vec![0.0];
            for _ in 1..n {
                let last = *etas.last().unwrap();
                etas.push(last + rng.gen_range(1.0..60.0));
            }
            let wake_str: String = wakes.iter().map(|&w| ['H', 'L', 'S'][w]).collect();
            let arrival = Arrival::from_wakes(&wake_str, &etas).unwrap();

            let (best_span, best_perm) = candidates
                .iter()
                .map(|p| (oracle_makespan(&wakes, &etas, p), p))
                .min_by(|(sa, pa), (sb, pb)| {
                    sa.partial_cmp(sb)
                        .unwrap()
                        .then_with(|| swaps_of(pa).len().cmp(&swaps_of(pb).len()))
                        .then_with(|| swaps_of(pa).cmp(&swaps_of(pb)))
                })
                .unwrap();

            let cps = cps_schedule(&arrival, &m).unwrap();
            assert_eq!(cps.makespan, best_span, "{wake_str} {etas:?}");
            let ids: Vec<usize> = cps.order.ids().iter().map(|&i| i as usize).collect();
            assert_eq!(&ids, best_perm, "{wake_str} {etas:?}");
            cps.verify(&m).unwrap();

            let fcfs = fcfs_schedule(&arrival, &m).unwrap();
            fcfs.verify(&m).unwrap();
            assert!(cps.makespan <= fcfs.makespan);
            assert_eq!(fcfs.makespan, oracle_makespan(&wakes, &etas, &(0..n).collect::<Vec<_>>()));
        }
    }
}

#[test]
fn generated_schedules_satisfy_invariants() {
    let m = SeparationMatrix::FAA;
    let data = generate_dataset(&DatasetParams::<f64> {
        n_sequences: 30,
        seed: 3,
        ..DatasetParams::default()
    })
    .unwrap();
    for a in &data {
        for s in [fcfs_schedule(a, &m).unwrap(), cps_schedule(a, &m).unwrap()] {
            s.verify(&m).unwrap();
            assert!(s.order.is_permutation_of(a));
        }
    }
}

/// Minimum over every per-class bijection of summed displacement.
fn position_by_assignment(a: &[u8], b: &[u8]) -> usize {
    let mut total = 0;
    for c in [b'H', b'L', b'S'] {
        let pa: Vec<usize> = (0..a.len()).filter(|&i| a[i] == c).collect();
        let pb: Vec<usize> = (0..b.len()).filter(|&i| b[i] == c).collect();
        assert_eq!(pa.len(), pb.len());
        if pa.is_empty() {
            continue;
        }
        total += all_permutations(pa.len())
            .iter()
            .map(|perm| pa.iter().zip(perm).map(|(&i, &j)| i.abs_diff(pb[j])).sum::<usize>())
            .min()
            .unwrap();
    }
    total
}

fn shuffled(s: &[u8], rng: &mut impl Rng) -> Vec<u8> {
    let mut v = s.to_vec();
    for i in (1..v.len()).rev() {
        v.swap(i, rng.gen_range(0..=i));
    }
    v
}

fn random_wakes(len: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..len).map(|_| b"HLS"[rng.gen_range(0..3)]).collect()
}

#[test]
fn position_distance_is_optimal_assignment() {
    let mut rng = seeding::stream(99, &[]);
    for _ in 0..500 {
        let len = rng.gen_range(1..=8);
        let a = random_wakes(len, &mut rng);
        let b = shuffled(&a, &mut rng);
        assert_eq!(position_distance(&a, &b).unwrap(), position_by_assignment(&a, &b));
    }
    assert_eq!(position_by_assignment(b"SLLHLH", b"LLHLHS"), 10);
}

// Textbook full-matrix edit distance.
fn levenshtein_full(a: &[u8], b: &[u8]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

#[test]
fn levenshtein_matches_full_matrix() {
    let mut rng = seeding::stream(7, &[]);
    for _ in 0..1000 {
        let a = random_wakes(rng.gen_range(0..25), &mut rng);
        let b = random_wakes(rng.gen_range(0..25), &mut rng);
        assert_eq!(levenshtein(&a, &b), levenshtein_full(&a, &b));
    }
    assert_eq!(hamming("HHLSLLLSHHSLLSSSLHHL", "HHSLLLLSSHHSLLSSLHHL").unwrap(), 6);
}
