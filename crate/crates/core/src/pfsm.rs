//! The society of seven probabilistic finite-state machines over wake
//! triples and the sliding-window sequencer built on top of it.
//!
//! Every non-homogeneous triple of wake classes is a state of exactly one
//! machine; a machine's states are the distinct orderings of one wake
//! multiset. One application of the society to a window draws (or picks)
//! a target ordering and rearranges the window's aircraft to match it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::domain::{Aircraft, ArrivalSequence, LandingSequence, WakeClass};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of transition probabilities across the society.
pub const TOTAL_TRANSITIONS: usize = 90;

/// Window length the machines operate on.
pub const WINDOW: usize = 3;

/// Three wake classes in window order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WakeTriple(pub [WakeClass; 3]);

const fn wake_from_byte(b: u8) -> WakeClass {
    match b {
        b'H' => WakeClass::Heavy,
        b'L' => WakeClass::Large,
        b'S' => WakeClass::Small,
        _ => panic!("invalid wake byte"),
    }
}

const fn triple(s: &[u8; 3]) -> WakeTriple {
    WakeTriple([wake_from_byte(s[0]), wake_from_byte(s[1]), wake_from_byte(s[2])])
}

impl WakeTriple {
    pub const fn new(a: WakeClass, b: WakeClass, c: WakeClass) -> Self {
        WakeTriple([a, b, c])
    }

    /// Base-3 code in `0..27`.
    #[inline]
    pub const fn code(self) -> usize {
        self.0[0].index() * 9 + self.0[1].index() * 3 + self.0[2].index()
    }

    pub const fn from_code(code: usize) -> WakeTriple {
        WakeTriple([
            WakeClass::ALL[code / 9 % 3],
            WakeClass::ALL[code / 3 % 3],
            WakeClass::ALL[code % 3],
        ])
    }

    pub fn is_homogeneous(self) -> bool {
        self.0[0] == self.0[1] && self.0[1] == self.0[2]
    }

    /// Wake counts in H, L, S order.
    pub fn multiset(self) -> [u8; 3] {
        let mut m = [0; 3];
        for w in self.0 {
            m[w.index()] += 1;
        }
        m
    }
}

impl fmt::Display for WakeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for WakeTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wakes = crate::domain::parse_wakes(s)?;
        match wakes.as_slice() {
            &[a, b, c] => Ok(WakeTriple([a, b, c])),
            _ => Err(Error::SequenceTooShort { len: wakes.len(), min: WINDOW }),
        }
    }
}

/// Identifier of one machine, `1..=7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PfsmId(u8);

impl PfsmId {
    pub const ALL: [PfsmId; 7] = [PfsmId(1), PfsmId(2), PfsmId(3), PfsmId(4), PfsmId(5), PfsmId(6), PfsmId(7)];

    pub fn new(id: u8) -> Option<PfsmId> {
        (1..=7).contains(&id).then_some(PfsmId(id))
    }

    pub const fn get(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize - 1
    }

    /// States in canonical order.
    pub fn states(self) -> &'static [WakeTriple] {
        PFSM_STATES[self.index()]
    }
}

impl fmt::Display for PfsmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PFSM{}", self.0)
    }
}

/// Machine states in canonical order; machine `k` is at index `k - 1`.
pub const PFSM_STATES: [&[WakeTriple]; 7] = [
    &[triple(b"HLS"), triple(b"HSL"), triple(b"LHS"), triple(b"LSH"), triple(b"SHL"), triple(b"SLH")],
    &[triple(b"HHL"), triple(b"LHH"), triple(b"HLH")],
    &[triple(b"HHS"), triple(b"SHH"), triple(b"HSH")],
    &[triple(b"LLH"), triple(b"HLL"), triple(b"LHL")],
    &[triple(b"LLS"), triple(b"SLL"), triple(b"LSL")],
    &[triple(b"SSH"), triple(b"HSS"), triple(b"SHS")],
    &[triple(b"SSL"), triple(b"LSS"), triple(b"SLS")],
];

const NO_MACHINE: u8 = u8::MAX;

/// `code -> (machine index, state index)`, or `NO_MACHINE` for homogeneous
/// triples.
const STATE_LOOKUP: [(u8, u8); 27] = {
    let mut table = [(NO_MACHINE, 0u8); 27];
    let mut m = 0;
    while m < 7 {
        let states = PFSM_STATES[m];
        let mut s = 0;
        while s < states.len() {
            table[states[s].code()] = (m as u8, s as u8);
            s += 1;
        }
        m += 1;
    }
    table
};

/// Result of [`classify_triple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleClass {
    Machine { id: PfsmId, state: usize },
    Homogeneous,
}

/// Finds the machine (and state index) owning a triple.
pub fn classify_triple(t: WakeTriple) -> TripleClass {
    let (m, s) = STATE_LOOKUP[t.code()];
    if m == NO_MACHINE {
        TripleClass::Homogeneous
    } else {
        TripleClass::Machine {
            id: PfsmId(m + 1),
            state: s as usize,
        }
    }
}

/// How a target state is chosen from a transition row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodingMode {
    /// Draw from the row distribution.
    #[default]
    Sample,
    /// Highest-probability target; ties go to the lowest state index.
    Argmax,
}

/// Transition table of one machine, row-major, rows are source states.
#[derive(Debug, Clone, PartialEq)]
pub struct PfsmSpec<T = f64> {
    id: PfsmId,
    transitions: Vec<T>,
}

impl<T: Scalar> PfsmSpec<T> {
    pub fn new(id: PfsmId, rows: Vec<Vec<T>>) -> Result<Self> {
        let n = id.states().len();
        if rows.len() != n {
            return Err(Error::InvalidRow {
                pfsm: id.get(),
                state: rows.len(),
                reason: "wrong number of rows",
            });
        }
        let mut transitions = Vec::with_capacity(n * n);
        for (state, row) in rows.iter().enumerate() {
            validate_row(id, state, row)?;
            transitions.extend_from_slice(row);
        }
        Ok(PfsmSpec { id, transitions })
    }

    pub fn id(&self) -> PfsmId {
        self.id
    }

    pub fn states(&self) -> &'static [WakeTriple] {
        self.id.states()
    }

    pub fn n_states(&self) -> usize {
        self.id.states().len()
    }

    pub fn row(&self, source: usize) -> &[T] {
        let n = self.n_states();
        &self.transitions[source * n..(source + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.transitions.chunks(self.n_states())
    }

    pub fn n_transitions(&self) -> usize {
        self.transitions.len()
    }
}

fn validate_row<T: Scalar>(id: PfsmId, state: usize, row: &[T]) -> Result<()> {
    let err = |reason| Err(Error::InvalidRow { pfsm: id.get(), state, reason });
    if row.len() != id.states().len() {
        return err("wrong row length");
    }
    if row.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
        return err("probability outside [0, 1]");
    }
    let sum: f64 = row.iter().map(|p| p.as_f64()).sum();
    if (sum - 1.0).abs() > T::SUM_TOLERANCE {
        return err("row does not sum to 1");
    }
    Ok(())
}

/// Transition tables of all seven machines.
#[derive(Debug, Clone, PartialEq)]
pub struct SocietyModel<T = f64> {
    machines: Vec<PfsmSpec<T>>,
}

impl<T: Scalar> SocietyModel<T> {
    /// Builds a model from one specification per machine, in id order.
    pub fn new(machines: Vec<PfsmSpec<T>>) -> Result<Self> {
        if machines.len() != 7 || machines.iter().zip(PfsmId::ALL).any(|(m, id)| m.id != id) {
            return Err(Error::InvalidParams(
                "a society needs machines 1..7 in order".into(),
            ));
        }
        Ok(SocietyModel { machines })
    }

    /// Builds every row with `f(machine, source index)`.
    pub fn from_fn(mut f: impl FnMut(PfsmId, usize) -> Vec<T>) -> Result<Self> {
        let machines = PfsmId::ALL
            .iter()
            .map(|&id| PfsmSpec::new(id, (0..id.states().len()).map(|s| f(id, s)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(machines)
    }

    /// Every row uniform over its machine's states.
    pub fn uniform() -> Self {
        Self::from_fn(|id, _| {
            let n = id.states().len();
            vec![T::one() / T::from_usize(n).expect("small integer"); n]
        })
        .expect("uniform rows are valid")
    }

    /// Every state transitions to itself.
    pub fn identity() -> Self {
        Self::from_fn(|id, s| {
            (0..id.states().len())
                .map(|j| if j == s { T::one() } else { T::zero() })
                .collect()
        })
        .expect("identity rows are valid")
    }

    /// Replaces the row of `source`.
    pub fn with_row(mut self, source: WakeTriple, row: Vec<T>) -> Result<Self> {
        let TripleClass::Machine { id, state } = classify_triple(source) else {
            return Err(Error::HomogeneousTriple);
        };
        validate_row(id, state, &row)?;
        let machine = &mut self.machines[id.index()];
        let n = machine.n_states();
        machine.transitions[state * n..(state + 1) * n].copy_from_slice(&row);
        Ok(self)
    }

    /// Replaces the row of `source` with all mass on `target`.
    pub fn with_certain(self, source: WakeTriple, target: WakeTriple) -> Result<Self> {
        let (TripleClass::Machine { id, .. }, TripleClass::Machine { id: tid, state: t }) =
            (classify_triple(source), classify_triple(target))
        else {
            return Err(Error::HomogeneousTriple);
        };
        if id != tid {
            return Err(Error::MultisetMismatch);
        }
        let row = (0..id.states().len())
            .map(|j| if j == t { T::one() } else { T::zero() })
            .collect();
        self.with_row(source, row)
    }

    pub fn machines(&self) -> &[PfsmSpec<T>] {
        &self.machines
    }

    pub fn machine(&self, id: PfsmId) -> &PfsmSpec<T> {
        &self.machines[id.index()]
    }

    pub fn n_transitions(&self) -> usize {
        self.machines.iter().map(PfsmSpec::n_transitions).sum()
    }

    /// Probability of moving from `source` to `target`, if both belong to the
    /// same machine.
    pub fn probability(&self, source: WakeTriple, target: WakeTriple) -> Option<T> {
        match (classify_triple(source), classify_triple(target)) {
            (TripleClass::Machine { id, state: s }, TripleClass::Machine { id: tid, state: t }) if id == tid => {
                Some(self.machine(id).row(s)[t])
            }
            _ => None,
        }
    }

    /// Target state index within the source's machine.
    #[inline]
    fn choose<R: Rng + ?Sized>(&self, id: PfsmId, state: usize, mode: DecodingMode, rng: &mut R) -> usize {
        let row = self.machine(id).row(state);
        match mode {
            DecodingMode::Argmax => {
                let mut best = 0;
                for (j, &p) in row.iter().enumerate().skip(1) {
                    if p > row[best] {
                        best = j;
                    }
                }
                best
            }
            DecodingMode::Sample => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut last_positive = state;
                for (j, &p) in row.iter().enumerate() {
                    let p = p.as_f64();
                    if p > 0.0 {
                        acc += p;
                        last_positive = j;
                        if u < acc {
                            return j;
                        }
                    }
                }
                // rounding left u above the cumulative sum
                last_positive
            }
        }
    }
}

/// Applies one transition of the machine owning `source`.
pub fn step<T: Scalar, R: Rng + ?Sized>(
    model: &SocietyModel<T>,
    source: WakeTriple,
    mode: DecodingMode,
    rng: &mut R,
) -> Result<WakeTriple> {
    match classify_triple(source) {
        TripleClass::Homogeneous => Err(Error::HomogeneousTriple),
        TripleClass::Machine { id, state } => Ok(id.states()[model.choose(id, state, mode, rng)]),
    }
}

/// Positions of `wakes` to read in order so that they spell `target`.
/// Equal wake classes keep their relative order.
fn stable_assignment(wakes: [WakeClass; 3], target: WakeTriple) -> Option<[usize; 3]> {
    let mut used = [false; 3];
    let mut perm = [0; 3];
    for (k, &want) in target.0.iter().enumerate() {
        let j = (0..3).find(|&j| !used[j] && wakes[j] == want)?;
        used[j] = true;
        perm[k] = j;
    }
    Some(perm)
}

/// Rearranges three aircraft so their wake classes read as `target`.
pub fn reorder_window<T: Scalar>(window: [Aircraft<T>; 3], target: WakeTriple) -> Result<[Aircraft<T>; 3]> {
    let perm = stable_assignment(window.map(|a| a.wake), target).ok_or(Error::MultisetMismatch)?;
    Ok(perm.map(|j| window[j]))
}

/// Number of aircraft committed to the output per window application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowStep(u8);

impl WindowStep {
    pub const ONE: WindowStep = WindowStep(1);

    pub fn new(s: usize) -> Result<Self> {
        match s {
            1..=3 => Ok(WindowStep(s as u8)),
            _ => Err(Error::InvalidStep(s)),
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl Default for WindowStep {
    fn default() -> Self {
        Self::ONE
    }
}

/// Reusable buffers for [`landing_order_into`].
#[derive(Debug, Default, Clone)]
pub struct SequencerScratch {
    carry: Vec<usize>,
}

/// Processes one window of arrival indices in place.
#[inline]
fn process_window<T: Scalar, R: Rng + ?Sized>(
    model: &SocietyModel<T>,
    wakes: &[WakeClass],
    window: &mut [usize; 3],
    mode: DecodingMode,
    rng: &mut R,
) {
    let w = window.map(|i| wakes[i]);
    if let TripleClass::Machine { id, state } = classify_triple(WakeTriple(w)) {
        let target = id.states()[model.choose(id, state, mode, rng)];
        let perm = stable_assignment(w, target).expect("targets share the source multiset");
        *window = perm.map(|j| window[j]);
    }
}

/// Sliding-window sequencing over arrival indices. Writes the landing
/// order (indices into `wakes`) to `out`.
pub fn landing_order_into<T: Scalar, R: Rng + ?Sized>(
    model: &SocietyModel<T>,
    wakes: &[WakeClass],
    step: WindowStep,
    mode: DecodingMode,
    rng: &mut R,
    scratch: &mut SequencerScratch,
    out: &mut Vec<usize>,
) -> Result<()> {
    let n = wakes.len();
    if n < WINDOW {
        return Err(Error::SequenceTooShort { len: n, min: WINDOW });
    }
    let s = step.get();
    out.clear();
    let carry = &mut scratch.carry;
    carry.clear();

    let emit = |window: [usize; 3], out: &mut Vec<usize>, carry: &mut Vec<usize>| {
        out.extend_from_slice(&window[..s]);
        carry.clear();
        carry.extend_from_slice(&window[s..]);
    };

    let mut window = [0, 1, 2];
    process_window(model, wakes, &mut window, mode, rng);
    emit(window, out, carry);

    for i in WINDOW..n {
        carry.push(i);
        if carry.len() == WINDOW {
            let mut window = [carry[0], carry[1], carry[2]];
            process_window(model, wakes, &mut window, mode, rng);
            emit(window, out, carry);
        }
    }

    if !carry.is_empty() {
        // pull the last emitted aircraft back in front of the carry so the
        // final window is full again
        let pull = WINDOW - carry.len();
        let mut window = [0; 3];
        window[..pull].copy_from_slice(&out[out.len() - pull..]);
        window[pull..].copy_from_slice(carry);
        out.truncate(out.len() - pull);
        process_window(model, wakes, &mut window, mode, rng);
        out.extend_from_slice(&window);
    }
    debug_assert_eq!(out.len(), n);
    Ok(())
}

/// Turns an arrival sequence into a landing sequence with the society.
pub fn sequence_landing<T: Scalar, R: Rng + ?Sized>(
    model: &SocietyModel<T>,
    arrival: &ArrivalSequence<T>,
    step: WindowStep,
    mode: DecodingMode,
    rng: &mut R,
) -> Result<LandingSequence<T>> {
    let mut order = Vec::with_capacity(arrival.len());
    landing_order_into(
        model,
        &arrival.wakes(),
        step,
        mode,
        rng,
        &mut SequencerScratch::default(),
        &mut order,
    )?;
    LandingSequence::from_order(arrival, &order)
}
