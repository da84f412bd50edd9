//! Traffic vocabulary: wake classes, aircraft, sequences, separations and
//! schedules.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default upper bound (exclusive) on successive ETA gaps during peak traffic.
pub const PEAK_GAP_BOUND_S: f64 = 60.0;

/// Wake turbulence category of an aircraft.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WakeClass {
    Heavy,
    Large,
    Small,
}

impl WakeClass {
    pub const ALL: [WakeClass; 3] = [WakeClass::Heavy, WakeClass::Large, WakeClass::Small];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            WakeClass::Heavy => 0,
            WakeClass::Large => 1,
            WakeClass::Small => 2,
        }
    }

    #[inline]
    pub const fn as_char(self) -> char {
        self.as_byte() as char
    }

    #[inline]
    pub const fn as_byte(self) -> u8 {
        match self {
            WakeClass::Heavy => b'H',
            WakeClass::Large => b'L',
            WakeClass::Small => b'S',
        }
    }

    pub const fn from_char(c: char) -> Option<WakeClass> {
        match c {
            'H' => Some(WakeClass::Heavy),
            'L' => Some(WakeClass::Large),
            'S' => Some(WakeClass::Small),
            _ => None,
        }
    }
}

impl fmt::Display for WakeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl TryFrom<char> for WakeClass {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        Self::from_char(c).ok_or(Error::InvalidWake(c))
    }
}

/// Parses a string over `{H, L, S}` into wake classes.
pub fn parse_wakes(s: &str) -> Result<Vec<WakeClass>> {
    s.chars().map(WakeClass::try_from).collect()
}

/// Renders wake classes as an `H`/`L`/`S` string.
pub fn render_wakes<I: IntoIterator<Item = WakeClass>>(wakes: I) -> String {
    wakes.into_iter().map(WakeClass::as_char).collect()
}

/// One aircraft in a traffic sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aircraft<T = f64> {
    pub id: u32,
    pub wake: WakeClass,
    /// Estimated time of arrival at the runway, in seconds.
    pub eta: T,
}

impl<T: Scalar> Aircraft<T> {
    pub fn new(id: u32, wake: WakeClass, eta: T) -> Self {
        Aircraft { id, wake, eta }
    }
}

fn check_unique_ids<T>(aircraft: &[Aircraft<T>]) -> Result<()> {
    let mut seen = HashSet::with_capacity(aircraft.len());
    for a in aircraft {
        if !seen.insert(a.id) {
            return Err(Error::DuplicateId(a.id));
        }
    }
    Ok(())
}

/// Aircraft in order of non-decreasing ETA.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalSequence<T = f64> {
    aircraft: Vec<Aircraft<T>>,
}

impl<T: Scalar> ArrivalSequence<T> {
    /// Validates id uniqueness, non-negative ETAs and ETA ordering.
    pub fn new(aircraft: Vec<Aircraft<T>>) -> Result<Self> {
        check_unique_ids(&aircraft)?;
        for (position, a) in aircraft.iter().enumerate() {
            let eta = a.eta.as_f64();
            if !(eta.is_finite() && a.eta >= T::zero()) {
                return Err(Error::InvalidEta { position });
            }
        }
        if let Some(position) = aircraft.windows(2).position(|w| w[1].eta < w[0].eta) {
            return Err(Error::UnorderedEta {
                position: position + 1,
            });
        }
        Ok(ArrivalSequence { aircraft })
    }

    /// Like [`ArrivalSequence::new`], additionally requiring every successive
    /// ETA gap to be strictly below `gap_bound` seconds.
    pub fn peak_traffic(aircraft: Vec<Aircraft<T>>, gap_bound: T) -> Result<Self> {
        let seq = Self::new(aircraft)?;
        if let Some(position) = seq
            .aircraft
            .windows(2)
            .position(|w| w[1].eta - w[0].eta >= gap_bound)
        {
            return Err(Error::GapTooLarge {
                position: position + 1,
            });
        }
        Ok(seq)
    }

    /// Builds a sequence from a wake string and matching ETAs; ids are the
    /// arrival positions.
    pub fn from_wakes(wakes: &str, etas: &[T]) -> Result<Self> {
        let wakes = parse_wakes(wakes)?;
        if wakes.len() != etas.len() {
            return Err(Error::InvalidParams(format!(
                "{} wake classes but {} ETAs",
                wakes.len(),
                etas.len()
            )));
        }
        Self::new(
            wakes
                .into_iter()
                .zip(etas)
                .enumerate()
                .map(|(i, (w, &eta))| Aircraft::new(i as u32, w, eta))
                .collect(),
        )
    }

    pub fn aircraft(&self) -> &[Aircraft<T>] {
        &self.aircraft
    }

    pub fn len(&self) -> usize {
        self.aircraft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aircraft.is_empty()
    }

    pub fn wakes(&self) -> Vec<WakeClass> {
        self.aircraft.iter().map(|a| a.wake).collect()
    }

    pub fn wake_string(&self) -> String {
        render_wakes(self.aircraft.iter().map(|a| a.wake))
    }

    /// Largest gap between successive ETAs; zero for fewer than two aircraft.
    pub fn max_gap(&self) -> T {
        self.aircraft
            .windows(2)
            .map(|w| w[1].eta - w[0].eta)
            .fold(T::zero(), T::max_of)
    }

    /// The arrival order read as a landing order.
    pub fn as_landing(&self) -> LandingSequence<T> {
        LandingSequence {
            aircraft: self.aircraft.clone(),
        }
    }
}

/// Aircraft in landing order.
#[derive(Debug, Clone, PartialEq)]
pub struct LandingSequence<T = f64> {
    aircraft: Vec<Aircraft<T>>,
}

impl<T: Scalar> LandingSequence<T> {
    pub fn new(aircraft: Vec<Aircraft<T>>) -> Result<Self> {
        check_unique_ids(&aircraft)?;
        Ok(LandingSequence { aircraft })
    }

    /// Builds the landing sequence that visits `arrival` at the given indices.
    pub fn from_order(arrival: &ArrivalSequence<T>, order: &[usize]) -> Result<Self> {
        let src = arrival.aircraft();
        let mut used = vec![false; src.len()];
        if order.len() != src.len() {
            return Err(Error::NotAPermutation);
        }
        let mut aircraft = Vec::with_capacity(order.len());
        for &i in order {
            if i >= src.len() || std::mem::replace(&mut used[i], true) {
                return Err(Error::NotAPermutation);
            }
            aircraft.push(src[i]);
        }
        Ok(LandingSequence { aircraft })
    }

    /// Builds the landing sequence that lands the given aircraft ids in order.
    pub fn from_ids(arrival: &ArrivalSequence<T>, ids: &[u32]) -> Result<Self> {
        let order = ids
            .iter()
            .map(|id| {
                arrival
                    .aircraft()
                    .iter()
                    .position(|a| a.id == *id)
                    .ok_or(Error::NotAPermutation)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_order(arrival, &order)
    }

    pub fn aircraft(&self) -> &[Aircraft<T>] {
        &self.aircraft
    }

    pub fn len(&self) -> usize {
        self.aircraft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aircraft.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.aircraft.iter().map(|a| a.id).collect()
    }

    pub fn wakes(&self) -> Vec<WakeClass> {
        self.aircraft.iter().map(|a| a.wake).collect()
    }

    pub fn wake_string(&self) -> String {
        render_wakes(self.aircraft.iter().map(|a| a.wake))
    }

    /// True when both sequences hold the same aircraft ids with the same
    /// wake classes.
    pub fn is_permutation_of(&self, arrival: &ArrivalSequence<T>) -> bool {
        if self.len() != arrival.len() {
            return false;
        }
        let mut mine: Vec<(u32, WakeClass)> = self.aircraft.iter().map(|a| (a.id, a.wake)).collect();
        let mut theirs: Vec<(u32, WakeClass)> =
            arrival.aircraft().iter().map(|a| (a.id, a.wake)).collect();
        mine.sort_unstable();
        theirs.sort_unstable();
        mine == theirs
    }

    /// True when the landing order equals the arrival order.
    pub fn preserves_order_of(&self, arrival: &ArrivalSequence<T>) -> bool {
        self.len() == arrival.len()
            && self
                .aircraft
                .iter()
                .zip(arrival.aircraft())
                .all(|(a, b)| a.id == b.id)
    }
}

/// Renders any sequence's wake classes as an `H`/`L`/`S` string.
pub trait WakeString {
    fn wake_string(&self) -> String;
}

impl<T: Scalar> WakeString for ArrivalSequence<T> {
    fn wake_string(&self) -> String {
        ArrivalSequence::wake_string(self)
    }
}

impl<T: Scalar> WakeString for LandingSequence<T> {
    fn wake_string(&self) -> String {
        LandingSequence::wake_string(self)
    }
}

pub fn wake_string<S: WakeString + ?Sized>(seq: &S) -> String {
    seq.wake_string()
}

/// Minimum landing separation in whole seconds, indexed by
/// `[leading][trailing]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationMatrix {
    seconds: [[u32; 3]; 3],
}

impl SeparationMatrix {
    /// FAA wake-vortex separations: rows are the leading aircraft, columns
    /// the trailing one, both in H, L, S order.
    pub const FAA: SeparationMatrix = SeparationMatrix {
        seconds: [[96, 157, 196], [60, 69, 131], [60, 69, 82]],
    };

    pub fn new(seconds: [[u32; 3]; 3]) -> Result<Self> {
        if seconds.iter().flatten().any(|&s| s == 0) {
            return Err(Error::InvalidParams(
                "separations must be strictly positive".into(),
            ));
        }
        Ok(SeparationMatrix { seconds })
    }

    /// A matrix with the same separation for every pair.
    pub fn constant(seconds: u32) -> Result<Self> {
        Self::new([[seconds; 3]; 3])
    }

    #[inline]
    pub fn get(&self, leading: WakeClass, trailing: WakeClass) -> u32 {
        self.seconds[leading.index()][trailing.index()]
    }

    pub fn rows(&self) -> &[[u32; 3]; 3] {
        &self.seconds
    }
}

impl Default for SeparationMatrix {
    fn default() -> Self {
        Self::FAA
    }
}

pub fn separation(leading: WakeClass, trailing: WakeClass, matrix: &SeparationMatrix) -> u32 {
    matrix.get(leading, trailing)
}

/// A landing order with the landing time of each aircraft.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult<T = f64> {
    pub order: LandingSequence<T>,
    pub landing_times: Vec<T>,
    /// Landing time of the final aircraft.
    pub makespan: T,
}

impl<T: Scalar> ScheduleResult<T> {
    /// Time between the first and the last landing.
    pub fn first_to_last(&self) -> T {
        match (self.landing_times.first(), self.landing_times.last()) {
            (Some(&first), Some(&last)) => last - first,
            _ => T::zero(),
        }
    }

    /// Checks the ETA lower bound, the separation constraint and strict
    /// ordering of landing times.
    pub fn verify(&self, matrix: &SeparationMatrix) -> Result<()> {
        let aircraft = self.order.aircraft();
        if aircraft.len() != self.landing_times.len() {
            return Err(Error::ScheduleViolation("one landing time per aircraft"));
        }
        for (a, &t) in aircraft.iter().zip(&self.landing_times) {
            if t < a.eta {
                return Err(Error::ScheduleViolation("landing no earlier than ETA"));
            }
        }
        for k in 1..aircraft.len() {
            let (prev, t) = (self.landing_times[k - 1], self.landing_times[k]);
            if t <= prev {
                return Err(Error::ScheduleViolation("strictly increasing landing times"));
            }
            let sep = T::from_seconds(matrix.get(aircraft[k - 1].wake, aircraft[k].wake));
            if t < prev + sep {
                return Err(Error::ScheduleViolation("minimum wake separation"));
            }
        }
        match self.landing_times.last() {
            Some(&last) if last != self.makespan => {
                Err(Error::ScheduleViolation("makespan equals final landing time"))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for WakeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => WakeClass::try_from(c),
            (Some(_), Some(extra)) => Err(Error::InvalidWake(extra)),
            (None, _) => Err(Error::EmptySequence),
        }
    }
}
