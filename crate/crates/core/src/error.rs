use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid wake class character {0:?}")]
    InvalidWake(char),
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence has {len} aircraft, at least {min} required")]
    SequenceTooShort { len: usize, min: usize },
    #[error("aircraft id {0} appears more than once")]
    DuplicateId(u32),
    #[error("ETAs must be non-decreasing (position {position})")]
    UnorderedEta { position: usize },
    #[error("ETA gap at position {position} exceeds the peak-traffic bound")]
    GapTooLarge { position: usize },
    #[error("ETA at position {position} is negative or not finite")]
    InvalidEta { position: usize },
    #[error("landing sequence is not a permutation of its arrival sequence")]
    NotAPermutation,
    #[error("window wake multiset does not match the target pattern")]
    MultisetMismatch,
    #[error("homogeneous triple has no state machine")]
    HomogeneousTriple,
    #[error("step must be 1, 2 or 3, got {0}")]
    InvalidStep(usize),
    #[error("invalid transition row for PFSM{pfsm} state {state}: {reason}")]
    InvalidRow {
        pfsm: u8,
        state: usize,
        reason: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("could not generate {requested} distinct sequences after {retries} retries")]
    UniquenessInfeasible { requested: usize, retries: usize },
    #[error("schedule violates {0}")]
    ScheduleViolation(&'static str),
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
