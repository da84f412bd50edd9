//! Runway landing sequencing and behavioural learning with a society of
//! probabilistic finite-state machines.
//!
//! * [`simulator`] produces reference behaviour: FCFS scheduling, one-position
//!   constrained shifting and the savings rule choosing between them.
//! * [`pfsm`] holds the seven wake-triple machines and the sliding-window
//!   sequencer that applies them to an arrival sequence.
//! * [`metrics`] scores landing orders against references.
//! * [`ga`] evolves the 90 transition probabilities.
//!
//! Times, probabilities and genes are generic over [`Scalar`]; the aliases
//! below fix the common choices.

pub mod domain;
pub mod error;
pub mod ga;
pub mod metrics;
pub mod pfsm;
pub mod scalar;
pub mod seeding;
pub mod simulator;

pub use domain::{
    parse_wakes, render_wakes, separation, wake_string, Aircraft, ArrivalSequence, LandingSequence,
    ScheduleResult, SeparationMatrix, WakeClass,
};
pub use error::{Error, Result};
pub use ga::{Chromosome, ChromosomeLayout, Evolution, FitnessConfig, GaParams, GenerationRecord, TrainingSet};
pub use metrics::{MetricError, MetricKind};
pub use pfsm::{DecodingMode, PfsmId, PfsmSpec, SocietyModel, TripleClass, WakeTriple, WindowStep};
pub use scalar::Scalar;
pub use simulator::{DatasetParams, Decision, SequencePair, SequencerConfig, SpanObjective};

pub use num_rational::Rational64;

/// Double-precision instantiations used for training and reporting.
pub type Arrival = ArrivalSequence<f64>;
pub type Landing = LandingSequence<f64>;
pub type Schedule = ScheduleResult<f64>;
pub type Pair = SequencePair<f64>;
pub type Model = SocietyModel<f64>;
pub type Genome = Chromosome<f64>;

/// Single-precision model and chromosome.
pub type Model32 = SocietyModel<f32>;
pub type Genome32 = Chromosome<f32>;

/// Exact schedules over rational seconds.
pub type ExactArrival = ArrivalSequence<Rational64>;
pub type ExactSchedule = ScheduleResult<Rational64>;
pub type ExactPair = SequencePair<Rational64>;
