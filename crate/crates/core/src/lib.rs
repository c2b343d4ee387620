//! Reformulation-cause prediction for intelligent-assistant logs.
//!
//! Given a user utterance `U1`, the system response `R` and the user's
//! follow-up reformulation `U2`, predict which component of the assistant
//! made the follow-up necessary: nothing (`NoError`), speech recognition,
//! language understanding or response generation.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] holds the log data model, JSONL I/O and the pair filters.
//! * [`textops`] tokenizes, computes edit distances and word alignments, and
//!   classifies each pair's correction type.
//! * [`features`] maps exchanges to named dense vectors over five feature
//!   families.
//! * [`classifier`] is a linear SVM (dual coordinate descent, one-vs-rest).
//! * [`eval`] runs nested cross-validation, metrics, significance tests and
//!   ablations; [`report`] renders the results as text tables.
//! * [`synth`] generates labeled corpora with controllable statistics.

pub mod classifier;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod report;
pub mod seeds;
pub mod synth;
pub mod textops;

pub use classifier::{LinearModel, TrainingSet};
pub use corpus::{CauseLabel, Corpus, ExchangeRecord, InputSwitch, InputType, Utterance};
pub use eval::{EvalConfig, EvalReport, Metrics};
pub use features::{Family, FeatureSpace, FeatureSpaceConfig, FeatureVector, Standardizer};
pub use textops::{CorrectionType, EditScript, TokenSequence};
