//! Learning lifted, grounded STRIPS planning domains from labeled O2D state
//! transitions.
//!
//! The pipeline: hidden STRIPS domains are rendered into O2D scene states
//! ([`datagen`]), a pool of description-logic features is built over those
//! states ([`pool`]), a lexicographically-minimal grounded domain is learned
//! from marked transitions ([`learner`]), verified against the full state
//! graphs ([`verifier`]), and used for planning between O2D state pairs
//! ([`planner`]).

pub mod asp;
pub mod datagen;
pub mod grounding;
pub mod learner;
pub mod o2d;
pub mod planner;
pub mod pool;
pub mod strips;
pub mod verifier;

/// Version tag for all on-disk file formats produced by this crate.
pub const FORMAT_VERSION: &str = "1";
