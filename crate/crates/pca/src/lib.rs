//! Probabilistic cellular automata on `Z` and `Z/nZ`: forward simulation,
//! envelope bounding chains, perfect sampling from the invariant measure via
//! coupling from the past, and exact finite-ring analysis.
//!
//! The crate is organised around one convention set: letters are `u8` indices
//! into an [`Alphabet`]; neighborhood words, ring states, and envelope words
//! are all encoded positionally with the first cell as the most significant
//! digit; and all randomness flows through the counter-addressable
//! [`noise::uniform_at`], which is what lets coupling-from-the-past restarts
//! re-read the same noise at deeper horizons without storing anything.

pub mod alphabet;
pub mod cftp;
pub mod config;
pub mod dbarw;
pub mod envelope;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod model_file;
pub mod models;
pub mod nhpca;
pub mod noise;
pub mod rule;
pub mod sim;
pub mod stats;

pub use alphabet::Alphabet;
pub use config::{Configuration, SpaceTimeDiagram};
pub use error::{Error, Result};
pub use lattice::{Lattice, Neighborhood};
pub use noise::NoiseField;
pub use rule::LocalRule;
pub use sim::{simulate, step};
