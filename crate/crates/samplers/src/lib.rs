//! Sample-access models over a tabular MDP: the generative oracle and the
//! single-trajectory Markovian simulator with skip-based decorrelation. Every
//! component draws from its own seeded stream and meters the model transitions
//! it consumes.

pub mod generative;
pub mod rng;
pub mod trajectory;

pub use generative::GenerativeOracle;
pub use rng::{derive_seed, sample_categorical};
pub use trajectory::{InitState, TrajectorySimulator, TransitionSample};
