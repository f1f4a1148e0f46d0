//! Experiment harness: random instance generation, critic/actor runs with
//! persisted metrics, the two-critic comparison benchmark, and the invariant
//! verification suite.

pub mod bench;
pub mod eval;
pub mod gen;
pub mod record;
pub mod train;
pub mod verify;

pub use bench::{bench_figure1, BenchConfig, BenchRow};
pub use gen::{generate_random_mdp, RandomMdpSpec};
pub use record::{content_hash_hex, RunManifest, CSV_SCHEMA_VERSION};
