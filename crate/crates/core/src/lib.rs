//! Greedy sparse signal recovery.
//!
//! Recovers a K-sparse `x` from underdetermined measurements `y = Φx (+ w)`
//! with a hope-tree matching pursuit ([`gsra`]) and the reference pursuits it
//! is benchmarked against ([`pursuit`]). [`bench`] reproduces the standard
//! Monte-Carlo comparisons: exact-recovery frequency over a sparsity sweep
//! and reconstruction SNR under measurement noise.

pub mod bench;
pub mod error;
pub mod gsra;
pub mod instance;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod pursuit;
pub mod text;
pub mod tree;

pub use error::{Error, Result};
pub use gsra::{gsra_recover, GsraConfig};
pub use linalg::{SensingMatrix, SupportSet};
pub use pursuit::{gomp, mmp, omp, sp, PursuitConfig, RecoveryResult, SearchStrategy};
