//! Finite-alphabet information measures and the generalization machinery
//! built on them: exact probability objects, rate-distortion curves with
//! their inverses, encoder capacity with a two-sided Fano-style bound,
//! a fully evaluated high-probability generalization-gap bound, discrete
//! information-bottleneck objectives, dropout and adversarial-pair
//! information-complexity surrogates, and a small deterministic trainer
//! that tracks the gap against the layered surrogate.
//!
//! Everything is computed in nats. All values are immutable after
//! construction and every operation is pure, so instances can be shared
//! and evaluated concurrently.

pub mod capacity;
pub mod encoders;
pub mod gap_bounds;
pub mod ib;
pub mod prob;
pub mod rate_distortion;
pub mod trainer;
