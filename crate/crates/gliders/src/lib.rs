//! Annihilating-particle cellular automata and their entry-time statistics.
//!
//! The `(v-, v+)` glider rules are three-state automata whose -1 particles
//! drift left at speed `v-`, +1 particles drift right at speed `v+`, and
//! colliding pairs annihilate. Everything observable about them reduces to
//! strict minima of the partial-sum walk of the initial configuration, which
//! makes two things cheap:
//!
//! * exact particle queries at any time without simulating ([`walks`]),
//! * Monte Carlo statistics of the time at which a particle re-enters a
//!   fixed window, whose rescaled law converges to an explicit arctan
//!   distribution ([`entrytime`]).
//!
//! The [`factors`] module projects richer automata (traffic, cyclic,
//! captive, multiplicative) onto glider rules through defect maps, and
//! [`oracle`] validates the statistical pipeline against the raw
//! random-walk fact underlying all of it. Samplers for product, Markov and
//! periodic measures live in [`measures`], deterministic parallel RNG in
//! [`rng`], and space-time rendering in [`render`].

pub mod ca;
pub mod entrytime;
pub mod error;
pub mod factors;
pub mod measures;
pub mod oracle;
pub mod render;
pub mod report;
pub mod rmq;
pub mod rng;
pub mod walks;

pub use ca::{ConfigurationWindow, GlidersRule, LocalRule};
pub use entrytime::{EmpiricalCdf, EntryTimeResult, Side};
pub use error::{Error, Result};
pub use factors::{FactorSpec, SftSpec};
pub use measures::{MixDiagnostics, SamplerSpec};
pub use walks::WalkPath;
