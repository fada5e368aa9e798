//! # mflab-core
//!
//! Finite particle systems with agent-dependent interaction kernels
//! `G(t, x, x', ξ, ξ')`, and the machinery to compare them with their limits:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`kernels`] | interaction kernels (opinion, Cucker–Smale, Hamiltonian) and sampled Lipschitz/sup estimates |
//! | [`partition`] | tagged partitions of `[0, 1]`, piecewise-constant fields, Riemann quadrature |
//! | [`particles`] | the particle vector field, fixed-step Euler/RK4 integration, cloud states |
//! | [`measures`] | discrete measures on `Ω × R^d`, empirical/semi-empirical/monokinetic measures, moments |
//! | [`consensus`] | temperature and central-moment decay for the opinion kernel on cloud states |
//! | [`wasserstein`] | exact W1 (1-D closed form and transportation LP), `L¹_ν W1`, lemma checks |
//! | [`marginals`] | symmetrized marginals, `ε_n`, propagation-of-chaos certificates |
//! | [`euler`] | the graph-limit equation and convergence experiments |
//! | [`pde`] | quasilinear PDE DSL, mollified kernels and the particle PDE scheme |
//! | [`stats`] | log-log rate fits |
//!
//! Everything is deterministic: sums run in a fixed order, so results do not
//! depend on the rayon thread count.

pub mod consensus;
pub mod error;
pub mod euler;
pub mod kernels;
pub mod marginals;
pub mod measures;
pub mod ode;
pub mod partition;
pub mod particles;
pub mod pde;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod wasserstein;

pub use error::{Error, Result};
pub use kernels::{BoundBox, InteractionKernel};
pub use measures::{ConditionalFamily, DiscreteMeasure, MomentReport};
pub use partition::{Metric, PartitionField, TagRule, TaggedPartition};
pub use particles::{ParticleState, Trajectory};
