//! Irreversible-proposal MALA (ipMALA) for diagonal Gaussian targets.
//!
//! The sampler perturbs the Langevin proposal with an antisymmetric drift
//! `σ^α C S x`, which leaves the target invariant. Besides the kernel the crate
//! provides the limiting acceptance and speed formulas, chain statistics,
//! empirical checks of the scaling limits, and a configurable experiment
//! runner.
//!
//! ```
//! use ipmala_core::{Kernel, ProposalParams, Spectrum, skew::build_s2};
//! use rand::SeedableRng;
//!
//! let spectrum = Spectrum::power_law(16, 2.0)?;
//! let op = build_s2(16)?;
//! let params = ProposalParams::new(1.0, 1.0 / 6.0, 2.0, 16)?;
//! let kernel = Kernel::new(params, &spectrum, &op)?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let x = spectrum.sample_stationary(&mut rng);
//! let (next, record) = kernel.mh_step(&x, &mut rng);
//! assert_eq!(next.len(), 16);
//! # let _ = record;
//! # Ok::<(), ipmala_core::Error>(())
//! ```

pub mod error;
pub mod estimators;
pub mod harness;
pub mod kernel;
pub mod skew;
pub mod target;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
pub use estimators::{aggregate, ct_statistic, ChainSummary, Coordinates, ReplicationReport};
pub use harness::{run_experiment, ExperimentConfig};
pub use kernel::{run_chain, Chain, ChainObserver, Kernel, ProposalParams, StepRecord};
pub use skew::{SkewKind, SkewOperator, SkewRegistry};
pub use target::Spectrum;
