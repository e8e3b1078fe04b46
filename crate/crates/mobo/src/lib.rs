//! Multi-objective Bayesian optimisation over Gaussian-process surrogates.
//!
//! The crate implements two families of infill strategies for expensive
//! bi-/many-objective minimisation problems:
//!
//! * **Mono-surrogate scalarisation** — each archive point is collapsed to a
//!   single fitness value which one GP models directly:
//!   [`scalarize::xhvi_all`] (exclusive hypervolume improvement minus the
//!   hypervolume it would take to become non-dominated) and
//!   [`scalarize::hypi_all`] (hypervolume of the point joined with the next
//!   Pareto shell). Proposals maximise expected improvement of the scalar GP.
//! * **Multi-surrogate expected hypervolume improvement** — one GP per
//!   objective and a Monte-Carlo estimate of the hypervolume gain over the
//!   current front ([`acquisition::ehvi_mc`]).
//!
//! Supporting machinery: an evaluation [`archive`](archive::Archive) with
//! dominance utilities, Latin hypercube initial designs, exact hypervolume
//! computation (2-D sweep and general-M recursive), ZDT/DTLZ benchmark
//! problems, a Bézier aerofoil design problem with a spar-cap stiffness
//! objective, attainment-surface metrics, and a campaign [`runner`].
//!
//! Runs are deterministic for a given configuration and seed: all random
//! streams derive from the run seed, and persisted artefacts are
//! byte-reproducible.
//!
//! ```
//! use mobo::runner::{run_one, Method, RunConfig};
//!
//! // Degenerate budget == n_init: just the Latin hypercube design, no
//! // model-based iterations, which keeps this example instant.
//! let config = RunConfig {
//!     problem: "zdt1".into(),
//!     dimensions: Some(4),
//!     budget: 8,
//!     n_init: 8,
//!     seeds: vec![7],
//!     ..RunConfig::default()
//! };
//! let run = run_one(&config, Method::Hypi, 7).unwrap();
//! assert_eq!(run.archive.len(), 8);
//! assert!(run.iterations.is_empty());
//! ```

pub mod acquisition;
pub mod aerofoil;
pub mod archive;
pub mod design;
pub mod error;
pub mod hypervolume;
pub mod metrics;
pub mod problems;
pub mod runner;
pub mod scalarize;
pub mod surrogate;

mod linalg;

pub use archive::{Archive, Phase};
pub use error::{Error, Result};
