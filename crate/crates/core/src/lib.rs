//! Classical multidimensional scaling on noisy dissimilarities.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`]: dense kernels (symmetric eigensolver, small SVD, norms,
//!   double centering).
//! * [`config`]: latent configurations and their squared-distance matrices.
//! * [`noise`]: random perturbation matrices and the six entrywise noise
//!   models.
//! * [`scaling`]: the classical scaling embedding.
//! * [`align`]: Procrustes alignment and reconstruction losses.
//! * [`lowerbound`]: the packing families behind the minimax lower bounds,
//!   as numerically checkable objects.
//! * [`harness`]: Monte-Carlo experiment plans, rate fits, CSV and SVG
//!   output.

pub mod align;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod lowerbound;
pub mod noise;
pub mod rng;
pub mod scaling;

pub use align::{optimal_rigid_alignment, procrustes, AlignmentResult};
pub use config::{Configuration, MembershipReport};
pub use error::{Error, Result};
pub use harness::{ExperimentPlan, RateFit, TrialRecord};
pub use linalg::{EigenPairs, Matrix, SmallSvd, SymMatrix};
pub use lowerbound::{BinaryCode, PackingFamily, PackingKind};
pub use noise::{DissimilarityMatrix, NoiseModel, NoiseSpec, XiDistribution, XiFamily};
pub use scaling::{classical_scaling, Embedding};
