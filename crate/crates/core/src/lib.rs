//! Desk-scale simulator for the compressible Navier-Stokes-Cahn-Hilliard
//! diffuse-interface model of binary fluid mixtures.
//!
//! Each time step is a Picard fixed-point iteration: the density is
//! transported with the current velocity iterate, the linearised
//! Cahn-Hilliard block is solved for `(c, mu)` with coefficients frozen at
//! the start of the step, and the linearised momentum block is solved for
//! `u`. All nonlinear couplings are moved to the right-hand side and
//! re-evaluated at each iterate, so a converged iterate solves the
//! original, unsplit discrete equations.
//!
//! The numerical core is generic over [`Real`]; the `*64` aliases below are
//! the instantiations used by the binary and the test-suite.

pub mod chsolver;
pub mod cli;
pub mod error;
pub mod linsys;
pub mod material;
pub mod mesh;
pub mod momentum;
pub mod scalar;
pub mod stepper;
pub mod transport;

pub use error::{Error, Result};
pub use material::{DoubleWellLaw, LawParams, MaterialLaws, State};
pub use mesh::{Face, FaceTag, Grid, ScalarField, TensorField, VectorField};
pub use scalar::Real;
pub use stepper::{run_simulation, DiagnosticsRow, PicardReport, StepperConfig};

pub type Grid64 = mesh::Grid<f64>;
pub type Grid32 = mesh::Grid<f32>;
pub type ScalarField64 = mesh::ScalarField<f64>;
pub type ScalarField32 = mesh::ScalarField<f32>;
pub type VectorField64 = mesh::VectorField<f64>;
pub type VectorField32 = mesh::VectorField<f32>;
pub type TensorField64 = mesh::TensorField<f64>;
pub type TensorField32 = mesh::TensorField<f32>;
pub type State64 = material::State<f64>;
pub type State32 = material::State<f32>;
pub type MaterialLaws64 = material::MaterialLaws<f64>;
pub type MaterialLaws32 = material::MaterialLaws<f32>;
