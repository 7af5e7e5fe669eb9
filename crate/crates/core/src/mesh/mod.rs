//! Cell-centred rectangular grids, fields with one ghost layer, discrete
//! differential operators and the boundary fills that give them meaning.

mod bc;
mod field;
mod grid;
mod ops;
pub(crate) mod stencil;

pub use bc::{apply_scalar_bc, apply_velocity_bc, velocity_ghost_sign};
pub use field::{ScalarField, TensorField, VectorField};
pub use grid::{make_grid, Face, FaceTag, Grid, MIN_CELLS};
pub use ops::{
    discrete_l2, div_coeff, divergence, face_energy_density, flux_div, gradient, gradient_l2,
    hessian_vec, integrate, strain_rate, tensor_divergence, vector_l2, viscous_divergence,
    weak_norm, weak_norm_weighted, WeakNormWeights,
};
