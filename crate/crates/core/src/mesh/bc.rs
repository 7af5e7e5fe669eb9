use super::field::{ScalarField, TensorField, VectorField};
use super::grid::{Face, FaceTag, Grid};
use crate::error::{Error, Result};
use crate::scalar::Real;

impl<T: Real> ScalarField<T> {
    /// Reflects interior values into the ghost layer, multiplied by a sign per
    /// face. x ghosts are filled first, then y ghosts across the full padded
    /// row, so corner ghosts carry the product of both signs.
    pub(crate) fn fill_mirror(&mut self, signs: [T; 4]) {
        let g = self.grid().clone();
        let nx = g.n(0) as isize;
        let ny = g.n(1) as isize;
        for j in 0..ny {
            let lo = self.at(0, j);
            let hi = self.at(nx - 1, j);
            self.set_raw(-1, j, signs[Face::XLo.index()] * lo);
            self.set_raw(nx, j, signs[Face::XHi.index()] * hi);
        }
        if g.dim() == 2 {
            for i in -1..=nx {
                let lo = self.at(i, 0);
                let hi = self.at(i, ny - 1);
                self.set_raw(i, -1, signs[Face::YLo.index()] * lo);
                self.set_raw(i, ny, signs[Face::YHi.index()] * hi);
            }
        }
        self.set_fresh(true);
    }

    /// Homogeneous Neumann fill: every ghost mirrors its neighbour.
    pub fn fill_neumann(&mut self) {
        self.fill_mirror([T::one(); 4]);
    }

    /// Neumann fill returning the field, for expression-style call sites.
    pub fn with_neumann(mut self) -> Self {
        self.fill_neumann();
        self
    }
}

/// Scalar boundary fill for `d f / d nu = flux` on every face.
///
/// Only homogeneous data is supported; a nonzero flux is rejected.
pub fn apply_scalar_bc<T: Real>(f: &mut ScalarField<T>, flux: &[T]) -> Result<()> {
    if let Some(v) = flux.iter().find(|v| **v != T::zero()) {
        return Err(Error::Unsupported(format!(
            "inhomogeneous Neumann data ({v}) is not supported"
        )));
    }
    f.fill_neumann();
    Ok(())
}

/// Sign relating the ghost of velocity component `comp` across `face` to
/// its interior mirror: no-slip reflects every component oddly, slip
/// reflects only the normal component oddly.
pub fn velocity_ghost_sign<T: Real>(grid: &Grid<T>, face: Face, comp: usize) -> T {
    match grid.tag(face) {
        FaceTag::NoSlip => -T::one(),
        FaceTag::Slip if comp == face.axis() => -T::one(),
        FaceTag::Slip => T::one(),
    }
}

pub(crate) fn velocity_signs<T: Real>(grid: &Grid<T>, comp: usize) -> [T; 4] {
    let mut s = [T::one(); 4];
    for face in grid.faces() {
        s[face.index()] = velocity_ghost_sign(grid, face, comp);
    }
    s
}

/// Fills the velocity ghost layers for the no-slip / slip conditions.
pub fn apply_velocity_bc<T: Real>(u: &mut VectorField<T>) {
    let grid = u.grid().clone();
    for a in 0..u.dim() {
        let signs = velocity_signs(&grid, a);
        u.comp_mut(a).fill_mirror(signs);
    }
}

impl<T: Real> VectorField<T> {
    pub fn with_velocity_bc(mut self) -> Self {
        apply_velocity_bc(&mut self);
        self
    }
}

impl<T: Real> TensorField<T> {
    /// Reflection fill for a symmetric-stress-like tensor: `T_ab` flips sign
    /// once for each index equal to the face normal axis.
    pub(crate) fn fill_reflect(&mut self) {
        let dim = self.dim();
        for a in 0..dim {
            for b in 0..dim {
                let mut s = [T::one(); 4];
                for face in Face::ALL {
                    let k = face.axis();
                    let flips = (a == k) as u8 + (b == k) as u8;
                    if flips == 1 {
                        s[face.index()] = -T::one();
                    }
                }
                self.get_mut(a, b).fill_mirror(s);
            }
        }
    }
}
