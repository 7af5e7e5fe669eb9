use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use super::grid::Grid;
use crate::scalar::Real;

/// One real per cell plus a ghost layer.
///
/// Values are stored on the padded array; `fresh` records whether the ghost
/// layer matches the last boundary fill.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T: Real = f64> {
    grid: Arc<Grid<T>>,
    data: Vec<T>,
    fresh: bool,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Constant field, ghosts included (a constant is its own mirror).
    pub fn constant(grid: &Arc<Grid<T>>, value: T) -> Self {
        ScalarField { grid: Arc::clone(grid), data: vec![value; grid.padded_len()], fresh: true }
    }

    /// Samples `f` at cell centres. Ghosts are left stale.
    pub fn from_fn(grid: &Arc<Grid<T>>, mut f: impl FnMut([T; 2]) -> T) -> Self {
        let mut out = ScalarField {
            grid: Arc::clone(grid),
            data: vec![T::zero(); grid.padded_len()],
            fresh: false,
        };
        for (i, j) in grid.cells() {
            let o = grid.offset(i as isize, j as isize);
            out.data[o] = f(grid.center(i, j));
        }
        out
    }

    /// Builds a field from interior values in storage order. Ghosts are stale.
    pub fn from_interior(grid: &Arc<Grid<T>>, values: &[T]) -> Self {
        assert_eq!(values.len(), grid.cell_count(), "interior length mismatch");
        let mut out = Self::zeros(grid);
        out.fresh = false;
        for ((i, j), v) in grid.cells().zip(values) {
            let o = grid.offset(i as isize, j as isize);
            out.data[o] = *v;
        }
        out
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn ghosts_fresh(&self) -> bool {
        self.fresh
    }

    pub(crate) fn set_fresh(&mut self, fresh: bool) {
        self.fresh = fresh;
    }

    /// Value at an interior or ghost cell.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> T {
        self.data[self.grid.offset(i, j)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.at(i as isize, j as isize)
    }

    /// Writes an interior value and marks the ghost layer stale.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let o = self.grid.offset(i as isize, j as isize);
        self.data[o] = v;
        self.fresh = false;
    }

    #[inline]
    pub(crate) fn set_raw(&mut self, i: isize, j: isize, v: T) {
        let o = self.grid.offset(i, j);
        self.data[o] = v;
    }

    /// Interior values in storage order.
    pub fn interior(&self) -> Vec<T> {
        self.grid.cells().map(|(i, j)| self.get(i, j)).collect()
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.grid.cells().map(move |(i, j)| self.get(i, j))
    }

    pub fn max_abs(&self) -> T {
        self.values().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values().fold(T::infinity(), |m, v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.values().fold(T::neg_infinity(), |m, v| m.max(v))
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// Pointwise map over interior and ghost cells alike.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            data: self.data.iter().map(|&v| f(v)).collect(),
            fresh: self.fresh,
        }
    }

    /// Pointwise combination over the padded array; fresh iff both inputs are.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert!(*self.grid == *other.grid);
        ScalarField {
            grid: Arc::clone(&self.grid),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            fresh: self.fresh && other.fresh,
        }
    }

    pub fn zip3_map(&self, b: &Self, c: &Self, f: impl Fn(T, T, T) -> T) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            data: self
                .data
                .iter()
                .zip(&b.data)
                .zip(&c.data)
                .map(|((&x, &y), &z)| f(x, y, z))
                .collect(),
            fresh: self.fresh && b.fresh && c.fresh,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }
}

impl<T: Real> Add for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a * b)
    }
}

/// `dim` components per cell, each with its own ghost layer.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T: Real = f64> {
    comps: Vec<ScalarField<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        VectorField { comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn from_components(comps: Vec<ScalarField<T>>) -> Self {
        assert!(!comps.is_empty());
        assert_eq!(comps.len(), comps[0].grid().dim(), "component count must equal dim");
        VectorField { comps }
    }

    /// Samples a vector function at cell centres (ghosts stale).
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn([T; 2]) -> [T; 2]) -> Self {
        VectorField {
            comps: (0..grid.dim()).map(|a| ScalarField::from_fn(grid, |x| f(x)[a])).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, a: usize) -> &ScalarField<T> {
        &self.comps[a]
    }

    pub fn comp_mut(&mut self, a: usize) -> &mut ScalarField<T> {
        &mut self.comps[a]
    }

    pub fn components(&self) -> &[ScalarField<T>] {
        &self.comps
    }

    pub fn ghosts_fresh(&self) -> bool {
        self.comps.iter().all(|c| c.ghosts_fresh())
    }

    pub fn max_abs(&self) -> T {
        self.comps.iter().fold(T::zero(), |m, c| m.max(c.max_abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(|c| c.all_finite())
    }

    pub fn map_comps(&self, f: impl Fn(&ScalarField<T>) -> ScalarField<T>) -> Self {
        VectorField { comps: self.comps.iter().map(f).collect() }
    }

    pub fn zip_comps(
        &self,
        other: &Self,
        f: impl Fn(&ScalarField<T>, &ScalarField<T>) -> ScalarField<T>,
    ) -> Self {
        VectorField { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect() }
    }

    /// Multiplies every component by a scalar field.
    pub fn scale_by(&self, s: &ScalarField<T>) -> Self {
        self.map_comps(|c| c * s)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_comps(|c| c.scale(s))
    }

    /// Interior values, cell-major with components interleaved.
    pub fn interleaved(&self) -> Vec<T> {
        let g = self.grid();
        let mut out = Vec::with_capacity(g.cell_count() * self.dim());
        for (i, j) in g.cells() {
            for c in &self.comps {
                out.push(c.get(i, j));
            }
        }
        out
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField<T> {
        let mut acc = &self.comps[0] * &other.comps[0];
        for a in 1..self.dim() {
            acc = &acc + &(&self.comps[a] * &other.comps[a]);
        }
        acc
    }
}

impl<T: Real> Add for &VectorField<T> {
    type Output = VectorField<T>;
    fn add(self, rhs: Self) -> VectorField<T> {
        self.zip_comps(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &VectorField<T> {
    type Output = VectorField<T>;
    fn sub(self, rhs: Self) -> VectorField<T> {
        self.zip_comps(rhs, |a, b| a - b)
    }
}

/// `dim x dim` reals per cell, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField<T: Real = f64> {
    dim: usize,
    comps: Vec<ScalarField<T>>,
}

impl<T: Real> TensorField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        let dim = grid.dim();
        TensorField { dim, comps: (0..dim * dim).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> &ScalarField<T> {
        &self.comps[a * self.dim + b]
    }

    pub fn get_mut(&mut self, a: usize, b: usize) -> &mut ScalarField<T> {
        &mut self.comps[a * self.dim + b]
    }

    pub fn ghosts_fresh(&self) -> bool {
        self.comps.iter().all(|c| c.ghosts_fresh())
    }

    pub fn max_abs(&self) -> T {
        self.comps.iter().fold(T::zero(), |m, c| m.max(c.max_abs()))
    }

    /// Largest `|T_ab - T_ba|` over interior cells.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for a in 0..self.dim {
            for b in 0..a {
                let d = self.get(a, b) - self.get(b, a);
                m = m.max(d.max_abs());
            }
        }
        m
    }

    /// Full contraction `A : B` per cell.
    pub fn contract(&self, other: &Self) -> ScalarField<T> {
        let mut acc = &self.comps[0] * &other.comps[0];
        for k in 1..self.comps.len() {
            acc = &acc + &(&self.comps[k] * &other.comps[k]);
        }
        acc
    }
}
