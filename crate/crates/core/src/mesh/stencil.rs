//! Linear stencils shared by matrix assembly and matrix-free application.
//!
//! Every stencil is emitted as `(i, j, [component,] weight)` triples that
//! may reference ghost cells. Applying a stencil reads ghost values
//! directly; assembling folds each ghost reference onto its interior
//! mirror with the reflection sign, so both paths realise the same
//! operator.

use super::bc::velocity_ghost_sign;
use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::scalar::Real;

/// Compact conservative stencil of `div(a grad f)` at cell `(i, j)`, with
/// face coefficients the arithmetic mean of the adjacent cell values.
pub(crate) fn flux_div_entries<T: Real>(
    a: &ScalarField<T>,
    i: isize,
    j: isize,
    mut emit: impl FnMut(isize, isize, T),
) {
    let g = a.grid();
    let half = T::lit(0.5);
    let ac = a.at(i, j);
    for axis in 0..g.dim() {
        let (si, sj) = Grid::<T>::step(axis);
        let h2 = g.h(axis) * g.h(axis);
        let ap = (ac + a.at(i + si, j + sj)) * half;
        let am = (ac + a.at(i - si, j - sj)) * half;
        emit(i + si, j + sj, ap / h2);
        emit(i - si, j - sj, am / h2);
        emit(i, j, -(ap + am) / h2);
    }
}

/// Stencil of component `a` of `div(2 eta D(u) + lambda div(u) I)`.
///
/// Terms whose derivative directions coincide use compact face fluxes; the
/// cross-derivative couplings use centred differences of centred
/// differences.
pub(crate) fn viscous_entries<T: Real>(
    eta: &ScalarField<T>,
    lambda: &ScalarField<T>,
    i: isize,
    j: isize,
    a: usize,
    mut emit: impl FnMut(isize, isize, usize, T),
) {
    let g = eta.grid();
    let dim = g.dim();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let k = |p: (isize, isize), b: usize| {
        let e = eta.at(p.0, p.1);
        if b == a {
            two * e + lambda.at(p.0, p.1)
        } else {
            e
        }
    };
    for b in 0..dim {
        let (si, sj) = Grid::<T>::step(b);
        let h2 = g.h(b) * g.h(b);
        let kc = k((i, j), b);
        let kp = (kc + k((i + si, j + sj), b)) * half;
        let km = (kc + k((i - si, j - sj), b)) * half;
        emit(i + si, j + sj, a, kp / h2);
        emit(i - si, j - sj, a, km / h2);
        emit(i, j, a, -(kp + km) / h2);
    }
    let (ai, aj) = Grid::<T>::step(a);
    for b in 0..dim {
        if b == a {
            continue;
        }
        let (bi, bj) = Grid::<T>::step(b);
        let w = T::one() / (four * g.h(a) * g.h(b));
        // d_b (eta d_a u_b)
        for (s, sign) in [(1isize, T::one()), (-1, -T::one())] {
            let q = (i + s * bi, j + s * bj);
            let e = eta.at(q.0, q.1) * w * sign;
            emit(q.0 + ai, q.1 + aj, b, e);
            emit(q.0 - ai, q.1 - aj, b, -e);
        }
        // d_a (lambda d_b u_b)
        for (s, sign) in [(1isize, T::one()), (-1, -T::one())] {
            let r = (i + s * ai, j + s * aj);
            let l = lambda.at(r.0, r.1) * w * sign;
            emit(r.0 + bi, r.1 + bj, b, l);
            emit(r.0 - bi, r.1 - bj, b, -l);
        }
    }
}

/// Folds a possibly-ghost scalar reference under Neumann reflection.
#[inline]
pub(crate) fn fold_scalar<T: Real>(g: &Grid<T>, i: isize, j: isize) -> usize {
    let (fi, fj, _, _) = g.fold(i, j);
    g.cell_index(fi, fj)
}

/// Folds a possibly-ghost velocity reference onto `(cell, sign)`.
#[inline]
pub(crate) fn fold_velocity<T: Real>(g: &Grid<T>, i: isize, j: isize, comp: usize) -> (usize, T) {
    let (fi, fj, fx, fy) = g.fold(i, j);
    let mut sign = T::one();
    if let Some(face) = fx {
        sign *= velocity_ghost_sign(g, face, comp);
    }
    if let Some(face) = fy {
        sign *= velocity_ghost_sign(g, face, comp);
    }
    (g.cell_index(fi, fj), sign)
}

pub(crate) fn apply_flux_div<T: Real>(a: &ScalarField<T>, f: &ScalarField<T>) -> ScalarField<T> {
    let g = f.grid().clone();
    let mut out = ScalarField::zeros(&g);
    for (i, j) in g.cells() {
        let (ii, jj) = (i as isize, j as isize);
        let fc = f.at(ii, jj);
        let mut acc = T::zero();
        // difference form: constants map to exactly zero
        flux_div_entries(a, ii, jj, |p, q, w| {
            if (p, q) != (ii, jj) {
                acc += w * (f.at(p, q) - fc)
            }
        });
        out.set(i, j, acc);
    }
    out
}

pub(crate) fn apply_viscous<T: Real>(
    eta: &ScalarField<T>,
    lambda: &ScalarField<T>,
    u: &VectorField<T>,
) -> VectorField<T> {
    let g = u.grid().clone();
    let mut out = VectorField::zeros(&g);
    for a in 0..g.dim() {
        for (i, j) in g.cells() {
            let mut acc = T::zero();
            viscous_entries(eta, lambda, i as isize, j as isize, a, |p, q, b, w| {
                acc += w * u.comp(b).at(p, q)
            });
            out.comp_mut(a).set(i, j, acc);
        }
    }
    out
}
