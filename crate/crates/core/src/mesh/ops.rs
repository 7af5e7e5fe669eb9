use super::field::{ScalarField, TensorField, VectorField};
use super::grid::Grid;
use super::stencil;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
fn centered<T: Real>(f: &ScalarField<T>, i: isize, j: isize, axis: usize) -> T {
    let (si, sj) = Grid::<T>::step(axis);
    (f.at(i + si, j + sj) - f.at(i - si, j - sj)) / (T::lit(2.0) * f.grid().h(axis))
}

/// Second-order centred gradient. Ghosts of the result are stale.
pub fn gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    debug_assert!(f.ghosts_fresh(), "gradient: stale ghosts");
    let g = f.grid().clone();
    let mut out = VectorField::zeros(&g);
    for a in 0..g.dim() {
        for (i, j) in g.cells() {
            out.comp_mut(a).set(i, j, centered(f, i as isize, j as isize, a));
        }
    }
    out
}

/// Centred divergence. Equivalent to a flux form with face values the mean
/// of the two neighbouring cells, so it telescopes.
pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    debug_assert!(v.ghosts_fresh(), "divergence: stale ghosts");
    let g = v.grid().clone();
    let mut out = ScalarField::zeros(&g);
    for (i, j) in g.cells() {
        let mut acc = T::zero();
        for a in 0..g.dim() {
            acc += centered(v.comp(a), i as isize, j as isize, a);
        }
        out.set(i, j, acc);
    }
    out
}

/// Row-wise centred divergence: `out_a = sum_b d_b T_ab`.
pub fn tensor_divergence<T: Real>(t: &TensorField<T>) -> VectorField<T> {
    debug_assert!(t.ghosts_fresh(), "tensor_divergence: stale ghosts");
    let g = t.grid().clone();
    let mut out = VectorField::zeros(&g);
    for a in 0..g.dim() {
        for (i, j) in g.cells() {
            let mut acc = T::zero();
            for b in 0..g.dim() {
                acc += centered(t.get(a, b), i as isize, j as isize, b);
            }
            out.comp_mut(a).set(i, j, acc);
        }
    }
    out
}

/// `(grad^2 f) . g` per cell: three-point second differences on the
/// diagonal, four-point centred stencil for the mixed derivative.
pub fn hessian_vec<T: Real>(f: &ScalarField<T>, v: &VectorField<T>) -> VectorField<T> {
    debug_assert!(f.ghosts_fresh(), "hessian_vec: stale ghosts");
    let g = f.grid().clone();
    let dim = g.dim();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut out = VectorField::zeros(&g);
    for (i, j) in g.cells() {
        let (ii, jj) = (i as isize, j as isize);
        let fc = f.at(ii, jj);
        let mut hess = [[T::zero(); 2]; 2];
        for a in 0..dim {
            let (si, sj) = Grid::<T>::step(a);
            let h = g.h(a);
            hess[a][a] = (f.at(ii + si, jj + sj) - two * fc + f.at(ii - si, jj - sj)) / (h * h);
        }
        if dim == 2 {
            let cross = (f.at(ii + 1, jj + 1) - f.at(ii + 1, jj - 1) - f.at(ii - 1, jj + 1)
                + f.at(ii - 1, jj - 1))
                / (four * g.h(0) * g.h(1));
            hess[0][1] = cross;
            hess[1][0] = cross;
        }
        for a in 0..dim {
            let mut acc = T::zero();
            for b in 0..dim {
                acc += hess[a][b] * v.comp(b).get(i, j);
            }
            out.comp_mut(a).set(i, j, acc);
        }
    }
    out
}

/// Symmetric part of the centred velocity gradient.
pub fn strain_rate<T: Real>(u: &VectorField<T>) -> TensorField<T> {
    debug_assert!(u.ghosts_fresh(), "strain_rate: stale ghosts");
    let g = u.grid().clone();
    let dim = g.dim();
    let half = T::lit(0.5);
    let mut out = TensorField::zeros(&g);
    for (i, j) in g.cells() {
        let (ii, jj) = (i as isize, j as isize);
        for a in 0..dim {
            for b in 0..dim {
                let d = half * (centered(u.comp(a), ii, jj, b) + centered(u.comp(b), ii, jj, a));
                out.get_mut(a, b).set(i, j, d);
            }
        }
    }
    out
}

/// Conservative `div(a grad f)`; `a` must be positive on every cell.
pub fn div_coeff<T: Real>(a: &ScalarField<T>, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    if let Some((cell, v)) = a.values().enumerate().find(|(_, v)| !(*v > T::zero())) {
        return Err(Error::NonPositive { name: "div_coeff coefficient", value: v.as_f64(), cell });
    }
    Ok(flux_div(a, f))
}

/// `div(a grad f)` in the same flux form as [`div_coeff`], without the sign
/// check. Used for coefficient differences such as `eps - eps0`.
pub fn flux_div<T: Real>(a: &ScalarField<T>, f: &ScalarField<T>) -> ScalarField<T> {
    debug_assert!(a.ghosts_fresh() && f.ghosts_fresh(), "flux_div: stale ghosts");
    stencil::apply_flux_div(a, f)
}

/// Discrete `div(2 eta D(u) + lambda div(u) I)` with compact fluxes for the
/// aligned derivatives; `u` must carry a velocity boundary fill.
pub fn viscous_divergence<T: Real>(
    eta: &ScalarField<T>,
    lambda: &ScalarField<T>,
    u: &VectorField<T>,
) -> VectorField<T> {
    debug_assert!(eta.ghosts_fresh() && lambda.ghosts_fresh() && u.ghosts_fresh());
    stencil::apply_viscous(eta, lambda, u)
}

/// Cell sum times cell volume.
pub fn integrate<T: Real>(f: &ScalarField<T>) -> T {
    f.values().sum::<T>() * f.grid().cell_volume()
}

pub fn discrete_l2<T: Real>(f: &ScalarField<T>) -> T {
    (f.values().map(|v| v * v).sum::<T>() * f.grid().cell_volume()).sqrt()
}

pub fn vector_l2<T: Real>(v: &VectorField<T>) -> T {
    let vol = v.grid().cell_volume();
    (v.components().iter().map(|c| c.values().map(|x| x * x).sum::<T>()).sum::<T>() * vol).sqrt()
}

/// Discrete L2 norm of the gradient built from differences across interior
/// faces only (no ghost data needed).
pub fn gradient_l2<T: Real>(f: &ScalarField<T>) -> T {
    let g = f.grid();
    let mut acc = T::zero();
    for axis in 0..g.dim() {
        let (si, sj) = Grid::<T>::step(axis);
        let h = g.h(axis);
        for (i, j) in g.cells() {
            let (ni, nj) = (i + si as usize, j + sj as usize);
            if ni < g.n(0) && nj < g.n(1) {
                let d = (f.get(ni, nj) - f.get(i, j)) / h;
                acc += d * d;
            }
        }
    }
    (acc * g.cell_volume()).sqrt()
}

/// Per-cell `1/2 sum_faces a_f |D f|^2` with face-centred differences and
/// face-averaged coefficients. Its integral equals the sum over interior
/// faces of `a_f |D f|^2` when `f` carries a Neumann fill, which makes it
/// the energy whose variation is `-div(a grad f)` in [`flux_div`] form.
pub fn face_energy_density<T: Real>(a: &ScalarField<T>, f: &ScalarField<T>) -> ScalarField<T> {
    debug_assert!(a.ghosts_fresh() && f.ghosts_fresh());
    let g = f.grid().clone();
    let half = T::lit(0.5);
    let mut out = ScalarField::zeros(&g);
    for (i, j) in g.cells() {
        let (ii, jj) = (i as isize, j as isize);
        let mut acc = T::zero();
        for axis in 0..g.dim() {
            let (si, sj) = Grid::<T>::step(axis);
            let h = g.h(axis);
            let ac = a.at(ii, jj);
            let dp = (f.at(ii + si, jj + sj) - f.at(ii, jj)) / h;
            let dm = (f.at(ii, jj) - f.at(ii - si, jj - sj)) / h;
            let ap = (ac + a.at(ii + si, jj + sj)) * half;
            let am = (ac + a.at(ii - si, jj - sj)) * half;
            acc += half * (ap * dp * dp + am * dm * dm);
        }
        out.set(i, j, acc);
    }
    out
}

/// Relative weights of the five contributions to [`weak_norm_weighted`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakNormWeights {
    pub u: f64,
    pub grad_u: f64,
    pub c: f64,
    pub grad_c: f64,
    pub mu: f64,
}

impl Default for WeakNormWeights {
    fn default() -> Self {
        WeakNormWeights { u: 1.0, grad_u: 1.0, c: 1.0, grad_c: 1.0, mu: 1.0 }
    }
}

/// `|du| + |grad du| + |dc| + |grad dc| + |dmu|`, all discrete L2.
pub fn weak_norm<T: Real>(du: &VectorField<T>, dc: &ScalarField<T>, dmu: &ScalarField<T>) -> T {
    weak_norm_weighted(du, dc, dmu, &WeakNormWeights::default())
}

pub fn weak_norm_weighted<T: Real>(
    du: &VectorField<T>,
    dc: &ScalarField<T>,
    dmu: &ScalarField<T>,
    w: &WeakNormWeights,
) -> T {
    let grad_u = du.components().iter().map(|c| {
        let n = gradient_l2(c);
        n * n
    });
    let grad_u = grad_u.sum::<T>().sqrt();
    T::lit(w.u) * vector_l2(du)
        + T::lit(w.grad_u) * grad_u
        + T::lit(w.c) * discrete_l2(dc)
        + T::lit(w.grad_c) * gradient_l2(dc)
        + T::lit(w.mu) * discrete_l2(dmu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{apply_velocity_bc, FaceTag};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn g1(n: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::new(&[1.0], &[n], &[FaceTag::NoSlip; 2]).unwrap())
    }

    fn g2(n: usize, tags: [FaceTag; 4]) -> Arc<Grid<f64>> {
        Arc::new(Grid::new(&[1.0, 1.0], &[n, n], &tags).unwrap())
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let g = g1(8);
        let c = ScalarField::constant(&g, 4.0);
        assert_eq!(gradient(&c).max_abs(), 0.0);
        let mut f = ScalarField::from_fn(&g, |x| x[0]);
        f.fill_neumann();
        let d = gradient(&f);
        for i in 1..7 {
            assert!((d.comp(0).get(i, 0) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn div_coeff_constant_and_telescoping() {
        let g = g2(10, [FaceTag::NoSlip; 4]);
        let a = ScalarField::constant(&g, 1.0);
        let f = ScalarField::constant(&g, 3.0);
        assert_eq!(div_coeff(&a, &f).unwrap().max_abs(), 0.0);

        let a = ScalarField::from_fn(&g, |x| 1.0 + x[0] * x[1] + 0.3 * (5.0 * x[0]).sin().abs())
            .with_neumann();
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * (1.0 + x[1] * x[1]))
            .with_neumann();
        let d = div_coeff(&a, &f).unwrap();
        let s: f64 = d.values().sum();
        assert!(s.abs() < 1e-12 * 100.0 * d.max_abs().max(1.0), "sum = {s}");
    }

    #[test]
    fn div_coeff_rejects_nonpositive() {
        let g = g1(8);
        let a = ScalarField::constant(&g, 0.0);
        let f = ScalarField::constant(&g, 1.0);
        assert!(matches!(div_coeff(&a, &f), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn divergence_and_tensor_divergence_of_constants() {
        let g = g2(6, [FaceTag::Slip; 4]);
        let v = VectorField::from_components(vec![
            ScalarField::constant(&g, 2.0),
            ScalarField::constant(&g, -1.0),
        ]);
        assert_eq!(divergence(&v).max_abs(), 0.0);
        let mut t = TensorField::zeros(&g);
        *t.get_mut(0, 0) = ScalarField::constant(&g, 5.0);
        *t.get_mut(1, 1) = ScalarField::constant(&g, 5.0);
        assert_eq!(tensor_divergence(&t).max_abs(), 0.0);
    }

    #[test]
    fn hessian_vec_exact_cases() {
        let g = g1(10);
        let f = ScalarField::from_fn(&g, |x| 3.0 * x[0] + 1.0).with_neumann();
        let one = VectorField::from_components(vec![ScalarField::constant(&g, 1.0)]);
        let h = hessian_vec(&f, &one);
        for i in 1..9 {
            assert!(h.comp(0).get(i, 0).abs() < 1e-12);
        }
        let f = ScalarField::from_fn(&g, |x| 0.5 * x[0] * x[0]).with_neumann();
        let h = hessian_vec(&f, &one);
        for i in 1..9 {
            assert!((h.comp(0).get(i, 0) - 1.0).abs() < 1e-10);
        }

        let g = g2(8, [FaceTag::NoSlip; 4]);
        let f = ScalarField::from_fn(&g, |x| x[0] * x[1]).with_neumann();
        let e1 = VectorField::from_components(vec![
            ScalarField::constant(&g, 1.0),
            ScalarField::constant(&g, 0.0),
        ]);
        let h = hessian_vec(&f, &e1);
        for i in 1..7 {
            for j in 1..7 {
                assert!(h.comp(0).get(i, j).abs() < 1e-12);
                assert!((h.comp(1).get(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn strain_rate_cases() {
        let g = g2(8, [FaceTag::Slip; 4]);
        let mut u = VectorField::from_fn(&g, |x| [x[1], -x[0]]);
        apply_velocity_bc(&mut u);
        let d = strain_rate(&u);
        assert!(d.asymmetry() < 1e-15);
        for i in 1..7 {
            for j in 1..7 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert!(d.get(a, b).get(i, j).abs() < 1e-13);
                    }
                }
            }
        }
        let mut u = VectorField::from_fn(&g, |x| [x[0], 0.0]);
        apply_velocity_bc(&mut u);
        let d = strain_rate(&u);
        assert!((d.get(0, 0).get(3, 3) - 1.0).abs() < 1e-13);
        assert!(d.get(1, 1).get(3, 3).abs() < 1e-13);
        assert!(d.get(0, 1).get(3, 3).abs() < 1e-13);
    }

    #[test]
    fn integrate_examples() {
        let g = g2(4, [FaceTag::NoSlip; 4]);
        assert!((integrate(&ScalarField::constant(&g, 1.0)) - 1.0).abs() < 1e-15);
        let f = ScalarField::from_fn(&g, |x| if x[0] < 0.5 { 2.0 } else { 0.0 });
        assert!((integrate(&f) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weak_norm_zero() {
        let g = g2(4, [FaceTag::NoSlip; 4]);
        let z = ScalarField::zeros(&g);
        assert_eq!(weak_norm(&VectorField::zeros(&g), &z, &z), 0.0);
    }

    #[test]
    fn face_energy_matches_flux_div_by_summation() {
        let g = g2(9, [FaceTag::NoSlip; 4]);
        let a = ScalarField::from_fn(&g, |x| 1.0 + x[0]).with_neumann();
        let f = ScalarField::from_fn(&g, |x| (PI * x[0]).cos() + x[1] * x[1]).with_neumann();
        let e = integrate(&face_energy_density(&a, &f));
        // -sum f div(a grad f) V = sum_faces a |Df|^2 V
        let d = flux_div(&a, &f);
        let s: f64 = -f.values().zip(d.values()).map(|(x, y)| x * y).sum::<f64>() * g.cell_volume();
        assert!((e - s).abs() < 1e-12 * e.abs());
    }
}
