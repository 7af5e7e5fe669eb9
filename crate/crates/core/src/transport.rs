//! Conservative upwind transport of the density, plus a
//! method-of-characteristics oracle for validation.

use crate::error::{Error, Result};
use crate::mesh::{divergence, Grid, ScalarField, VectorField};
use crate::scalar::Real;

/// Largest admissible [`cfl_number`].
pub const CFL_LIMIT: f64 = 0.9;

/// Density floor relative to the initial minimum.
pub const DENSITY_FLOOR_RATIO: f64 = 1e-8;

/// Normal velocity on the face between cell `(i, j)` and its `+axis`
/// neighbour; zero on domain faces.
#[inline]
fn face_velocity<T: Real>(u: &VectorField<T>, i: usize, j: usize, axis: usize) -> T {
    let g = u.grid();
    let (si, sj) = Grid::<T>::step(axis);
    let (ni, nj) = (i + si as usize, j + sj as usize);
    if ni >= g.n(0) || nj >= g.n(1) {
        return T::zero();
    }
    (u.comp(axis).get(i, j) + u.comp(axis).get(ni, nj)) * T::lit(0.5)
}

/// `dt` times the largest per-cell outflow rate, summed over both faces of
/// every axis. Not exceeding 1 is exactly the positivity condition of the
/// upwind update.
pub fn cfl_number<T: Real>(u: &VectorField<T>, dt: T) -> T {
    let g = u.grid();
    let mut worst = T::zero();
    for (i, j) in g.cells() {
        let mut out = T::zero();
        for axis in 0..g.dim() {
            let up = face_velocity(u, i, j, axis);
            out += up.max(T::zero()) / g.h(axis);
            let (si, sj) = Grid::<T>::step(axis);
            if (axis == 0 && i > 0) || (axis == 1 && j > 0) {
                let dn = face_velocity(u, i - si as usize, j - sj as usize, axis);
                out += (-dn).max(T::zero()) / g.h(axis);
            }
        }
        worst = worst.max(out);
    }
    worst * dt
}

/// Upwind finite-volume `div(rho u)` with face velocities averaged from the
/// adjacent cells and zero flux through the domain boundary.
pub fn upwind_divergence<T: Real>(rho: &ScalarField<T>, u: &VectorField<T>) -> ScalarField<T> {
    let g = rho.grid().clone();
    let mut out = ScalarField::zeros(&g);
    for axis in 0..g.dim() {
        let (si, sj) = Grid::<T>::step(axis);
        let h = g.h(axis);
        for (i, j) in g.cells() {
            let (ni, nj) = (i + si as usize, j + sj as usize);
            if ni >= g.n(0) || nj >= g.n(1) {
                continue;
            }
            let uf = face_velocity(u, i, j, axis);
            let up = if uf >= T::zero() { rho.get(i, j) } else { rho.get(ni, nj) };
            let flux = uf * up / h;
            out.set(i, j, out.get(i, j) + flux);
            out.set(ni, nj, out.get(ni, nj) - flux);
        }
    }
    out.fill_neumann();
    out
}

/// `rho_n - dt div(rho_n u)` with the upwind flux of [`upwind_divergence`].
pub fn advance_density<T: Real>(
    rho_n: &ScalarField<T>,
    u_next: &VectorField<T>,
    dt: T,
) -> Result<ScalarField<T>> {
    if let Some((cell, v)) = rho_n.values().enumerate().find(|(_, v)| !(*v >= T::zero())) {
        return Err(Error::NegativeDensity { value: v.as_f64(), cell });
    }
    let cfl = cfl_number(u_next, dt);
    if !(cfl <= T::lit(CFL_LIMIT)) {
        return Err(Error::Cfl { cfl: cfl.as_f64(), limit: CFL_LIMIT });
    }
    let d = upwind_divergence(rho_n, u_next);
    Ok(rho_n.zip_map(&d, |r, f| r - dt * f))
}

pub fn min_density<T: Real>(rho: &ScalarField<T>) -> T {
    rho.min()
}

/// A steady velocity field the oracle can sample anywhere in the domain.
pub trait VelocitySource<T: Real> {
    fn velocity(&self, x: [T; 2]) -> [T; 2];
    fn divergence(&self, x: [T; 2]) -> T;
}

/// Bilinear interpolation of a cell-centred field over its padded array.
pub fn interpolate<T: Real>(f: &ScalarField<T>, x: [T; 2]) -> T {
    let g = f.grid();
    let half = T::lit(0.5);
    let mut base = [0isize; 2];
    let mut frac = [T::zero(); 2];
    for a in 0..g.dim() {
        let n = g.n(a) as isize;
        let s = (x[a] / g.h(a) - half).max(T::lit(-1.0)).min(T::from_usize_lossy(g.n(a)));
        let k = (s.floor().to_isize().unwrap_or(-1)).clamp(-1, n - 1);
        base[a] = k;
        frac[a] = s - T::lit(k as f64);
    }
    let (i, j) = (base[0], base[1]);
    let (fx, fy) = (frac[0], frac[1]);
    let lx = |j: isize| f.at(i, j) * (T::one() - fx) + f.at(i + 1, j) * fx;
    if g.dim() == 1 {
        lx(0)
    } else {
        lx(j) * (T::one() - fy) + lx(j + 1) * fy
    }
}

/// Velocity sampled from a grid field with a velocity boundary fill.
pub struct GridVelocity<T: Real> {
    u: VectorField<T>,
    div: ScalarField<T>,
}

impl<T: Real> GridVelocity<T> {
    pub fn new(u: &VectorField<T>) -> Self {
        let u = u.clone().with_velocity_bc();
        let div = divergence(&u).with_neumann();
        GridVelocity { u, div }
    }
}

impl<T: Real> VelocitySource<T> for GridVelocity<T> {
    fn velocity(&self, x: [T; 2]) -> [T; 2] {
        let mut v = [T::zero(); 2];
        for (a, c) in self.u.components().iter().enumerate() {
            v[a] = interpolate(c, x);
        }
        v
    }
    fn divergence(&self, x: [T; 2]) -> T {
        interpolate(&self.div, x)
    }
}

/// Velocity given in closed form.
pub struct AnalyticVelocity<U, D> {
    pub velocity: U,
    pub divergence: D,
}

impl<T: Real, U: Fn([T; 2]) -> [T; 2], D: Fn([T; 2]) -> T> VelocitySource<T> for AnalyticVelocity<U, D> {
    fn velocity(&self, x: [T; 2]) -> [T; 2] {
        (self.velocity)(x)
    }
    fn divergence(&self, x: [T; 2]) -> T {
        (self.divergence)(x)
    }
}

/// Local error tolerance of the characteristic integrator.
pub const ORACLE_TOL: f64 = 1e-10;

/// Traces the characteristic through `x` back over time `t`, returning the
/// foot point and `int_0^t div u` along the path. Dormand-Prince 5(4) with
/// adaptive steps; positions are clamped to the domain.
pub fn trace_characteristic<T: Real>(
    grid: &Grid<T>,
    u: &dyn VelocitySource<T>,
    x: [T; 2],
    t: T,
    tol: T,
) -> ([T; 2], T) {
    let dim = grid.dim();
    let clamp = |y: [T; 3]| {
        let mut p = [T::zero(); 2];
        for a in 0..dim {
            p[a] = y[a].max(T::zero()).min(grid.extents()[a]);
        }
        p
    };
    // y = (Y_x, Y_y, I), dY/ds = -u(Y), dI/ds = div u(Y)
    let rhs = |y: [T; 3]| {
        let p = clamp(y);
        let v = u.velocity(p);
        [-v[0], if dim == 2 { -v[1] } else { T::zero() }, u.divergence(p)]
    };
    let c = |x: f64| T::lit(x);
    let a: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    let b5 = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    let b4 = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut y = [x[0], x[1], T::zero()];
    let mut s = T::zero();
    let mut h = if t > T::zero() { t.min(c(0.01)) } else { T::zero() };
    while s < t {
        h = h.min(t - s);
        let mut k = [[T::zero(); 3]; 7];
        k[0] = rhs(y);
        for st in 1..7 {
            let mut ys = y;
            for (m, coef) in a[st - 1].iter().enumerate() {
                for q in 0..3 {
                    ys[q] += h * c(*coef) * k[m][q];
                }
            }
            k[st] = rhs(ys);
        }
        let mut y5 = y;
        let mut err = T::zero();
        for q in 0..3 {
            let mut d5 = T::zero();
            let mut d4 = T::zero();
            for st in 0..7 {
                d5 += c(b5[st]) * k[st][q];
                d4 += c(b4[st]) * k[st][q];
            }
            y5[q] += h * d5;
            let sc = tol * (T::one() + y[q].abs().max(y5[q].abs()));
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        if err <= T::one() || h <= t * T::epsilon() * c(16.0) {
            s += h;
            y = y5;
            let p = clamp(y);
            y[0] = p[0];
            y[1] = p[1];
        }
        let fac = if err > T::zero() { c(0.9) * err.powf(c(-0.2)) } else { c(5.0) };
        h = h * fac.max(c(0.2)).min(c(5.0));
    }
    (clamp(y), y[2])
}

/// `rho(t, x) = rho0(X0) exp(-int div u)` along the backward characteristic
/// from each sample point; `rho0` is interpolated bilinearly.
pub fn characteristics_oracle<T: Real>(
    rho0: &ScalarField<T>,
    u: &dyn VelocitySource<T>,
    t: T,
    sample_points: &[[T; 2]],
) -> Vec<T> {
    let r0 = rho0.clone().with_neumann();
    sample_points
        .iter()
        .map(|&x| {
            let (foot, int_div) = trace_characteristic(rho0.grid(), u, x, t, T::lit(ORACLE_TOL));
            interpolate(&r0, foot) * (-int_div).exp()
        })
        .collect()
}
