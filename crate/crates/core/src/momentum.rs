//! Linearised momentum block for `u` with frozen coefficients, the coupling
//! operators and the nonlinear remainder `F1`.
//!
//! The split equation is
//!
//! ```text
//! rho0 (u - u_n)/dt - div(2 eta0 D(u) + lambda0 div(u) I) + B0 c + C0 mu = F1
//! ```
//!
//! with `B0 c = [rho0^2 eps_rho0 + rho0 eps0] grad^2 c . grad c0` and
//! `C0 mu = -rho0 mu grad c0`. `F1` is assembled so that its fixed point is
//! the conservative discrete momentum balance
//!
//! ```text
//! (rho u - rho_n u_n)/dt + div(rho u (x) u) - div S - div P - rho f = S_mom.
//! ```

use std::sync::Arc;

use crate::chsolver::{FrozenCoefficients, Iterate};
use crate::error::Result;
use crate::linsys::{CsrMatrix, Solver};
use crate::material::{grad_sq, stress_capillary, MaterialLaws};
use crate::mesh::{
    gradient, hessian_vec, stencil, tensor_divergence, viscous_divergence, Grid, ScalarField,
    TensorField, VectorField,
};
use crate::scalar::Real;
use crate::stepper::StepForcing;

/// `B0 c + C0 mu`.
pub fn coupling_terms<T: Real>(
    frozen: &FrozenCoefficients<T>,
    c_next: &ScalarField<T>,
    mu_next: &ScalarField<T>,
) -> VectorField<T> {
    let b = hessian_vec(c_next, &frozen.grad_c0).scale_by(&frozen.hess_coef0);
    let cm = frozen.grad_c0.scale_by(&(&frozen.rho0 * mu_next)).scale(-T::one());
    &b + &cm
}

/// The five parts of `F1`.
#[derive(Debug, Clone)]
pub struct F1Terms<T: Real = f64> {
    /// `(rho0 - rho)(u - u_n)/dt - div(2[eta0 - eta]D(u) + [lambda0 - lambda] div(u) I)`.
    pub b1: VectorField<T>,
    /// `B0 c - [rho^2 eps_rho + rho eps] grad^2 c . grad c`.
    pub b2: VectorField<T>,
    /// `-d_rho(rho^2 psi_rho) grad rho`.
    pub b3: VectorField<T>,
    /// `-(rho0 grad c0 - rho grad c) mu`.
    pub bmu: VectorField<T>,
    /// Convection, the time-derivative remainder, the lower-order capillary
    /// force, body force and source.
    pub blow: VectorField<T>,
}

impl<T: Real> F1Terms<T> {
    pub fn total(&self) -> VectorField<T> {
        let s = &(&self.b1 + &self.b2) + &(&self.b3 + &self.bmu);
        &s + &self.blow
    }
}

/// `div(rho u (x) u)` with the tensor built pointwise on the padded arrays.
pub(crate) fn convection<T: Real>(rho: &ScalarField<T>, u: &VectorField<T>) -> VectorField<T> {
    let g = u.grid();
    let dim = g.dim();
    let mut t = TensorField::zeros(g);
    for a in 0..dim {
        for b in 0..dim {
            *t.get_mut(a, b) = rho.zip3_map(u.comp(a), u.comp(b), |r, x, y| r * x * y);
        }
    }
    tensor_divergence(&t)
}

/// Full quasilinear capillary Hessian term at the iterate.
fn hessian_term<T: Real>(
    laws: &MaterialLaws<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
) -> VectorField<T> {
    let coef = laws.eval(rho, c, |l, r, c| r * r * l.eps_rho(r, c) + r * l.eps(r, c));
    hessian_vec(c, &gradient(c)).scale_by(&coef)
}

pub fn compute_f1<T: Real>(
    laws: &MaterialLaws<T>,
    w: &Iterate<'_, T>,
    frozen: &FrozenCoefficients<T>,
    u_n: &VectorField<T>,
    dt: T,
    forcing: &StepForcing<T>,
) -> Result<F1Terms<T>> {
    let k = laws.coefficients(w.rho, w.c)?;
    let (rho, c, mu, u) = (w.rho, w.c, w.mu, w.u);
    let rho0 = &frozen.rho0;

    let du = u - u_n;
    let inertia = du.scale_by(&(rho0 - rho)).scale(T::one() / dt);
    let visc = viscous_divergence(&(&frozen.eta0 - &k.eta), &(&frozen.lambda0 - &k.lambda), u);
    let b1 = &inertia - &visc;

    let full_hess = hessian_term(laws, rho, c);
    let b2 = &hessian_vec(c, &frozen.grad_c0).scale_by(&frozen.hess_coef0) - &full_hess;

    let g2 = grad_sq(c);
    let half = T::lit(0.5);
    let psi_rho = laws
        .eval(rho, c, |l, r, c| l.psibar_rho(r, c))
        .zip3_map(&laws.eval(rho, c, |l, r, c| l.eps_rho(r, c)), &g2, |p, e, q| p + half * e * q);
    let psi_rhorho = laws
        .eval(rho, c, |l, r, c| l.psibar_rhorho(r, c))
        .zip3_map(&laws.eval(rho, c, |l, r, c| l.eps_rhorho(r, c)), &g2, |p, e, q| p + half * e * q);
    let d_rho = rho.zip3_map(&psi_rho, &psi_rhorho, |r, p, pp| T::lit(2.0) * r * p + r * r * pp);
    let b3 = gradient(rho).scale_by(&d_rho).scale(-T::one());

    let grad_c = gradient(c);
    let cur = grad_c.scale_by(&(rho * mu));
    let bmu = &cur - &frozen.grad_c0.scale_by(&(rho0 * mu));

    // tensor_div(P) + full Hessian - rho mu grad c - B3 rho: the part of the
    // capillary force not covered by B2, B_mu and B3
    let p = stress_capillary(laws, rho, c)?;
    let cap_low = &(&(&tensor_divergence(&p) + &full_hess) - &cur) - &b3;
    let drho = (rho - rho0).scale(T::one() / dt);
    let mut blow = &(&cap_low - &convection(rho, u)) - &u_n.scale_by(&drho);
    if let Some(f) = &forcing.f_ext {
        blow = &blow + &f.scale_by(rho);
    }
    if let Some(s) = &forcing.s_mom {
        blow = &blow + s;
    }
    Ok(F1Terms { b1, b2, b3, bmu, blow })
}

/// Factorised momentum operator, unknowns interleaved by component.
#[derive(Debug, Clone)]
pub struct MomentumBlock<T: Real = f64> {
    solver: Solver<T>,
    grid: Arc<Grid<T>>,
    /// `rho0 / dt` per cell.
    mass: Vec<T>,
}

/// Assembles `rho0 u/dt - div(2 eta0 D(u) + lambda0 div(u) I)` with the
/// velocity reflection folded in.
pub fn assemble_momentum<T: Real>(frozen: &FrozenCoefficients<T>, dt: T) -> Result<MomentumBlock<T>> {
    let g = frozen.grid().clone();
    let dim = g.dim();
    let n = g.cell_count();
    let mut trip = Vec::with_capacity(n * dim * 16);
    let mut mass = Vec::with_capacity(n);
    for (i, j) in g.cells() {
        let cell = g.cell_index(i, j);
        let m = frozen.rho0.get(i, j) / dt;
        mass.push(m);
        for a in 0..dim {
            let row = dim * cell + a;
            trip.push((row, row, m));
            stencil::viscous_entries(&frozen.eta0, &frozen.lambda0, i as isize, j as isize, a, |p, q, b, w| {
                let (col, sign) = stencil::fold_velocity(&g, p, q, b);
                trip.push((row, dim * col + b, -w * sign));
            });
        }
    }
    let solver = Solver::new(CsrMatrix::from_triplets(dim * n, &trip)?)?;
    Ok(MomentumBlock { solver, grid: g, mass })
}

impl<T: Real> MomentumBlock<T> {
    pub fn solver(&self) -> &Solver<T> {
        &self.solver
    }

    pub fn rhs(&self, rhs: &VectorField<T>, u_n: &VectorField<T>) -> Vec<T> {
        let g = &self.grid;
        let dim = g.dim();
        let mut b = Vec::with_capacity(dim * g.cell_count());
        for (i, j) in g.cells() {
            let m = self.mass[g.cell_index(i, j)];
            for a in 0..dim {
                b.push(rhs.comp(a).get(i, j) + m * u_n.comp(a).get(i, j));
            }
        }
        b
    }

    /// Solves for `u`, returned with the velocity boundary fill.
    pub fn solve(&self, rhs: &VectorField<T>, u_n: &VectorField<T>, tol: T) -> Result<VectorField<T>> {
        let g = &self.grid;
        let dim = g.dim();
        let b = self.rhs(rhs, u_n);
        let sol = self.solver.solve(&b, tol, crate::linsys::default_max_iter(b.len()))?;
        let comps = (0..dim)
            .map(|a| {
                let v: Vec<T> = sol.x.iter().skip(a).step_by(dim).copied().collect();
                ScalarField::from_interior(g, &v)
            })
            .collect();
        Ok(VectorField::from_components(comps).with_velocity_bc())
    }
}

/// One momentum update of the Picard map.
#[allow(clippy::too_many_arguments)]
pub fn solve_momentum<T: Real>(
    laws: &MaterialLaws<T>,
    block: &MomentumBlock<T>,
    frozen: &FrozenCoefficients<T>,
    dt: T,
    w: &Iterate<'_, T>,
    c_next: &ScalarField<T>,
    mu_next: &ScalarField<T>,
    forcing: &StepForcing<T>,
    tol: T,
) -> Result<VectorField<T>> {
    let f1 = compute_f1(laws, w, frozen, &frozen.u0, dt, forcing)?.total();
    let rhs = &f1 - &coupling_terms(frozen, c_next, mu_next);
    block.solve(&rhs, &frozen.u0, tol)
}
