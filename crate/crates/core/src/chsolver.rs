//! Linearised Cahn-Hilliard block for `(c, mu)` with coefficients frozen at
//! the start of the step, and its nonlinear remainders `F2` and `F_mu`.
//!
//! The remainders are built so that a Picard fixed point satisfies the
//! unsplit discrete equations exactly:
//!
//! ```text
//! (rho c - rho_n c_n)/dt + div(c rho u) - div(gamma grad mu) = S_ch
//! mu - d_c psi + div(eps rho grad c)/rho = S_mu
//! ```
//!
//! Wherever the split form multiplies a flux divergence by a coefficient
//! ratio, the discrete commutator is carried in the remainder instead of a
//! product-rule expansion.

use std::sync::Arc;

use crate::error::Result;
use crate::linsys::{CsrMatrix, Solver};
use crate::material::{check_density, dpsi_dc, MaterialLaws, State};
use crate::mesh::{divergence, flux_div, gradient, stencil, Grid, ScalarField, VectorField};
use crate::scalar::Real;
use crate::stepper::StepForcing;

/// Coefficients evaluated at the step's base state.
#[derive(Debug, Clone)]
pub struct FrozenCoefficients<T: Real = f64> {
    pub rho0: ScalarField<T>,
    pub c0: ScalarField<T>,
    pub u0: VectorField<T>,
    pub eps0: ScalarField<T>,
    pub gamma0: ScalarField<T>,
    pub eta0: ScalarField<T>,
    pub lambda0: ScalarField<T>,
    pub grad_c0: VectorField<T>,
    /// `rho0^2 eps_rho(rho0, c0) + rho0 eps0`, the coefficient of the
    /// capillary Hessian coupling.
    pub hess_coef0: ScalarField<T>,
    /// `eps0 / gamma0`.
    pub ratio0: ScalarField<T>,
}

impl<T: Real> FrozenCoefficients<T> {
    pub fn new(laws: &MaterialLaws<T>, base: &State<T>) -> Result<Self> {
        let (rho, c) = (&base.rho, &base.c);
        check_density(rho)?;
        let k = laws.coefficients(rho, c)?;
        let eps_rho = laws.eval(rho, c, |l, r, c| l.eps_rho(r, c));
        let hess_coef0 = rho.zip3_map(&k.eps, &eps_rho, |r, e, er| r * r * er + r * e);
        let ratio0 = k.eps.zip_map(&k.gamma, |e, g| e / g);
        Ok(FrozenCoefficients {
            rho0: rho.clone(),
            c0: c.clone(),
            u0: base.u.clone(),
            grad_c0: gradient(c),
            eps0: k.eps,
            gamma0: k.gamma,
            eta0: k.eta,
            lambda0: k.lambda,
            hess_coef0,
            ratio0,
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.rho0.grid()
    }
}

/// Picard iterate `w^k = (u, c, mu)` together with its density.
#[derive(Debug, Clone)]
pub struct Iterate<'a, T: Real> {
    pub u: &'a VectorField<T>,
    pub c: &'a ScalarField<T>,
    pub mu: &'a ScalarField<T>,
    pub rho: &'a ScalarField<T>,
}

/// `div(c rho u)` with the centred divergence.
pub(crate) fn c_rho_u_divergence<T: Real>(
    c: &ScalarField<T>,
    rho: &ScalarField<T>,
    u: &VectorField<T>,
) -> ScalarField<T> {
    divergence(&u.scale_by(&(c * rho)))
}

/// `F2 = r {([rho0 - rho] c - [rho0 - rho_n] c_n)/dt - div(c rho u)
///  - div([gamma0 - gamma] grad mu)} + [r div(gamma0 grad mu) - div(eps0 grad mu)]
///  + r S_ch` with `r = eps0 / gamma0`.
pub fn compute_f2<T: Real>(
    laws: &MaterialLaws<T>,
    w: &Iterate<'_, T>,
    frozen: &FrozenCoefficients<T>,
    dt: T,
    forcing: &StepForcing<T>,
) -> Result<ScalarField<T>> {
    let k = laws.coefficients(w.rho, w.c)?;
    let rho0 = &frozen.rho0;
    // rho0 is rho_n, so the [rho0 - rho_n] c_n term vanishes identically
    let time = w.rho.zip3_map(w.c, rho0, |r, c, r0| (r0 - r) * c / dt);
    let adv = c_rho_u_divergence(w.c, w.rho, w.u);
    let dgam = &frozen.gamma0 - &k.gamma;
    let diff = flux_div(&dgam, w.mu);
    let r = &frozen.ratio0;
    let mut inner = time.zip3_map(&adv, &diff, |t, a, d| t - a - d);
    if let Some(s) = &forcing.s_ch {
        inner = &inner + s;
    }
    let comm = r.zip3_map(&flux_div(&frozen.gamma0, w.mu), &flux_div(&frozen.eps0, w.mu), |r, a, b| {
        r * a - b
    });
    Ok(r.zip3_map(&inner, &comm, |r, i, c| r * i + c))
}

/// `F_mu = div([eps - eps0] grad c) + [div(eps rho grad c)/rho - div(eps grad c)]
///  - d_c psi - S_mu`.
pub fn compute_fmu<T: Real>(
    laws: &MaterialLaws<T>,
    w: &Iterate<'_, T>,
    frozen: &FrozenCoefficients<T>,
    forcing: &StepForcing<T>,
) -> Result<ScalarField<T>> {
    check_density(w.rho)?;
    let k = laws.coefficients(w.rho, w.c)?;
    let d_eps = flux_div(&(&k.eps - &frozen.eps0), w.c);
    let er = &k.eps * w.rho;
    let comm = flux_div(&er, w.c).zip3_map(w.rho, &flux_div(&k.eps, w.c), |a, r, b| a / r - b);
    let psi_c = dpsi_dc(laws, w.rho, w.c);
    let mut out = d_eps.zip3_map(&comm, &psi_c, |a, b, p| a + b - p);
    if let Some(s) = &forcing.s_mu {
        out = &out - s;
    }
    Ok(out)
}

/// Factorised CH operator for one step, unknowns interleaved `(c, mu)` per
/// cell.
#[derive(Debug, Clone)]
pub struct ChBlock<T: Real = f64> {
    solver: Solver<T>,
    /// `eps0 rho0 / (gamma0 dt)` per cell.
    mass: Vec<T>,
    grid: Arc<Grid<T>>,
}

/// Assembles
/// `(eps0 rho0/gamma0)(c - c_n)/dt - div(eps0 grad mu) = F2` and
/// `-mu - div(eps0 grad c) = F_mu` with Neumann reflection folded in.
pub fn assemble_ch_system<T: Real>(frozen: &FrozenCoefficients<T>, dt: T) -> Result<ChBlock<T>> {
    let g = frozen.grid().clone();
    let n = g.cell_count();
    let mut trip = Vec::with_capacity(n * 12);
    let mut mass = Vec::with_capacity(n);
    for (i, j) in g.cells() {
        let row = g.cell_index(i, j);
        let m = frozen.eps0.get(i, j) * frozen.rho0.get(i, j) / (frozen.gamma0.get(i, j) * dt);
        mass.push(m);
        trip.push((2 * row, 2 * row, m));
        trip.push((2 * row + 1, 2 * row + 1, -T::one()));
        stencil::flux_div_entries(&frozen.eps0, i as isize, j as isize, |p, q, w| {
            let col = stencil::fold_scalar(&g, p, q);
            trip.push((2 * row, 2 * col + 1, -w));
            trip.push((2 * row + 1, 2 * col, -w));
        });
    }
    let solver = Solver::new(CsrMatrix::from_triplets(2 * n, &trip)?)?;
    Ok(ChBlock { solver, mass, grid: g })
}

impl<T: Real> ChBlock<T> {
    pub fn solver(&self) -> &Solver<T> {
        &self.solver
    }

    /// Right-hand side for given remainders and `c_n`.
    pub fn rhs(&self, f2: &ScalarField<T>, fmu: &ScalarField<T>, c_n: &ScalarField<T>) -> Vec<T> {
        let g = &self.grid;
        let mut b = Vec::with_capacity(2 * g.cell_count());
        for (i, j) in g.cells() {
            let row = g.cell_index(i, j);
            b.push(f2.get(i, j) + self.mass[row] * c_n.get(i, j));
            b.push(fmu.get(i, j));
        }
        b
    }

    /// Solves for `(c, mu)` as a correction to `guess`, both returned with a
    /// Neumann fill.
    pub fn solve(
        &self,
        f2: &ScalarField<T>,
        fmu: &ScalarField<T>,
        c_n: &ScalarField<T>,
        guess: (&ScalarField<T>, &ScalarField<T>),
        tol: T,
    ) -> Result<(ScalarField<T>, ScalarField<T>)> {
        let b = self.rhs(f2, fmu, c_n);
        let g = &self.grid;
        let mut x0 = Vec::with_capacity(b.len());
        for (i, j) in g.cells() {
            x0.push(guess.0.get(i, j));
            x0.push(guess.1.get(i, j));
        }
        let sol = self.solver.solve_from(&b, &x0, tol, crate::linsys::default_max_iter(b.len()))?;
        let c: Vec<T> = sol.x.iter().step_by(2).copied().collect();
        let mu: Vec<T> = sol.x.iter().skip(1).step_by(2).copied().collect();
        Ok((
            ScalarField::from_interior(&self.grid, &c).with_neumann(),
            ScalarField::from_interior(&self.grid, &mu).with_neumann(),
        ))
    }
}

/// One CH update of the Picard map.
pub fn solve_ch<T: Real>(
    laws: &MaterialLaws<T>,
    block: &ChBlock<T>,
    frozen: &FrozenCoefficients<T>,
    dt: T,
    w: &Iterate<'_, T>,
    forcing: &StepForcing<T>,
    tol: T,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let f2 = compute_f2(laws, w, frozen, dt, forcing)?;
    let fmu = compute_fmu(laws, w, frozen, forcing)?;
    block.solve(&f2, &fmu, &frozen.c0, (w.c, w.mu), tol)
}
