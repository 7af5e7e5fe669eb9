//! Constitutive laws: free energy, pressure, chemical potential and the
//! viscous and capillary stresses, with the partial derivatives the split
//! scheme consumes.

use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{
    div_coeff, divergence, face_energy_density, gradient, integrate, strain_rate,
    tensor_divergence, Grid, ScalarField, TensorField, VectorField,
};
use crate::scalar::Real;

/// Pointwise coefficient functions of `(rho, c)`.
///
/// `psibar` is the homogeneous free energy per unit mass and `eps` the
/// capillarity coefficient; subscripts name partial derivatives.
pub trait ConstitutiveLaw<T: Real>: Debug + Send + Sync {
    fn eta(&self, rho: T, c: T) -> T;
    fn lambda(&self, rho: T, c: T) -> T;
    fn gamma(&self, rho: T, c: T) -> T;

    fn eps(&self, rho: T, c: T) -> T;
    fn eps_rho(&self, rho: T, c: T) -> T;
    fn eps_c(&self, rho: T, c: T) -> T;
    fn eps_rhorho(&self, rho: T, c: T) -> T;
    fn eps_rhoc(&self, rho: T, c: T) -> T;

    fn psibar(&self, rho: T, c: T) -> T;
    fn psibar_rho(&self, rho: T, c: T) -> T;
    fn psibar_c(&self, rho: T, c: T) -> T;
    fn psibar_rhorho(&self, rho: T, c: T) -> T;
    fn psibar_rhoc(&self, rho: T, c: T) -> T;
}

/// `psibar = K ln(rho) + (beta/4)(c^2 - 1)^2` with constant `eps`, `gamma`,
/// `eta`, `lambda`. The pressure is `K rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellLaw<T: Real = f64> {
    pub k: T,
    pub beta: T,
    pub eps: T,
    pub gamma: T,
    pub eta: T,
    pub lambda: T,
}

impl<T: Real> DoubleWellLaw<T> {
    /// `default_logrho_doublewell`.
    pub fn logrho(k: T, beta: T, eps: T, gamma: T, eta: T, lambda: T) -> Self {
        DoubleWellLaw { k, beta, eps, gamma, eta, lambda }
    }

    /// `constant_coefficients`: the double well alone, so the pressure vanishes.
    pub fn constant(beta: T, eps: T, gamma: T, eta: T, lambda: T) -> Self {
        DoubleWellLaw { k: T::zero(), beta, eps, gamma, eta, lambda }
    }
}

impl<T: Real> ConstitutiveLaw<T> for DoubleWellLaw<T> {
    fn eta(&self, _: T, _: T) -> T {
        self.eta
    }
    fn lambda(&self, _: T, _: T) -> T {
        self.lambda
    }
    fn gamma(&self, _: T, _: T) -> T {
        self.gamma
    }
    fn eps(&self, _: T, _: T) -> T {
        self.eps
    }
    fn eps_rho(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn eps_c(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn eps_rhorho(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn eps_rhoc(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn psibar(&self, rho: T, c: T) -> T {
        let w = c * c - T::one();
        let log = if self.k == T::zero() { T::zero() } else { self.k * rho.ln() };
        log + self.beta * T::lit(0.25) * w * w
    }
    fn psibar_rho(&self, rho: T, _: T) -> T {
        self.k / rho
    }
    fn psibar_c(&self, _: T, c: T) -> T {
        self.beta * c * (c * c - T::one())
    }
    fn psibar_rhorho(&self, rho: T, _: T) -> T {
        -self.k / (rho * rho)
    }
    fn psibar_rhoc(&self, _: T, _: T) -> T {
        T::zero()
    }
}

/// Names of the built-in laws.
pub const LAW_NAMES: [&str; 2] = ["default_logrho_doublewell", "constant_coefficients"];

/// Parameters shared by the built-in laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawParams {
    pub k: f64,
    pub beta: f64,
    pub eps: f64,
    pub gamma: f64,
    pub eta: f64,
    pub lambda: f64,
}

impl Default for LawParams {
    fn default() -> Self {
        LawParams { k: 1.0, beta: 1.0, eps: 1e-3, gamma: 1.0, eta: 1.0, lambda: 0.0 }
    }
}

/// A validated law: positivity guards on every coefficient evaluation and a
/// finite-difference audit of the supplied partials at construction.
#[derive(Debug, Clone)]
pub struct MaterialLaws<T: Real = f64> {
    name: String,
    law: Arc<dyn ConstitutiveLaw<T>>,
}

/// Samples used by the partial-derivative audit.
pub const SELF_CHECK_SAMPLES: usize = 100;
pub const SELF_CHECK_RTOL: f64 = 1e-5;

impl<T: Real> MaterialLaws<T> {
    pub fn new(name: impl Into<String>, law: Arc<dyn ConstitutiveLaw<T>>) -> Result<Self> {
        let laws = MaterialLaws { name: name.into(), law };
        laws.self_check()?;
        Ok(laws)
    }

    /// Resolves a built-in law by name.
    pub fn builtin(name: &str, p: &LawParams) -> Result<Self> {
        let l = |x: f64| T::lit(x);
        let law = match name {
            "default_logrho_doublewell" => {
                DoubleWellLaw::logrho(l(p.k), l(p.beta), l(p.eps), l(p.gamma), l(p.eta), l(p.lambda))
            }
            "constant_coefficients" => {
                DoubleWellLaw::constant(l(p.beta), l(p.eps), l(p.gamma), l(p.eta), l(p.lambda))
            }
            other => {
                return Err(Error::Material(format!(
                    "unknown law `{other}` (expected one of {})",
                    LAW_NAMES.join(", ")
                )))
            }
        };
        Self::new(name, Arc::new(law))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn law(&self) -> &dyn ConstitutiveLaw<T> {
        self.law.as_ref()
    }

    /// Compares every supplied partial with a central difference of its
    /// parent at random `(rho, c)` in `[0.1, 10] x [-2, 2]`.
    pub fn self_check(&self) -> Result<()> {
        let law = self.law.as_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let eps = T::epsilon();
        let rtol = T::lit(SELF_CHECK_RTOL).max(T::lit(100.0) * eps.powf(T::lit(2.0 / 3.0)));
        type F<T> = fn(&dyn ConstitutiveLaw<T>, T, T) -> T;
        let checks: [(&str, F<T>, F<T>, bool); 8] = [
            ("psibar_rho", |l, r, c| l.psibar(r, c), |l, r, c| l.psibar_rho(r, c), true),
            ("psibar_c", |l, r, c| l.psibar(r, c), |l, r, c| l.psibar_c(r, c), false),
            ("psibar_rhorho", |l, r, c| l.psibar_rho(r, c), |l, r, c| l.psibar_rhorho(r, c), true),
            ("psibar_rhoc", |l, r, c| l.psibar_rho(r, c), |l, r, c| l.psibar_rhoc(r, c), false),
            ("eps_rho", |l, r, c| l.eps(r, c), |l, r, c| l.eps_rho(r, c), true),
            ("eps_c", |l, r, c| l.eps(r, c), |l, r, c| l.eps_c(r, c), false),
            ("eps_rhorho", |l, r, c| l.eps_rho(r, c), |l, r, c| l.eps_rhorho(r, c), true),
            ("eps_rhoc", |l, r, c| l.eps_rho(r, c), |l, r, c| l.eps_rhoc(r, c), false),
        ];
        for _ in 0..SELF_CHECK_SAMPLES {
            let rho = T::lit(rng.gen_range(0.1..10.0));
            let c = T::lit(rng.gen_range(-2.0..2.0));
            self.check_point(rho, c, 0)?;
            for (name, parent, partial, wrt_rho) in &checks {
                let x = if *wrt_rho { rho } else { c };
                let h = eps.cbrt() * x.abs().max(T::one());
                let fd = if *wrt_rho {
                    (parent(law, rho + h, c) - parent(law, rho - h, c)) / (h + h)
                } else {
                    (parent(law, rho, c + h) - parent(law, rho, c - h)) / (h + h)
                };
                let exact = partial(law, rho, c);
                let scale = exact.abs().max(T::one());
                if !((exact - fd).abs() <= rtol * scale) {
                    return Err(Error::Material(format!(
                        "{}: `{name}` disagrees with a finite difference at rho = {rho}, c = {c} \
                         (supplied {exact}, difference quotient {fd})",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, rho: T, c: T, cell: usize) -> Result<()> {
        let l = self.law.as_ref();
        let eta = l.eta(rho, c);
        let lam = l.lambda(rho, c);
        let guards = [
            ("eta", eta),
            ("2 eta + lambda", eta + eta + lam),
            ("eps", l.eps(rho, c)),
            ("gamma", l.gamma(rho, c)),
        ];
        for (name, v) in guards {
            if !(v > T::zero()) {
                return Err(Error::NonPositive { name, value: v.as_f64(), cell });
            }
        }
        Ok(())
    }

    /// Evaluates `f(law, rho, c)` on the padded arrays, so ghosts follow the
    /// inputs' boundary fill.
    pub fn eval(
        &self,
        rho: &ScalarField<T>,
        c: &ScalarField<T>,
        f: impl Fn(&dyn ConstitutiveLaw<T>, T, T) -> T,
    ) -> ScalarField<T> {
        let law = self.law.as_ref();
        rho.zip_map(c, |r, cc| f(law, r, cc))
    }

    /// Runs the positivity guards on every cell.
    pub fn check_fields(&self, rho: &ScalarField<T>, c: &ScalarField<T>) -> Result<()> {
        for (cell, (r, cc)) in rho.values().zip(c.values()).enumerate() {
            self.check_point(r, cc, cell)?;
        }
        Ok(())
    }

    pub fn coefficients(&self, rho: &ScalarField<T>, c: &ScalarField<T>) -> Result<Coefficients<T>> {
        self.check_fields(rho, c)?;
        Ok(Coefficients {
            eta: self.eval(rho, c, |l, r, c| l.eta(r, c)),
            lambda: self.eval(rho, c, |l, r, c| l.lambda(r, c)),
            eps: self.eval(rho, c, |l, r, c| l.eps(r, c)),
            gamma: self.eval(rho, c, |l, r, c| l.gamma(r, c)),
        })
    }
}

/// Guarded coefficient fields at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients<T: Real = f64> {
    pub eta: ScalarField<T>,
    pub lambda: ScalarField<T>,
    pub eps: ScalarField<T>,
    pub gamma: ScalarField<T>,
}

/// One time level of the unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T: Real = f64> {
    pub rho: ScalarField<T>,
    pub u: VectorField<T>,
    pub c: ScalarField<T>,
    pub mu: ScalarField<T>,
    pub t: T,
}

impl<T: Real> State<T> {
    /// Checks grids and density positivity, then refreshes every ghost layer.
    pub fn new(
        rho: ScalarField<T>,
        u: VectorField<T>,
        c: ScalarField<T>,
        mu: ScalarField<T>,
        t: T,
    ) -> Result<Self> {
        let g = rho.grid();
        if **u.grid() != **g || **c.grid() != **g || **mu.grid() != **g || u.dim() != g.dim() {
            return Err(Error::GridMismatch);
        }
        check_density(&rho)?;
        Ok(State {
            rho: rho.with_neumann(),
            u: u.with_velocity_bc(),
            c: c.with_neumann(),
            mu: mu.with_neumann(),
            t,
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.rho.grid()
    }
}

pub(crate) fn check_density<T: Real>(rho: &ScalarField<T>) -> Result<()> {
    match rho.values().enumerate().find(|(_, v)| !(*v > T::zero())) {
        Some((cell, v)) => Err(Error::NonPositive { name: "rho", value: v.as_f64(), cell }),
        None => Ok(()),
    }
}

/// Squared centred gradient magnitude; ghosts follow a Neumann fill.
pub(crate) fn grad_sq<T: Real>(c: &ScalarField<T>) -> ScalarField<T> {
    let g = gradient(c);
    g.dot(&g).with_neumann()
}

/// `pi = rho^2 psibar_rho`.
pub fn pressure<T: Real>(
    laws: &MaterialLaws<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    check_density(rho)?;
    Ok(laws.eval(rho, c, |l, r, c| r * r * l.psibar_rho(r, c)))
}

/// `psi = psibar + eps |grad c|^2 / 2`, per unit mass.
pub fn free_energy_density<T: Real>(
    laws: &MaterialLaws<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
    grad_c: &VectorField<T>,
) -> ScalarField<T> {
    let g2 = grad_c.dot(grad_c);
    let base = laws.eval(rho, c, |l, r, c| l.psibar(r, c));
    let eps = laws.eval(rho, c, |l, r, c| l.eps(r, c));
    base.zip3_map(&eps, &g2, |p, e, q| p + T::lit(0.5) * e * q)
}

/// `d psi / d c = psibar_c + eps_c |grad c|^2 / 2`.
pub(crate) fn dpsi_dc<T: Real>(
    laws: &MaterialLaws<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
) -> ScalarField<T> {
    let g2 = grad_sq(c);
    let pc = laws.eval(rho, c, |l, r, c| l.psibar_c(r, c));
    let ec = laws.eval(rho, c, |l, r, c| l.eps_c(r, c));
    pc.zip3_map(&ec, &g2, |p, e, q| p + T::lit(0.5) * e * q)
}

/// `mu = d psi / d c - div(eps rho grad c) / rho`; `c` needs a Neumann fill.
/// The result carries a Neumann fill.
pub fn chemical_potential<T: Real>(
    laws: &MaterialLaws<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    check_density(rho)?;
    laws.check_fields(rho, c)?;
    let er = &laws.eval(rho, c, |l, r, c| l.eps(r, c)) * rho;
    let d = div_coeff(&er, c)?;
    let psi_c = dpsi_dc(laws, rho, c);
    let mut mu = psi_c.zip3_map(&d, rho, |p, d, r| p - d / r);
    mu.fill_neumann();
    Ok(mu)
}

/// `S = 2 eta D(u) + lambda div(u) I`.
pub fn stress_viscous<T: Real>(
    laws: &MaterialLaws<T>,
    u: &VectorField<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
) -> Result<TensorField<T>> {
    let k = laws.coefficients(rho, c)?;
    let d = strain_rate(u);
    let div = divergence(u);
    let dim = u.dim();
    let mut s = TensorField::zeros(u.grid());
    for a in 0..dim {
        for b in 0..dim {
            let mut v = d.get(a, b).zip_map(&k.eta, |x, e| T::lit(2.0) * e * x);
            if a == b {
                v = v.zip3_map(&k.lambda, &div, |x, l, dv| x + l * dv);
            }
            *s.get_mut(a, b) = v;
        }
    }
    Ok(s)
}

/// `P = -(pi + rho^2 eps_rho |grad c|^2 / 2) I - rho eps grad c (x) grad c`,
/// with a reflection ghost fill.
pub fn stress_capillary<T: Real>(
    laws: &MaterialLaws<T>,
    rho: &ScalarField<T>,
    c: &ScalarField<T>,
) -> Result<TensorField<T>> {
    let pi = pressure(laws, rho, c)?;
    laws.check_fields(rho, c)?;
    let gc = gradient(c);
    let g2 = gc.dot(&gc);
    let eps = laws.eval(rho, c, |l, r, c| l.eps(r, c));
    let eps_rho = laws.eval(rho, c, |l, r, c| l.eps_rho(r, c));
    let half = T::lit(0.5);
    let iso = pi.zip3_map(&eps_rho.zip_map(rho, |e, r| r * r * e), &g2, |p, e, q| -(p + half * e * q));
    let rho_eps = rho * &eps;
    let dim = rho.grid().dim();
    let mut out = TensorField::zeros(rho.grid());
    for a in 0..dim {
        for b in 0..dim {
            let mut v = rho_eps.zip3_map(gc.comp(a), gc.comp(b), |re, x, y| -re * x * y);
            if a == b {
                v = &v + &iso;
            }
            *out.get_mut(a, b) = v;
        }
    }
    out.fill_reflect();
    Ok(out)
}

/// Per-cell magnitude of `div P + rho grad(psi + rho psi_rho) - rho mu grad c`.
pub fn capillary_identity_residual<T: Real>(
    laws: &MaterialLaws<T>,
    state: &State<T>,
) -> Result<ScalarField<T>> {
    let (rho, c) = (&state.rho, &state.c);
    let p = stress_capillary(laws, rho, c)?;
    let mu = chemical_potential(laws, rho, c)?;
    let g2 = grad_sq(c);
    let half = T::lit(0.5);
    let psi = laws
        .eval(rho, c, |l, r, c| l.psibar(r, c))
        .zip3_map(&laws.eval(rho, c, |l, r, c| l.eps(r, c)), &g2, |p, e, q| p + half * e * q);
    let psi_rho = laws
        .eval(rho, c, |l, r, c| l.psibar_rho(r, c))
        .zip3_map(&laws.eval(rho, c, |l, r, c| l.eps_rho(r, c)), &g2, |p, e, q| p + half * e * q);
    let q = psi.zip3_map(&psi_rho, rho, |a, b, r| a + r * b).with_neumann();
    let gq = gradient(&q);
    let gc = gradient(c);
    let dp = tensor_divergence(&p);
    let mut acc = ScalarField::zeros(rho.grid());
    for a in 0..rho.grid().dim() {
        let ra = dp
            .comp(a)
            .zip3_map(rho, gq.comp(a), |d, r, x| d + r * x)
            .zip3_map(&(rho * &mu), gc.comp(a), |v, rm, y| v - rm * y);
        acc = acc.zip_map(&ra, |s, v| s + v * v);
    }
    Ok(acc.map(|v| v.sqrt()))
}

/// `E = int rho |u|^2 / 2 + rho psibar + G`, where the gradient energy `G`
/// sums `eps rho |Dc|^2 / 2` over cell faces. Its variation in `c` is the
/// flux-form `-div(eps rho grad c)` used throughout, which makes the
/// discrete energy balance exact up to time truncation.
pub fn total_energy<T: Real>(laws: &MaterialLaws<T>, state: &State<T>) -> Result<T> {
    let (rho, c) = (&state.rho, &state.c);
    laws.check_fields(rho, c)?;
    let kin = state.u.dot(&state.u).zip_map(rho, |q, r| T::lit(0.5) * r * q);
    let bulk = laws.eval(rho, c, |l, r, c| r * l.psibar(r, c));
    let er = &laws.eval(rho, c, |l, r, c| l.eps(r, c)) * rho;
    let grad = face_energy_density(&er, c);
    Ok(integrate(&kin) + integrate(&bulk) + T::lit(0.5) * integrate(&grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_grid, FaceTag};
    use std::f64::consts::PI;

    fn law(k: f64, eps: f64) -> MaterialLaws {
        MaterialLaws::builtin(
            "default_logrho_doublewell",
            &LawParams { k, beta: 1.0, eps, gamma: 1.0, eta: 1.0, lambda: 0.0 },
        )
        .unwrap()
    }

    /// A law with density-dependent capillarity for exercising partials.
    #[derive(Debug)]
    struct Soft;
    impl ConstitutiveLaw<f64> for Soft {
        fn eta(&self, r: f64, _: f64) -> f64 {
            1.0 + r
        }
        fn lambda(&self, _: f64, c: f64) -> f64 {
            -0.5 + 0.1 * c * c
        }
        fn gamma(&self, _: f64, c: f64) -> f64 {
            1.0 + c * c
        }
        fn eps(&self, r: f64, c: f64) -> f64 {
            (1.0 + c * c) / (1.0 + r)
        }
        fn eps_rho(&self, r: f64, c: f64) -> f64 {
            -(1.0 + c * c) / ((1.0 + r) * (1.0 + r))
        }
        fn eps_c(&self, r: f64, c: f64) -> f64 {
            2.0 * c / (1.0 + r)
        }
        fn eps_rhorho(&self, r: f64, c: f64) -> f64 {
            2.0 * (1.0 + c * c) / (1.0 + r).powi(3)
        }
        fn eps_rhoc(&self, r: f64, c: f64) -> f64 {
            -2.0 * c / ((1.0 + r) * (1.0 + r))
        }
        fn psibar(&self, r: f64, c: f64) -> f64 {
            r * r * c + c.powi(4)
        }
        fn psibar_rho(&self, r: f64, c: f64) -> f64 {
            2.0 * r * c
        }
        fn psibar_c(&self, r: f64, c: f64) -> f64 {
            r * r + 4.0 * c.powi(3)
        }
        fn psibar_rhorho(&self, _: f64, c: f64) -> f64 {
            2.0 * c
        }
        fn psibar_rhoc(&self, r: f64, _: f64) -> f64 {
            2.0 * r
        }
    }

    #[test]
    fn self_check_accepts_consistent_partials() {
        MaterialLaws::new("soft", Arc::new(Soft)).unwrap();
        law(1.0, 1e-3);
        MaterialLaws::<f32>::builtin("constant_coefficients", &LawParams::default()).unwrap();
    }

    #[test]
    fn self_check_rejects_wrong_partial() {
        #[derive(Debug)]
        struct Bad;
        impl ConstitutiveLaw<f64> for Bad {
            fn eta(&self, _: f64, _: f64) -> f64 {
                1.0
            }
            fn lambda(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn gamma(&self, _: f64, _: f64) -> f64 {
                1.0
            }
            fn eps(&self, _: f64, _: f64) -> f64 {
                1.0
            }
            fn eps_rho(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn eps_c(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn eps_rhorho(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn eps_rhoc(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn psibar(&self, r: f64, _: f64) -> f64 {
                r * r
            }
            fn psibar_rho(&self, r: f64, _: f64) -> f64 {
                2.0 * r * 1.001
            }
            fn psibar_c(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn psibar_rhorho(&self, _: f64, _: f64) -> f64 {
                2.0
            }
            fn psibar_rhoc(&self, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        let err = MaterialLaws::new("bad", Arc::new(Bad)).unwrap_err();
        assert!(matches!(err, Error::Material(m) if m.contains("psibar_rho")));
    }

    #[test]
    fn positivity_guards_fire() {
        let p = LawParams { eta: 1.0, lambda: -3.0, ..LawParams::default() };
        assert!(matches!(
            MaterialLaws::<f64>::builtin("constant_coefficients", &p),
            Err(Error::NonPositive { name: "2 eta + lambda", .. })
        ));
        let p = LawParams { gamma: 0.0, ..LawParams::default() };
        assert!(MaterialLaws::<f64>::builtin("default_logrho_doublewell", &p).is_err());
        assert!(MaterialLaws::<f64>::builtin("nope", &LawParams::default()).is_err());
    }

    fn g1(n: usize) -> Arc<Grid> {
        make_grid(&[1.0], &[n], &[FaceTag::NoSlip; 2]).unwrap()
    }

    #[test]
    fn pressure_examples() {
        let g = g1(4);
        let c = ScalarField::constant(&g, 0.3);
        let p = pressure(&law(1.0, 1.0), &ScalarField::constant(&g, 2.0), &c).unwrap();
        assert!((p.get(1, 0) - 2.0).abs() < 1e-14);
        let p = pressure(&law(0.5, 1.0), &ScalarField::constant(&g, 3.0), &c).unwrap();
        assert!((p.get(2, 0) - 1.5).abs() < 1e-14);
        let lc = MaterialLaws::builtin("constant_coefficients", &LawParams::default()).unwrap();
        assert_eq!(pressure(&lc, &ScalarField::constant(&g, 3.0), &c).unwrap().max_abs(), 0.0);
        assert!(pressure(&lc, &ScalarField::constant(&g, 0.0), &c).is_err());
    }

    #[test]
    fn free_energy_examples() {
        let g = g1(4);
        let l = law(1.0, 2.0);
        let one = ScalarField::constant(&g, 1.0);
        let zero_grad = VectorField::zeros(&g);
        assert!(free_energy_density(&l, &one, &one, &zero_grad).max_abs() < 1e-15);
        // psibar = 0 at rho = 1, c = 1; eps = 2, |grad c| = 3
        let gc = VectorField::from_components(vec![ScalarField::constant(&g, 3.0)]);
        let psi = free_energy_density(&l, &one, &one, &gc);
        assert!((psi.get(0, 0) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn chemical_potential_constant_c() {
        let g = g1(6);
        let l = law(1.0, 0.1);
        let rho = ScalarField::from_fn(&g, |x| 1.0 + x[0]).with_neumann();
        for cv in [1.0, 0.0, 0.4] {
            let c = ScalarField::constant(&g, cv);
            let mu = chemical_potential(&l, &rho, &c).unwrap();
            for v in mu.values() {
                assert_eq!(v, cv * (cv * cv - 1.0));
            }
        }
    }

    #[test]
    fn chemical_potential_second_order() {
        let l = law(1.0, 0.1);
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = g1(n);
            let rho = ScalarField::constant(&g, 1.0);
            let c = ScalarField::from_fn(&g, |x| (PI * x[0]).cos()).with_neumann();
            let mu = chemical_potential(&l, &rho, &c).unwrap();
            let mut e: f64 = 0.0;
            for (i, j) in g.cells() {
                let cv = (PI * g.center(i, j)[0]).cos();
                let exact = cv * (cv * cv - 1.0) + 0.1 * PI * PI * cv;
                e = e.max((mu.get(i, j) - exact).abs());
            }
            errs.push(e);
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.8, "rate {rate}");
        }
    }

    #[test]
    fn stress_examples() {
        let g = make_grid(&[1.0, 1.0], &[8, 8], &[FaceTag::Slip; 4]).unwrap();
        let l = law(1.0, 1.0);
        let rho = ScalarField::constant(&g, 1.0);
        let c = ScalarField::constant(&g, 0.2);
        let s = stress_viscous(&l, &VectorField::zeros(&g), &rho, &c).unwrap();
        assert_eq!(s.max_abs(), 0.0);
        let u = VectorField::from_fn(&g, |x| [x[0], 0.0]).with_velocity_bc();
        let s = stress_viscous(&l, &u, &rho, &c).unwrap();
        assert!((s.get(0, 0).get(3, 4) - 2.0).abs() < 1e-12);
        assert!(s.get(1, 1).get(3, 4).abs() < 1e-12);
        let u = VectorField::from_fn(&g, |x| [x[1], -x[0]]).with_velocity_bc();
        let s = stress_viscous(&l, &u, &rho, &c).unwrap();
        assert!(s.get(0, 1).get(3, 4).abs() < 1e-12);

        let p = stress_capillary(&l, &ScalarField::constant(&g, 2.0), &c).unwrap();
        assert!((p.get(0, 0).get(2, 2) + 2.0).abs() < 1e-14);
        assert_eq!(p.get(0, 1).get(2, 2), 0.0);
        assert_eq!(tensor_divergence(&p).max_abs(), 0.0);

        let lc = MaterialLaws::builtin(
            "constant_coefficients",
            &LawParams { eps: 1.0, ..LawParams::default() },
        )
        .unwrap();
        let c = ScalarField::from_fn(&g, |x| x[0]).with_neumann();
        let p = stress_capillary(&lc, &rho, &c).unwrap();
        assert!((p.get(0, 0).get(3, 3) + 1.0).abs() < 1e-12);
        assert!(p.get(1, 1).get(3, 3).abs() < 1e-12);
        assert!(p.get(0, 1).get(3, 3).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let g = make_grid(&[1.0, 1.0], &[4, 4], &[FaceTag::Slip; 4]).unwrap();
        let lc = MaterialLaws::<f64>::builtin("constant_coefficients", &LawParams::default()).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        let st = State::new(one.clone(), VectorField::zeros(&g), one.clone(), ScalarField::zeros(&g), 0.0)
            .unwrap();
        assert!(total_energy(&lc, &st).unwrap().abs() < 1e-15);
        let u = VectorField::from_components(vec![one.clone(), ScalarField::zeros(&g)]);
        let st = State::new(one.clone(), u, one.clone(), ScalarField::zeros(&g), 0.0).unwrap();
        assert!((total_energy(&lc, &st).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn capillary_identity_constant_state() {
        let g = make_grid(&[1.0, 1.0], &[6, 6], &[FaceTag::NoSlip; 4]).unwrap();
        let st = State::new(
            ScalarField::constant(&g, 1.3),
            VectorField::zeros(&g),
            ScalarField::constant(&g, 0.4),
            ScalarField::zeros(&g),
            0.0,
        )
        .unwrap();
        let r = capillary_identity_residual(&law(1.0, 0.1), &st).unwrap();
        assert!(r.max_abs() < 1e-12);
    }

    #[test]
    fn capillary_identity_converges() {
        let soft = MaterialLaws::new("soft", Arc::new(Soft)).unwrap();
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = make_grid(&[1.0, 1.0], &[n, n], &[FaceTag::NoSlip; 4]).unwrap();
            let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * (PI * x[0]).cos() * (PI * x[1]).cos());
            let c = ScalarField::from_fn(&g, |x| 0.5 * (PI * x[0]).cos() + 0.2 * (2.0 * PI * x[1]).cos());
            let st = State::new(rho, VectorField::zeros(&g), c, ScalarField::zeros(&g), 0.0).unwrap();
            errs.push(capillary_identity_residual(&soft, &st).unwrap().max_abs());
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.0, "{errs:?}");
        }
    }
}
