//! Manufactured solutions and the refinement harness.
//!
//! Fields on the unit square with slip walls: a Taylor-Green velocity,
//! constant density and cosine modes for `c` and `mu`, all scaled by a
//! common time factor. The sources are the residuals of the unsplit
//! equations at the exact fields and are added to the right-hand sides of
//! the primal equations.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::material::{LawParams, MaterialLaws, State};
use crate::mesh::{discrete_l2, make_grid, vector_l2, FaceTag, Grid, ScalarField, VectorField};
use crate::stepper::{run_simulation, StepForcing, StepperConfig};

use super::config::{Config, Study};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeLaw {
    /// `1 + t`: backward Euler is exact in time.
    Linear,
    /// `exp(-k t)`.
    Decay(f64),
}

impl TimeLaw {
    fn g(self, t: f64) -> (f64, f64) {
        match self {
            TimeLaw::Linear => (1.0 + t, 1.0),
            TimeLaw::Decay(k) => ((-k * t).exp(), -k * (-k * t).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub rho_bar: f64,
    pub c_bar: f64,
    pub a_u: f64,
    pub a_c: f64,
    pub a_mu: f64,
    pub time: TimeLaw,
    pub law: LawParams,
}

/// Exact values at one point: `(u, c, mu)`.
type Point = ([f64; 2], f64, f64);

impl Manufactured {
    pub fn exact(&self, x: [f64; 2], t: f64) -> Point {
        let (g, _) = self.time.g(t);
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let a = self.a_u * g;
        let u = [a * sx * cy, -a * cx * sy];
        let c = self.c_bar + self.a_c * g * cx * cy;
        let mu = self.a_mu * g * (2.0 * PI * x[0]).cos() * cy;
        (u, c, mu)
    }

    /// Momentum, CH and chemical-potential sources at `(x, t)`.
    pub fn sources(&self, x: [f64; 2], t: f64) -> ([f64; 2], f64, f64) {
        let p = &self.law;
        let r = self.rho_bar;
        let (g, dg) = self.time.g(t);
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let pi2 = PI * PI;

        let a = self.a_u * g;
        let u = [a * sx * cy, -a * cx * sy];
        let ut = [self.a_u * dg * sx * cy, -self.a_u * dg * cx * sy];
        // grad u: du[i][j] = d_j u_i
        let du = [[a * PI * cx * cy, -a * PI * sx * sy], [a * PI * sx * sy, -a * PI * cx * cy]];
        let lap_u = [-2.0 * pi2 * u[0], -2.0 * pi2 * u[1]];

        let b = self.a_c * g;
        let c = self.c_bar + b * cx * cy;
        let ct = self.a_c * dg * cx * cy;
        let gc = [-b * PI * sx * cy, -b * PI * cx * sy];
        let hc = [[-b * pi2 * cx * cy, b * pi2 * sx * sy], [b * pi2 * sx * sy, -b * pi2 * cx * cy]];
        let lap_c = hc[0][0] + hc[1][1];

        let mu = self.a_mu * g * (2.0 * PI * x[0]).cos() * cy;
        let lap_mu = -5.0 * pi2 * mu;

        let mut s_mom = [0.0; 2];
        for i in 0..2 {
            let adv = u[0] * du[i][0] + u[1] * du[i][1];
            let cap = hc[i][0] * gc[0] + hc[i][1] * gc[1] + gc[i] * lap_c;
            s_mom[i] = r * ut[i] + r * adv - p.eta * lap_u[i] + r * p.eps * cap;
        }
        let s_ch = r * (ct + u[0] * gc[0] + u[1] * gc[1]) - p.gamma * lap_mu;
        let s_mu = mu - p.beta * c * (c * c - 1.0) + p.eps * lap_c;
        (s_mom, s_ch, s_mu)
    }

    pub fn state(&self, grid: &Arc<Grid<f64>>, t: f64) -> Result<State<f64>> {
        let rho = ScalarField::constant(grid, self.rho_bar);
        let u = VectorField::from_fn(grid, |x| self.exact(x, t).0);
        let c = ScalarField::from_fn(grid, |x| self.exact(x, t).1);
        let mu = ScalarField::from_fn(grid, |x| self.exact(x, t).2);
        State::new(rho, u, c, mu, t)
    }

    pub fn forcing(&self, t: f64, grid: &Arc<Grid<f64>>) -> StepForcing<f64> {
        let s_mom = VectorField::from_fn(grid, |x| self.sources(x, t).0);
        let s_ch = ScalarField::from_fn(grid, |x| self.sources(x, t).1);
        let s_mu = ScalarField::from_fn(grid, |x| self.sources(x, t).2);
        StepForcing { f_ext: None, s_mom: Some(s_mom), s_ch: Some(s_ch), s_mu: Some(s_mu) }
    }

    /// Unit square with slip walls, `n` cells per axis.
    pub fn grid(n: usize) -> Result<Arc<Grid<f64>>> {
        make_grid(&[1.0, 1.0], &[n, n], &[FaceTag::Slip; 4])
    }
}

/// Discrete L2 errors at the final time of one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelErrors {
    pub n: usize,
    pub dt: f64,
    pub u: f64,
    pub c: f64,
    pub mu: f64,
}

impl LevelErrors {
    pub fn combined(&self) -> f64 {
        (self.u * self.u + self.c * self.c + self.mu * self.mu).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub u: f64,
    pub c: f64,
    pub mu: f64,
    pub combined: f64,
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub study: Study,
    pub levels: Vec<LevelErrors>,
}

impl StudyTable {
    /// Observed orders between consecutive levels (each halves `h` or `dt`).
    pub fn rates(&self) -> Vec<Rates> {
        self.levels
            .windows(2)
            .map(|w| Rates {
                u: order(w[0].u, w[1].u),
                c: order(w[0].c, w[1].c),
                mu: order(w[0].mu, w[1].mu),
                combined: order(w[0].combined(), w[1].combined()),
            })
            .collect()
    }
}

impl fmt::Display for StudyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.study {
            Study::Spatial => "spatial",
            Study::Temporal => "temporal",
            Study::Both => "both",
        };
        writeln!(f, "{name} study")?;
        writeln!(f, "{:>6} {:>11} {:>11} {:>11} {:>11} {:>11}", "n", "dt", "err_u", "err_c", "err_mu", "combined")?;
        let rates = self.rates();
        for (k, l) in self.levels.iter().enumerate() {
            write!(f, "{:>6} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}", l.n, l.dt, l.u, l.c, l.mu, l.combined())?;
            if k > 0 {
                let r = rates[k - 1];
                write!(f, "   order u {:.3} c {:.3} mu {:.3} combined {:.3}", r.u, r.c, r.mu, r.combined)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Runs one level to `t_end` and measures the errors against the exact fields.
pub fn run_level(m: &Manufactured, n: usize, steps: usize, t_end: f64, base: &StepperConfig) -> Result<LevelErrors> {
    let grid = Manufactured::grid(n)?;
    let laws = MaterialLaws::<f64>::builtin(
        if m.law.k == 0.0 { "constant_coefficients" } else { "default_logrho_doublewell" },
        &m.law,
    )?;
    let dt = t_end / steps as f64;
    let cfg = StepperConfig { dt0: dt, t_end, snapshot_every: 0, ..base.clone() };
    let forcing = |t: f64, g: &Arc<Grid<f64>>| m.forcing(t, g);
    let out = run_simulation(&laws, m.state(&grid, 0.0)?, &forcing, &cfg, |_, _, _| Ok(()))?;
    if let Some(b) = out.blow_up {
        return Err(Error::BlowUp(b.to_string()));
    }
    let exact = m.state(&grid, out.final_state.t)?;
    let s = &out.final_state;
    Ok(LevelErrors {
        n,
        dt,
        u: vector_l2(&(&s.u - &exact.u)),
        c: discrete_l2(&(&s.c - &exact.c)),
        mu: discrete_l2(&(&s.mu - &exact.mu)),
    })
}

/// Manufactured problem described by a configuration.
pub fn manufactured_from(cfg: &Config, time: TimeLaw) -> Manufactured {
    Manufactured {
        rho_bar: cfg.initial.get("rho_bar", 1.0),
        c_bar: cfg.initial.get("c_bar", 0.0),
        a_u: cfg.mms.velocity_amplitude,
        a_c: cfg.mms.c_amplitude,
        a_mu: cfg.mms.mu_amplitude,
        time,
        law: cfg.material.params(),
    }
}

/// Spatial and/or temporal refinement studies. Levels of a study run on
/// separate threads.
pub fn mms_convergence(cfg: &Config) -> Result<Vec<StudyTable>> {
    let m = &cfg.mms;
    let mut out = Vec::new();
    if matches!(m.study, Study::Both | Study::Spatial) {
        // linear time dependence: the only error left is spatial
        let man = manufactured_from(cfg, TimeLaw::Linear);
        let levels = run_levels(m.levels, |l| run_level(&man, m.base_cells << l, m.base_steps, m.t_end, &cfg.stepper))?;
        out.push(StudyTable { study: Study::Spatial, levels });
    }
    if matches!(m.study, Study::Both | Study::Temporal) {
        let man = manufactured_from(cfg, TimeLaw::Decay(m.decay_rate));
        let levels =
            run_levels(m.levels, |l| run_level(&man, m.temporal_cells, m.base_steps << l, m.t_end, &cfg.stepper))?;
        out.push(StudyTable { study: Study::Temporal, levels });
    }
    Ok(out)
}

fn run_levels(n: usize, f: impl Fn(usize) -> Result<LevelErrors> + Sync) -> Result<Vec<LevelErrors>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..n).map(|l| { let f = &f; s.spawn(move || f(l)) }).collect();
        handles.into_iter().map(|h| h.join().expect("refinement level panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manufactured {
        Manufactured {
            rho_bar: 1.3,
            c_bar: 0.1,
            a_u: 0.5,
            a_c: 0.3,
            a_mu: 0.2,
            time: TimeLaw::Decay(3.0),
            law: LawParams { k: 0.0, beta: 1.0, eps: 0.01, gamma: 0.02, eta: 0.1, lambda: 0.0 },
        }
    }

    /// Sources rebuilt by central differences of the exact fields.
    #[test]
    fn sources_match_finite_differences() {
        let m = sample();
        let p = m.law;
        let r = m.rho_bar;
        let h = 1e-4;
        let (x, t) = ([0.31, 0.67], 0.4);
        let f = |x: [f64; 2], t: f64| m.exact(x, t);
        let d = |k: usize, s: f64| {
            let mut y = x;
            y[k] += s;
            y
        };
        let ddx = |g: &dyn Fn([f64; 2]) -> f64, k: usize| (g(d(k, h)) - g(d(k, -h))) / (2.0 * h);
        let lap = |g: &dyn Fn([f64; 2]) -> f64| {
            (0..2).map(|k| (g(d(k, h)) - 2.0 * g(x) + g(d(k, -h))) / (h * h)).sum::<f64>()
        };
        let c = |y: [f64; 2]| f(y, t).1;
        let mu = |y: [f64; 2]| f(y, t).2;
        let gc = [ddx(&c, 0), ddx(&c, 1)];
        let ct = (f(x, t + h).1 - f(x, t - h).1) / (2.0 * h);
        let (u, c0, mu0) = f(x, t);
        let (s_mom, s_ch, s_mu) = m.sources(x, t);
        let ch = r * (ct + u[0] * gc[0] + u[1] * gc[1]) - p.gamma * lap(&mu);
        assert!((ch - s_ch).abs() < 1e-5, "{ch} {s_ch}");
        let mu_s = mu0 - p.beta * c0 * (c0 * c0 - 1.0) + p.eps * lap(&c);
        assert!((mu_s - s_mu).abs() < 1e-5);
        // momentum: rho u_t + rho (u.grad)u - eta lap u - div(-rho eps grad c grad c)
        for i in 0..2 {
            let ui = |y: [f64; 2]| f(y, t).0[i];
            let uit = (f(x, t + h).0[i] - f(x, t - h).0[i]) / (2.0 * h);
            let flux = |k: usize| {
                move |y: [f64; 2]| {
                    let cc = |z: [f64; 2]| f(z, t).1;
                    let gi = {
                        let mut a = y;
                        let mut b = y;
                        a[i] += h;
                        b[i] -= h;
                        (cc(a) - cc(b)) / (2.0 * h)
                    };
                    let gk = {
                        let mut a = y;
                        let mut b = y;
                        a[k] += h;
                        b[k] -= h;
                        (cc(a) - cc(b)) / (2.0 * h)
                    };
                    gi * gk
                }
            };
            let div_cap = ddx(&flux(0), 0) + ddx(&flux(1), 1);
            let adv = u[0] * ddx(&ui, 0) + u[1] * ddx(&ui, 1);
            let s = r * uit + r * adv - p.eta * lap(&ui) + r * p.eps * div_cap;
            assert!((s - s_mom[i]).abs() < 1e-4, "{i}: {s} {}", s_mom[i]);
        }
    }

    #[test]
    fn exact_fields_satisfy_boundary_conditions() {
        let m = sample();
        for s in [0.0, 0.2, 0.7, 1.0] {
            let (u, _, _) = m.exact([0.0, s], 0.3);
            assert!(u[0].abs() < 1e-15);
            let (u, _, _) = m.exact([s, 1.0], 0.3);
            assert!(u[1].abs() < 1e-15);
        }
    }
}
