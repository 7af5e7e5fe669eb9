//! Initial-data presets and the body force / source hook for a run.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::material::{chemical_potential, MaterialLaws, State};
use crate::mesh::{make_grid, FaceTag, Grid, ScalarField, VectorField};
use crate::stepper::StepForcing;

use super::config::{Config, ForcingKind};
use super::io::read_snapshot;
use super::mms::{manufactured_from, Manufactured, TimeLaw};

pub const SCENARIO_NAMES: [&str; 6] = [
    "equilibrium",
    "ch_eigenmode",
    "viscous_eigenmode",
    "compressible_spinodal",
    "manufactured",
    "density_drain",
];

/// Parameters accepted by a scenario, or `None` for an unknown name.
pub fn scenario_keys(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "equilibrium" => &["rho_bar", "c_bar"],
        "ch_eigenmode" | "viscous_eigenmode" => &["rho_bar", "c_bar", "amplitude", "q"],
        "compressible_spinodal" => &["amplitude", "rho_amplitude", "modes", "seed"],
        "manufactured" => &["rho_bar", "c_bar"],
        "density_drain" => &["rho_bar", "c_bar", "u_amplitude"],
        _ => return None,
    })
}

/// Body force and manufactured sources for a run.
#[derive(Debug, Clone, Default)]
pub struct RunForcing {
    pub uniform: Option<[f64; 2]>,
    pub manufactured: Option<Manufactured>,
}

impl RunForcing {
    pub fn at(&self, t: f64, grid: &Arc<Grid<f64>>) -> StepForcing<f64> {
        let mut f = match &self.manufactured {
            Some(m) => m.forcing(t, grid),
            None => StepForcing::default(),
        };
        if let Some(a) = self.uniform {
            f.f_ext = Some(VectorField::from_fn(grid, |_| a));
        }
        f
    }
}

/// Everything a run needs besides the stepper settings.
#[derive(Debug, Clone)]
pub struct Setup {
    pub laws: MaterialLaws<f64>,
    pub state0: State<f64>,
    pub forcing: RunForcing,
}

pub fn laws_from(cfg: &Config) -> Result<MaterialLaws<f64>> {
    MaterialLaws::builtin(&cfg.material.law, &cfg.material.params())
}

pub fn grid_from(cfg: &Config) -> Result<Arc<Grid<f64>>> {
    make_grid(&cfg.grid.extents, &cfg.grid.n_cells, &cfg.grid.face_tags)
        .map_err(|e| Error::config(format!("[grid]: {e}")))
}

fn with_mu(laws: &MaterialLaws<f64>, rho: ScalarField<f64>, u: VectorField<f64>, c: ScalarField<f64>) -> Result<State<f64>> {
    let rho = rho.with_neumann();
    let c = c.with_neumann();
    let mu = chemical_potential(laws, &rho, &c)?;
    State::new(rho, u, c, mu, 0.0)
}

/// Builds the initial state and forcing described by `cfg`.
pub fn build(cfg: &Config) -> Result<Setup> {
    let laws = laws_from(cfg)?;
    let grid = grid_from(cfg)?;
    let mut forcing = RunForcing::default();
    if cfg.forcing.kind == ForcingKind::Uniform {
        forcing.uniform = Some([cfg.forcing.fx, cfg.forcing.fy]);
    }
    if let Some(path) = &cfg.initial.snapshot {
        let state0 = read_snapshot(path)?;
        if **state0.grid() != *grid {
            return Err(Error::config(format!("snapshot `{path}` was written on a different grid")));
        }
        return Ok(Setup { laws, state0, forcing });
    }
    let name = cfg.initial.scenario.as_deref().ok_or_else(|| Error::config("no scenario"))?;
    let p = |k: &str, d: f64| cfg.initial.get(k, d);
    let l = cfg.grid.extents.clone();
    let dim = grid.dim();
    let state0 = match name {
        "equilibrium" => with_mu(
            &laws,
            ScalarField::constant(&grid, p("rho_bar", 1.0)),
            VectorField::zeros(&grid),
            ScalarField::constant(&grid, p("c_bar", 0.0)),
        )?,
        "ch_eigenmode" => {
            let (cb, a, q) = (p("c_bar", 0.0), p("amplitude", 0.01), p("q", 2.0));
            with_mu(
                &laws,
                ScalarField::constant(&grid, p("rho_bar", 1.0)),
                VectorField::zeros(&grid),
                ScalarField::from_fn(&grid, |x| cb + a * (q * PI * x[0] / l[0]).cos()),
            )?
        }
        "viscous_eigenmode" => {
            if dim != 1 {
                return Err(Error::config("`viscous_eigenmode` is one-dimensional"));
            }
            let (a, q) = (p("amplitude", 1e-9), p("q", 1.0));
            with_mu(
                &laws,
                ScalarField::constant(&grid, p("rho_bar", 1.0)),
                VectorField::from_fn(&grid, |x| [a * (q * PI * x[0] / l[0]).sin(), 0.0]),
                ScalarField::constant(&grid, p("c_bar", 0.0)),
            )?
        }
        "compressible_spinodal" => {
            let (a, ra) = (p("amplitude", 0.05), p("rho_amplitude", 0.05));
            let modes = p("modes", 8.0) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(p("seed", 1.0) as u64);
            let qs = if dim == 2 { modes } else { 1 };
            let mut coef = vec![vec![0.0; qs]; modes];
            for (pi, row) in coef.iter_mut().enumerate() {
                for (qi, v) in row.iter_mut().enumerate() {
                    let r: f64 = rng.gen_range(-0.5..0.5);
                    *v = if pi + qi == 0 { 0.0 } else { r };
                }
            }
            let ly = if dim == 2 { l[1] } else { 1.0 };
            let c = ScalarField::from_fn(&grid, |x| {
                let mut s = 0.0;
                for (pi, row) in coef.iter().enumerate() {
                    let cx = (pi as f64 * PI * x[0] / l[0]).cos();
                    for (qi, v) in row.iter().enumerate() {
                        s += v * cx * (qi as f64 * PI * x[1] / ly).cos();
                    }
                }
                a * s
            });
            let rho = ScalarField::from_fn(&grid, |x| {
                1.0 + ra * (PI * x[0] / l[0]).cos() * if dim == 2 { (2.0 * PI * x[1] / ly).cos() } else { 1.0 }
            });
            with_mu(&laws, rho, VectorField::zeros(&grid), c)?
        }
        "manufactured" => {
            if dim != 2 || l != [1.0, 1.0] || grid.face_tags().iter().any(|t| *t != FaceTag::Slip) {
                return Err(Error::config("`manufactured` needs the unit square with slip faces"));
            }
            let m = manufactured_from(cfg, TimeLaw::Linear);
            forcing.manufactured = Some(m);
            m.state(&grid, 0.0)?
        }
        "density_drain" => {
            // strong compression towards the high-x wall empties the low-x side
            let a = p("u_amplitude", 40.0);
            let ly = if dim == 2 { l[1] } else { 1.0 };
            let u = VectorField::from_fn(&grid, |x| {
                let s = if dim == 2 { (PI * x[1] / ly).sin() } else { 1.0 };
                [a * (PI * x[0] / l[0]).sin() * s, 0.0]
            });
            with_mu(
                &laws,
                ScalarField::constant(&grid, p("rho_bar", 1.0)),
                u,
                ScalarField::constant(&grid, p("c_bar", 0.0)),
            )?
        }
        other => return Err(Error::config(format!("unknown scenario `{other}`"))),
    };
    Ok(Setup { laws, state0, forcing })
}
