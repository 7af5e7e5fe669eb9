//! Picard time stepping, the audit of the unsplit discrete equations, energy
//! diagnostics and the run driver with step-size control.

use std::fmt;
use std::sync::Arc;

use log::{debug, info, warn};

use crate::chsolver::{assemble_ch_system, c_rho_u_divergence, solve_ch, FrozenCoefficients, Iterate};
use crate::error::{Error, Result};
use crate::material::{
    chemical_potential, check_density, dpsi_dc, stress_capillary, total_energy, MaterialLaws, State,
};
use crate::mesh::{
    discrete_l2, face_energy_density, flux_div, integrate, tensor_divergence, vector_l2,
    viscous_divergence, weak_norm_weighted, Face, FaceTag, Grid, ScalarField, VectorField,
    WeakNormWeights,
};
use crate::momentum::{assemble_momentum, convection, solve_momentum};
use crate::scalar::Real;
use crate::transport::{advance_density, min_density, upwind_divergence, DENSITY_FLOOR_RATIO};

/// Body force and manufactured-solution sources at the new time level.
#[derive(Debug, Clone, Default)]
pub struct StepForcing<T: Real = f64> {
    pub f_ext: Option<VectorField<T>>,
    pub s_mom: Option<VectorField<T>>,
    pub s_ch: Option<ScalarField<T>>,
    pub s_mu: Option<ScalarField<T>>,
}

/// Forcing as a function of the new time level.
pub type ForcingFn<'a, T> = dyn Fn(T, &Arc<Grid<T>>) -> StepForcing<T> + 'a;

/// Forcing that is identically zero.
pub fn no_forcing<T: Real>(_: T, _: &Arc<Grid<T>>) -> StepForcing<T> {
    StepForcing::default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub dt0: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub max_picard: usize,
    pub max_halvings: usize,
    /// Relative residual demanded of each linear block solve.
    pub linear_tol: f64,
    pub weights: WeakNormWeights,
    pub density_floor_ratio: f64,
    /// Keep every n-th state in the returned trajectory (0: none).
    pub snapshot_every: usize,
    /// Successful steps before a reduced step size is doubled again.
    pub regrow_after: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt0: 1e-4,
            t_end: 1e-2,
            picard_tol: 1e-9,
            max_picard: 25,
            max_halvings: 8,
            linear_tol: 1e-12,
            weights: WeakNormWeights::default(),
            density_floor_ratio: DENSITY_FLOOR_RATIO,
            snapshot_every: 0,
            regrow_after: 10,
        }
    }
}

/// Discrete L2 norms of the residuals of the unsplit equations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub momentum: f64,
    pub ch: f64,
    pub mu: f64,
    /// Mass balance multiplied through by `dt`, i.e. in update form.
    pub mass: f64,
}

impl Residuals {
    /// Largest of the momentum, CH and chemical-potential residuals.
    pub fn max_coupled(&self) -> f64 {
        self.momentum.max(self.ch).max(self.mu)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PicardReport {
    pub iterations: usize,
    pub deltas: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
    pub final_residual: Residuals,
}

impl PicardReport {
    pub fn mean_contraction(&self) -> f64 {
        if self.contraction_factors.is_empty() {
            0.0
        } else {
            self.contraction_factors.iter().sum::<f64>() / self.contraction_factors.len() as f64
        }
    }
}

fn density_floor_check<T: Real>(rho: &ScalarField<T>, floor: f64) -> Result<()> {
    let m = min_density(rho).as_f64();
    if !(m > floor) {
        return Err(Error::DensityFloor { min: m, floor });
    }
    Ok(())
}

/// One time step: Picard iteration of transport, CH solve and momentum
/// solve until successive iterates agree in the weak norm.
pub fn picard_step<T: Real>(
    laws: &MaterialLaws<T>,
    state_n: &State<T>,
    dt: T,
    cfg: &StepperConfig,
    forcing: &StepForcing<T>,
    floor: f64,
) -> Result<(State<T>, PicardReport)> {
    density_floor_check(&state_n.rho, floor)?;
    let frozen = FrozenCoefficients::new(laws, state_n)?;
    let ch = assemble_ch_system(&frozen, dt)?;
    let mb = assemble_momentum(&frozen, dt)?;
    let tol = T::lit(cfg.linear_tol);
    let mut u = state_n.u.clone();
    let mut c = state_n.c.clone();
    let mut mu = state_n.mu.clone();
    let mut report = PicardReport::default();
    for k in 0..cfg.max_picard {
        let rho = advance_density(&state_n.rho, &u, dt)?;
        density_floor_check(&rho, floor)?;
        let w = Iterate { u: &u, c: &c, mu: &mu, rho: &rho };
        let (c1, mu1) = solve_ch(laws, &ch, &frozen, dt, &w, forcing, tol)?;
        let u1 = solve_momentum(laws, &mb, &frozen, dt, &w, &c1, &mu1, forcing, tol)?;
        let delta = weak_norm_weighted(&(&u1 - &u), &(&c1 - &c), &(&mu1 - &mu), &cfg.weights).as_f64();
        report.iterations = k + 1;
        if let Some(prev) = report.deltas.last() {
            if *prev > 0.0 {
                report.contraction_factors.push(delta / prev);
            }
        }
        report.deltas.push(delta);
        debug!("picard {k}: delta {delta:e}");
        u = u1;
        c = c1;
        mu = mu1;
        if !delta.is_finite() || !(delta < 1e3 * report.deltas[0].max(f64::MIN_POSITIVE)) {
            break;
        }
        if delta <= cfg.picard_tol {
            let rho = advance_density(&state_n.rho, &u, dt)?;
            let next = State { rho, u: u.clone(), c: c.clone(), mu: mu.clone(), t: state_n.t + dt };
            let res = residual_nonlinear(laws, &next, state_n, dt, forcing)?;
            report.converged = true;
            report.final_residual = res;
            // a converged iterate whose residual still exceeds the audit
            // bound is refined while iterations remain
            if res.max_coupled() <= 10.0 * cfg.picard_tol || k + 1 == cfg.max_picard {
                return Ok((next, report));
            }
            report.converged = false;
        }
    }
    Err(Error::PicardDiverged {
        iterations: report.iterations,
        last_delta: report.deltas.last().copied().unwrap_or(f64::NAN),
    })
}

/// Residuals of the unsplit discrete system at `state_next`, with backward
/// differences against `state_n`.
pub fn residual_nonlinear<T: Real>(
    laws: &MaterialLaws<T>,
    next: &State<T>,
    prev: &State<T>,
    dt: T,
    forcing: &StepForcing<T>,
) -> Result<Residuals> {
    let (rho, u, c, mu) = (&next.rho, &next.u, &next.c, &next.mu);
    check_density(rho)?;
    let k = laws.coefficients(rho, c)?;
    let inv_dt = T::one() / dt;

    let dmom = &u.scale_by(rho) - &prev.u.scale_by(&prev.rho);
    let p = stress_capillary(laws, rho, c)?;
    let mut r_mom = &(&dmom.scale(inv_dt) + &convection(rho, u)) - &viscous_divergence(&k.eta, &k.lambda, u);
    r_mom = &r_mom - &tensor_divergence(&p);
    if let Some(f) = &forcing.f_ext {
        r_mom = &r_mom - &f.scale_by(rho);
    }
    if let Some(s) = &forcing.s_mom {
        r_mom = &r_mom - s;
    }

    let dmass_c = (&(c * rho) - &(&prev.c * &prev.rho)).scale(inv_dt);
    let mut r_ch = &(&dmass_c + &c_rho_u_divergence(c, rho, u)) - &flux_div(&k.gamma, mu);
    if let Some(s) = &forcing.s_ch {
        r_ch = &r_ch - s;
    }

    let er = &k.eps * rho;
    let psi_c = dpsi_dc(laws, rho, c);
    let mut r_mu = mu.zip3_map(&psi_c, &flux_div(&er, c).zip_map(rho, |d, r| d / r), |m, p, d| m - p + d);
    if let Some(s) = &forcing.s_mu {
        r_mu = &r_mu - s;
    }

    let up = upwind_divergence(&prev.rho, u);
    let r_mass = rho.zip3_map(&prev.rho, &up, |r, r0, d| r - r0 + dt * d);

    Ok(Residuals {
        momentum: vector_l2(&r_mom).as_f64(),
        ch: discrete_l2(&r_ch).as_f64(),
        mu: discrete_l2(&r_mu).as_f64(),
        mass: discrete_l2(&r_mass).as_f64(),
    })
}

/// One line of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub diss_s: f64,
    pub diss_mu: f64,
    pub power_ext: f64,
    pub energy_residual: f64,
    pub mass: f64,
    pub cmass: f64,
    pub min_rho: f64,
    pub picard_iters: usize,
    pub mean_contraction: f64,
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,E,diss_S,diss_mu,power_ext,energy_residual,mass,cmass,min_rho,picard_iters,mean_contraction";

impl DiagnosticsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e}",
            self.t,
            self.energy,
            self.diss_s,
            self.diss_mu,
            self.power_ext,
            self.energy_residual,
            self.mass,
            self.cmass,
            self.min_rho,
            self.picard_iters,
            self.mean_contraction
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 11 {
            return Err(Error::config(format!("diagnostics row has {} columns, expected 11", parts.len())));
        }
        let f = |k: usize| -> Result<f64> {
            parts[k].parse().map_err(|_| Error::config(format!("bad number `{}`", parts[k])))
        };
        Ok(DiagnosticsRow {
            t: f(0)?,
            energy: f(1)?,
            diss_s: f(2)?,
            diss_mu: f(3)?,
            power_ext: f(4)?,
            energy_residual: f(5)?,
            mass: f(6)?,
            cmass: f(7)?,
            min_rho: f(8)?,
            picard_iters: parts[9].parse().map_err(|_| Error::config(format!("bad count `{}`", parts[9])))?,
            mean_contraction: f(10)?,
        })
    }
}

/// Rates entering the energy balance at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRates {
    pub diss_s: f64,
    pub diss_mu: f64,
    pub power_ext: f64,
}

/// `diss_S = -int u . div S`, the summation-by-parts form of `int S : D`
/// for the discrete viscous operator; `diss_mu` sums `gamma |D mu|^2` over
/// cell faces.
pub fn energy_rates<T: Real>(
    laws: &MaterialLaws<T>,
    state: &State<T>,
    forcing: &StepForcing<T>,
) -> Result<EnergyRates> {
    let k = laws.coefficients(&state.rho, &state.c)?;
    let visc = viscous_divergence(&k.eta, &k.lambda, &state.u);
    let diss_s = -integrate(&state.u.dot(&visc));
    let diss_mu = integrate(&face_energy_density(&k.gamma, &state.mu));
    let power = match &forcing.f_ext {
        Some(f) => integrate(&f.dot(&state.u).zip_map(&state.rho, |a, r| a * r)),
        None => T::zero(),
    };
    Ok(EnergyRates { diss_s: diss_s.as_f64(), diss_mu: diss_mu.as_f64(), power_ext: power.as_f64() })
}

pub fn diagnostics<T: Real>(
    laws: &MaterialLaws<T>,
    next: &State<T>,
    prev: &State<T>,
    dt: T,
    forcing: &StepForcing<T>,
    report: &PicardReport,
) -> Result<DiagnosticsRow> {
    let e1 = total_energy(laws, next)?.as_f64();
    let e0 = total_energy(laws, prev)?.as_f64();
    let r = energy_rates(laws, next, forcing)?;
    Ok(DiagnosticsRow {
        t: next.t.as_f64(),
        energy: e1,
        diss_s: r.diss_s,
        diss_mu: r.diss_mu,
        power_ext: r.power_ext,
        energy_residual: (e1 - e0) / dt.as_f64() + r.diss_s + r.diss_mu - r.power_ext,
        mass: integrate(&next.rho).as_f64(),
        cmass: integrate(&(&next.c * &next.rho)).as_f64(),
        min_rho: min_density(&next.rho).as_f64(),
        picard_iters: report.iterations,
        mean_contraction: report.mean_contraction(),
    })
}

/// Row for the initial state (zero rates of change are not assumed; the
/// residual column is left at zero).
pub fn initial_diagnostics<T: Real>(
    laws: &MaterialLaws<T>,
    state: &State<T>,
    forcing: &StepForcing<T>,
) -> Result<DiagnosticsRow> {
    let r = energy_rates(laws, state, forcing)?;
    Ok(DiagnosticsRow {
        t: state.t.as_f64(),
        energy: total_energy(laws, state)?.as_f64(),
        diss_s: r.diss_s,
        diss_mu: r.diss_mu,
        power_ext: r.power_ext,
        energy_residual: 0.0,
        mass: integrate(&state.rho).as_f64(),
        cmass: integrate(&(&state.c * &state.rho)).as_f64(),
        min_rho: min_density(&state.rho).as_f64(),
        picard_iters: 0,
        mean_contraction: 0.0,
    })
}

/// Kind of compatibility condition violated by initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoSlipVelocity,
    NormalVelocity,
    TangentialStress,
    OrderParameterFlux,
    ChemicalPotentialFlux,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::NoSlipVelocity => "u0 != 0 on no-slip face",
            ViolationKind::NormalVelocity => "normal velocity on slip face",
            ViolationKind::TangentialStress => "tangential stress on slip face",
            ViolationKind::OrderParameterFlux => "d c0 / d nu != 0",
            ViolationKind::ChemicalPotentialFlux => "d mu0 / d nu != 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub face: Face,
    pub magnitude: f64,
    pub threshold: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {:.3e} (threshold {:.3e})", self.kind, self.face.name(), self.magnitude, self.threshold)
    }
}

/// Values of `f` in the three cells nearest `face`, along each boundary line.
fn boundary_lines<T: Real>(f: &ScalarField<T>, face: Face) -> Vec<[f64; 3]> {
    let g = f.grid();
    let axis = face.axis();
    let other = 1 - axis;
    let n = g.n(axis);
    let m = if g.dim() == 2 { g.n(other) } else { 1 };
    (0..m)
        .map(|l| {
            let mut v = [0.0; 3];
            for (k, vk) in v.iter_mut().enumerate() {
                let d = if face.is_low() { k } else { n - 1 - k };
                let (i, j) = if axis == 0 { (d, l) } else { (l, d) };
                *vk = f.get(i, j).as_f64();
            }
            v
        })
        .collect()
}

/// Largest quadratically extrapolated face value and outward normal
/// derivative of `f` on `face`.
fn face_trace<T: Real>(f: &ScalarField<T>, face: Face) -> (f64, f64) {
    let h = f.grid().h(face.axis()).as_f64();
    let mut value: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for v in boundary_lines(f, face) {
        value = value.max(((15.0 * v[0] - 10.0 * v[1] + 3.0 * v[2]) / 8.0).abs());
        deriv = deriv.max(((-2.0 * v[0] + 3.0 * v[1] - v[2]) / h).abs());
    }
    (value, deriv)
}

/// Resolution-aware thresholds `(value, derivative)`: the largest second
/// difference of `f`, and that divided by the spacing normal to `face`.
fn trace_thresholds<T: Real>(f: &ScalarField<T>, face: Face) -> (f64, f64) {
    let g = f.grid();
    let mut d2: f64 = 0.0;
    for axis in 0..g.dim() {
        let n = g.n(axis);
        for (i, j) in g.cells() {
            let p = if axis == 0 { i } else { j };
            if p == 0 || p + 1 == n {
                continue;
            }
            let (a, b) = if axis == 0 { ((i - 1, j), (i + 1, j)) } else { ((i, j - 1), (i, j + 1)) };
            let v = f.get(a.0, a.1) - T::lit(2.0) * f.get(i, j) + f.get(b.0, b.1);
            d2 = d2.max(v.abs().as_f64());
        }
    }
    let h = g.h(face.axis()).as_f64();
    (d2 + 1e-12, d2 / h + 1e-12)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the compatibility conditions on initial data. Violations are
/// warnings; a nonpositive density is an error.
pub fn validate_initial_data<T: Real>(laws: &MaterialLaws<T>, state0: &State<T>) -> Result<ValidationReport> {
    check_density(&state0.rho)?;
    laws.check_fields(&state0.rho, &state0.c)?;
    let g = state0.grid().clone();
    let mu0 = chemical_potential(laws, &state0.rho, &state0.c)?;
    let k = laws.coefficients(&state0.rho, &state0.c)?;
    let eta_max = k.eta.max().as_f64();
    let mut out = Vec::new();
    let mut push = |kind, face, magnitude: f64, threshold: f64| {
        if magnitude > threshold {
            out.push(Violation { kind, face, magnitude, threshold });
        }
    };
    for face in g.faces() {
        let axis = face.axis();
        for comp in 0..g.dim() {
            let uc = state0.u.comp(comp);
            let (val, der) = face_trace(uc, face);
            let (tv, td) = trace_thresholds(uc, face);
            match g.tag(face) {
                FaceTag::NoSlip => push(ViolationKind::NoSlipVelocity, face, val, tv),
                FaceTag::Slip if comp == axis => push(ViolationKind::NormalVelocity, face, val, tv),
                FaceTag::Slip => push(ViolationKind::TangentialStress, face, eta_max * der, eta_max * td),
            }
        }
        let (_, dc) = face_trace(&state0.c, face);
        push(ViolationKind::OrderParameterFlux, face, dc, trace_thresholds(&state0.c, face).1);
        let (_, dm) = face_trace(&mu0, face);
        push(ViolationKind::ChemicalPotentialFlux, face, dm, trace_thresholds(&mu0, face).1);
    }
    Ok(ValidationReport { violations: out })
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpReport {
    pub t: f64,
    pub dt: f64,
    pub min_rho: f64,
    pub density_floor: f64,
    pub reason: String,
}

impl fmt::Display for BlowUpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "blow-up at t = {:.6e} (dt = {:.3e}): {}; min rho = {:.6e}, density floor = {:.6e}",
            self.t, self.dt, self.reason, self.min_rho, self.density_floor
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T: Real = f64> {
    pub rows: Vec<DiagnosticsRow>,
    pub reports: Vec<PicardReport>,
    pub snapshots: Vec<State<T>>,
    pub final_state: State<T>,
    pub blow_up: Option<BlowUpReport>,
}

/// Steps from `state0.t` to `cfg.t_end`. Picard failures and CFL violations
/// halve the step; exhausting the halvings or breaching the density floor
/// ends the run with a [`BlowUpReport`]. Other errors propagate.
pub fn run_simulation<T: Real>(
    laws: &MaterialLaws<T>,
    state0: State<T>,
    forcing: &ForcingFn<'_, T>,
    cfg: &StepperConfig,
    mut observer: impl FnMut(usize, &State<T>, &DiagnosticsRow) -> Result<()>,
) -> Result<RunOutput<T>> {
    let floor = cfg.density_floor_ratio * min_density(&state0.rho).as_f64();
    let g = state0.grid().clone();
    let mut state = state0;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push(state.clone());
    }
    let mut dt = cfg.dt0;
    let mut clean = 0usize;
    let mut step = 0usize;
    let t_tol = 1e-12 * cfg.t_end.abs().max(cfg.dt0);
    while state.t.as_f64() < cfg.t_end - t_tol {
        let remaining = cfg.t_end - state.t.as_f64();
        let mut try_dt = dt.min(remaining);
        let mut halvings = 0;
        let accepted = loop {
            let f = forcing(state.t + T::lit(try_dt), &g);
            match picard_step(laws, &state, T::lit(try_dt), cfg, &f, floor) {
                Ok((next, rep)) => break (next, rep, f),
                Err(Error::DensityFloor { min, floor }) => {
                    let report = BlowUpReport {
                        t: state.t.as_f64(),
                        dt: try_dt,
                        min_rho: min,
                        density_floor: floor,
                        reason: format!("density fell below the floor {floor:.3e}"),
                    };
                    warn!("{report}");
                    return Ok(RunOutput { rows, reports, snapshots, final_state: state, blow_up: Some(report) });
                }
                Err(e @ (Error::PicardDiverged { .. } | Error::Cfl { .. })) => {
                    if halvings == cfg.max_halvings {
                        let report = BlowUpReport {
                            t: state.t.as_f64(),
                            dt: try_dt,
                            min_rho: min_density(&state.rho).as_f64(),
                            density_floor: floor,
                            reason: format!("step control exhausted after {halvings} halvings ({e})"),
                        };
                        warn!("{report}");
                        return Ok(RunOutput { rows, reports, snapshots, final_state: state, blow_up: Some(report) });
                    }
                    debug!("step at t = {} rejected ({e}); halving dt", state.t);
                    halvings += 1;
                    try_dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        let (next, rep, f) = accepted;
        step += 1;
        if !next.u.all_finite() || !next.c.all_finite() || !next.mu.all_finite() || !next.rho.all_finite() {
            let report = BlowUpReport {
                t: next.t.as_f64(),
                dt: try_dt,
                min_rho: min_density(&state.rho).as_f64(),
                density_floor: floor,
                reason: "non-finite values in the solution".into(),
            };
            warn!("{report}");
            return Ok(RunOutput { rows, reports, snapshots, final_state: state, blow_up: Some(report) });
        }
        let row = diagnostics(laws, &next, &state, T::lit(try_dt), &f, &rep)?;
        observer(step, &next, &row)?;
        rows.push(row);
        reports.push(rep);
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            snapshots.push(next.clone());
        }
        state = next;
        if halvings > 0 {
            dt = try_dt;
            clean = 0;
        } else {
            clean += 1;
            if clean >= cfg.regrow_after && dt < cfg.dt0 {
                dt = (2.0 * dt).min(cfg.dt0);
                clean = 0;
            }
        }
    }
    info!("run finished at t = {} after {step} steps", state.t);
    Ok(RunOutput { rows, reports, snapshots, final_state: state, blow_up: None })
}
