//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! `#` starts a comment. A line whose comma-separated pieces all contain `=`
//! holds several assignments; otherwise a comma separates list items.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::material::{LawParams, LAW_NAMES};
use crate::mesh::{FaceTag, MIN_CELLS};
use crate::stepper::StepperConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub extents: Vec<f64>,
    pub n_cells: Vec<usize>,
    pub face_tags: Vec<FaceTag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialConfig {
    pub law: String,
    /// Only meaningful for `default_logrho_doublewell`.
    pub k: Option<f64>,
    pub beta: f64,
    pub eps: f64,
    pub gamma: f64,
    pub eta: f64,
    pub lambda: f64,
}

impl MaterialConfig {
    pub fn params(&self) -> LawParams {
        LawParams {
            k: self.k.unwrap_or(if self.law == "constant_coefficients" { 0.0 } else { 1.0 }),
            beta: self.beta,
            eps: self.eps,
            gamma: self.gamma,
            eta: self.eta,
            lambda: self.lambda,
        }
    }
}

impl Default for MaterialConfig {
    fn default() -> Self {
        let p = LawParams::default();
        MaterialConfig {
            law: LAW_NAMES[0].into(),
            k: None,
            beta: p.beta,
            eps: p.eps,
            gamma: p.gamma,
            eta: p.eta,
            lambda: p.lambda,
        }
    }
}

/// Scenario parameters; unset keys take per-scenario defaults.
pub const SCENARIO_KEYS: [&str; 8] =
    ["rho_bar", "c_bar", "amplitude", "q", "rho_amplitude", "modes", "u_amplitude", "seed"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialConfig {
    pub scenario: Option<String>,
    pub snapshot: Option<String>,
    pub params: BTreeMap<String, f64>,
}

impl InitialConfig {
    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ForcingKind {
    #[default]
    None,
    /// Spatially uniform acceleration `(fx, fy)`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForcingConfig {
    pub kind: ForcingKind,
    pub fx: f64,
    pub fy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Study {
    #[default]
    Both,
    Spatial,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsConfig {
    pub study: Study,
    /// Cells per axis on the coarsest spatial level.
    pub base_cells: usize,
    /// Cells per axis for the temporal study.
    pub temporal_cells: usize,
    pub t_end: f64,
    /// Time steps on the coarsest temporal level.
    pub base_steps: usize,
    pub levels: usize,
    /// Rate `k` of the `exp(-k t)` time factor in the temporal study.
    pub decay_rate: f64,
    pub velocity_amplitude: f64,
    pub c_amplitude: f64,
    pub mu_amplitude: f64,
}

impl Default for MmsConfig {
    fn default() -> Self {
        MmsConfig {
            study: Study::Both,
            base_cells: 16,
            temporal_cells: 64,
            t_end: 0.1,
            base_steps: 4,
            levels: 3,
            decay_rate: 5.0,
            velocity_amplitude: 0.5,
            c_amplitude: 0.3,
            mu_amplitude: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridConfig,
    pub material: MaterialConfig,
    pub initial: InitialConfig,
    pub stepper: StepperConfig,
    pub forcing: ForcingConfig,
    pub mms: MmsConfig,
}

impl Config {
    pub fn dim(&self) -> usize {
        self.grid.n_cells.len()
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::config_at(line, format!("`{key}`: expected a number, got `{}`", v.trim())))?;
    if !x.is_finite() {
        return Err(Error::config_at(line, format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn parse_count(line: usize, key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| {
        Error::config_at(line, format!("`{key}`: expected a non-negative integer, got `{}`", v.trim()))
    })
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn positive(line: usize, key: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config_at(line, format!("`{key}` must be positive, got {x}")))
    }
}

fn nonnegative(line: usize, key: &str, x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::config_at(line, format!("`{key}` must be non-negative, got {x}")))
    }
}

/// Splits one logical line into `(key, value)` assignments.
fn assignments(line_no: usize, text: &str) -> Result<Vec<(String, String)>> {
    let pieces: Vec<&str> = text.split(',').collect();
    let parts: Vec<String> = if pieces.len() > 1 && pieces.iter().all(|p| p.contains('=')) {
        pieces.iter().map(|s| s.to_string()).collect()
    } else {
        vec![text.to_string()]
    };
    parts
        .iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::config_at(line_no, format!("expected `key = value`, got `{}`", p.trim())))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::config_at(line_no, "empty key"));
            }
            Ok((k.to_string(), v.trim().to_string()))
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut section: Option<String> = None;
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, String, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::config_at(line_no, format!("malformed section header `{line}`")))?
                .trim();
            if !["grid", "material", "initial", "stepper", "forcing", "mms"].contains(&name) {
                return Err(Error::config_at(line_no, format!("unknown section `[{name}]`")));
            }
            section = Some(name.to_string());
            continue;
        }
        let sec = section
            .clone()
            .ok_or_else(|| Error::config_at(line_no, "assignment before any `[section]` header"))?;
        for (k, v) in assignments(line_no, line)? {
            if let Some(prev) = seen.insert((sec.clone(), k.clone()), line_no) {
                return Err(Error::config_at(line_no, format!("`{k}` already set at line {prev}")));
            }
            entries.push((line_no, sec.clone(), k, v));
        }
    }

    let mut extents: Option<(usize, Vec<f64>)> = None;
    let mut n_cells: Option<Vec<usize>> = None;
    let mut tags: Option<(usize, Vec<FaceTag>)> = None;
    let mut material = MaterialConfig::default();
    let mut material_lines: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut initial = InitialConfig::default();
    let mut stepper = StepperConfig::default();
    let mut forcing = ForcingConfig::default();
    let mut mms = MmsConfig::default();
    let mut scenario_line = 0;

    for (ln, sec, key, val) in &entries {
        let (ln, key, val) = (*ln, key.as_str(), val.as_str());
        let num = || parse_f64(ln, key, val);
        let count = || parse_count(ln, key, val);
        match (sec.as_str(), key) {
            ("grid", "extents") => {
                let v = list(val).iter().map(|s| parse_f64(ln, key, s)).collect::<Result<Vec<_>>>()?;
                for x in &v {
                    positive(ln, key, *x)?;
                }
                extents = Some((ln, v));
            }
            ("grid", "n_cells") => {
                let mut v = Vec::new();
                for s in list(val) {
                    let n: i64 = s.parse().map_err(|_| {
                        Error::config_at(ln, format!("`n_cells`: expected an integer, got `{s}`"))
                    })?;
                    if n < MIN_CELLS as i64 {
                        return Err(Error::config_at(
                            ln,
                            format!("`n_cells` out of range: {n} (at least {MIN_CELLS} per axis)"),
                        ));
                    }
                    v.push(n as usize);
                }
                if v.is_empty() || v.len() > 2 {
                    return Err(Error::config_at(ln, "`n_cells` needs one or two entries"));
                }
                n_cells = Some(v);
            }
            ("grid", "face_tags") => {
                let v = list(val)
                    .iter()
                    .map(|s| s.parse::<FaceTag>().map_err(|e| Error::config_at(ln, format!("`face_tags`: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                tags = Some((ln, v));
            }
            ("material", "law") => {
                if !LAW_NAMES.contains(&val) {
                    return Err(Error::config_at(
                        ln,
                        format!("unknown law `{val}` (expected one of {})", LAW_NAMES.join(", ")),
                    ));
                }
                material.law = val.to_string();
            }
            ("material", "K") => {
                material.k = Some(nonnegative(ln, key, num()?)?);
                material_lines.insert("K", ln);
            }
            ("material", "beta") => material.beta = nonnegative(ln, key, num()?)?,
            ("material", "eps") => material.eps = positive(ln, key, num()?)?,
            ("material", "gamma") => material.gamma = positive(ln, key, num()?)?,
            ("material", "eta") => material.eta = positive(ln, key, num()?)?,
            ("material", "lambda") => {
                material.lambda = num()?;
                material_lines.insert("lambda", ln);
            }
            ("initial", "scenario") => {
                initial.scenario = Some(val.to_string());
                scenario_line = ln;
            }
            ("initial", "snapshot") => initial.snapshot = Some(val.to_string()),
            ("initial", k) if SCENARIO_KEYS.contains(&k) => {
                let x = num()?;
                if k == "seed" || k == "modes" || k == "q" {
                    if x < 0.0 || x.fract() != 0.0 {
                        return Err(Error::config_at(ln, format!("`{k}` must be a non-negative integer")));
                    }
                }
                if k == "rho_bar" {
                    positive(ln, k, x)?;
                }
                initial.params.insert(k.to_string(), x);
            }
            ("stepper", "dt0") => stepper.dt0 = positive(ln, key, num()?)?,
            ("stepper", "t_end") => stepper.t_end = positive(ln, key, num()?)?,
            ("stepper", "picard_tol") => stepper.picard_tol = positive(ln, key, num()?)?,
            ("stepper", "max_picard") => {
                stepper.max_picard = count()?;
                if stepper.max_picard == 0 {
                    return Err(Error::config_at(ln, "`max_picard` must be at least 1"));
                }
            }
            ("stepper", "max_halvings") => stepper.max_halvings = count()?,
            ("stepper", "linear_tol") => stepper.linear_tol = positive(ln, key, num()?)?,
            ("stepper", "snapshot_every") => stepper.snapshot_every = count()?,
            ("stepper", "regrow_after") => stepper.regrow_after = count()?,
            ("stepper", "density_floor_ratio") => {
                let x = positive(ln, key, num()?)?;
                if x >= 1.0 {
                    return Err(Error::config_at(ln, "`density_floor_ratio` must be below 1"));
                }
                stepper.density_floor_ratio = x;
            }
            ("stepper", "w_u") => stepper.weights.u = nonnegative(ln, key, num()?)?,
            ("stepper", "w_grad_u") => stepper.weights.grad_u = nonnegative(ln, key, num()?)?,
            ("stepper", "w_c") => stepper.weights.c = nonnegative(ln, key, num()?)?,
            ("stepper", "w_grad_c") => stepper.weights.grad_c = nonnegative(ln, key, num()?)?,
            ("stepper", "w_mu") => stepper.weights.mu = nonnegative(ln, key, num()?)?,
            ("forcing", "f_ext") => {
                forcing.kind = match val {
                    "none" => ForcingKind::None,
                    "uniform" => ForcingKind::Uniform,
                    other => {
                        return Err(Error::config_at(ln, format!("unknown f_ext `{other}` (none, uniform)")))
                    }
                }
            }
            ("forcing", "fx") => forcing.fx = num()?,
            ("forcing", "fy") => forcing.fy = num()?,
            ("mms", "study") => {
                mms.study = match val {
                    "both" => Study::Both,
                    "spatial" => Study::Spatial,
                    "temporal" => Study::Temporal,
                    other => {
                        return Err(Error::config_at(ln, format!("unknown study `{other}` (both, spatial, temporal)")))
                    }
                }
            }
            ("mms", "base_cells") => {
                mms.base_cells = count()?;
                if mms.base_cells < MIN_CELLS {
                    return Err(Error::config_at(ln, format!("`base_cells` must be at least {MIN_CELLS}")));
                }
            }
            ("mms", "temporal_cells") => {
                mms.temporal_cells = count()?;
                if mms.temporal_cells < MIN_CELLS {
                    return Err(Error::config_at(ln, format!("`temporal_cells` must be at least {MIN_CELLS}")));
                }
            }
            ("mms", "t_end") => mms.t_end = positive(ln, key, num()?)?,
            ("mms", "base_steps") => {
                mms.base_steps = count()?;
                if mms.base_steps == 0 {
                    return Err(Error::config_at(ln, "`base_steps` must be at least 1"));
                }
            }
            ("mms", "levels") => {
                mms.levels = count()?;
                if mms.levels < 2 {
                    return Err(Error::config_at(ln, "`levels` must be at least 2"));
                }
            }
            ("mms", "decay_rate") => mms.decay_rate = nonnegative(ln, key, num()?)?,
            ("mms", "velocity_amplitude") => mms.velocity_amplitude = num()?,
            ("mms", "c_amplitude") => mms.c_amplitude = num()?,
            ("mms", "mu_amplitude") => mms.mu_amplitude = num()?,
            (s, k) => return Err(Error::config_at(ln, format!("unknown key `{k}` in [{s}]"))),
        }
    }

    let n_cells = n_cells.ok_or_else(|| Error::config("[grid] `n_cells` is required"))?;
    let dim = n_cells.len();
    let extents = match extents {
        Some((ln, e)) if e.len() != dim => {
            return Err(Error::config_at(ln, format!("`extents` has {} entries, expected {dim}", e.len())))
        }
        Some((_, e)) => e,
        None => vec![1.0; dim],
    };
    let face_tags = match tags {
        Some((ln, t)) if t.len() != 2 * dim => {
            return Err(Error::config_at(ln, format!("`face_tags` has {} entries, expected {}", t.len(), 2 * dim)))
        }
        Some((_, t)) => t,
        None => vec![FaceTag::NoSlip; 2 * dim],
    };
    if material.law == "constant_coefficients" && material.k.is_some() {
        return Err(Error::config_at(
            material_lines["K"],
            "`K` has no meaning for `constant_coefficients` (the pressure vanishes)",
        ));
    }
    if !(2.0 * material.eta + material.lambda > 0.0) {
        return Err(Error::config_at(
            material_lines.get("lambda").copied().unwrap_or(0),
            "`lambda` must satisfy 2 eta + lambda > 0",
        ));
    }
    match (&initial.scenario, &initial.snapshot) {
        (None, None) => return Err(Error::config("[initial] needs `scenario` or `snapshot`")),
        (Some(_), Some(_)) => return Err(Error::config("[initial] `scenario` and `snapshot` are exclusive")),
        (Some(name), None) => {
            let allowed = super::scenario::scenario_keys(name)
                .ok_or_else(|| Error::config_at(scenario_line, format!("unknown scenario `{name}`")))?;
            if let Some(k) = initial.params.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::config(format!("scenario `{name}` takes no parameter `{k}`")));
            }
        }
        (None, Some(_)) => {
            if let Some(k) = initial.params.keys().next() {
                return Err(Error::config(format!("`{k}` is a scenario parameter but no scenario is set")));
            }
        }
    }
    if forcing.kind == ForcingKind::None && (forcing.fx != 0.0 || forcing.fy != 0.0) {
        return Err(Error::config("`fx`/`fy` given but `f_ext = none`"));
    }
    Ok(Config {
        grid: GridConfig { extents, n_cells, face_tags },
        material,
        initial,
        stepper,
        forcing,
        mms,
    })
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let g = &self.grid;
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "extents = {}", g.extents.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "));
        let _ = writeln!(s, "n_cells = {}", join(&g.n_cells));
        let _ = writeln!(s, "face_tags = {}", join(&g.face_tags));
        let m = &self.material;
        let _ = writeln!(s, "\n[material]\nlaw = {}", m.law);
        if let Some(k) = m.k {
            let _ = writeln!(s, "K = {}", num(k));
        }
        for (k, v) in [("beta", m.beta), ("eps", m.eps), ("gamma", m.gamma), ("eta", m.eta), ("lambda", m.lambda)] {
            let _ = writeln!(s, "{k} = {}", num(v));
        }
        let i = &self.initial;
        let _ = writeln!(s, "\n[initial]");
        if let Some(sc) = &i.scenario {
            let _ = writeln!(s, "scenario = {sc}");
        }
        if let Some(p) = &i.snapshot {
            let _ = writeln!(s, "snapshot = {p}");
        }
        for (k, v) in &i.params {
            let _ = writeln!(s, "{k} = {}", num(*v));
        }
        let st = &self.stepper;
        let _ = writeln!(s, "\n[stepper]");
        for (k, v) in [
            ("dt0", st.dt0),
            ("t_end", st.t_end),
            ("picard_tol", st.picard_tol),
            ("linear_tol", st.linear_tol),
            ("density_floor_ratio", st.density_floor_ratio),
            ("w_u", st.weights.u),
            ("w_grad_u", st.weights.grad_u),
            ("w_c", st.weights.c),
            ("w_grad_c", st.weights.grad_c),
            ("w_mu", st.weights.mu),
        ] {
            let _ = writeln!(s, "{k} = {}", num(v));
        }
        for (k, v) in [
            ("max_picard", st.max_picard),
            ("max_halvings", st.max_halvings),
            ("snapshot_every", st.snapshot_every),
            ("regrow_after", st.regrow_after),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        let fo = &self.forcing;
        let _ = writeln!(s, "\n[forcing]");
        match fo.kind {
            ForcingKind::None => {
                let _ = writeln!(s, "f_ext = none");
            }
            ForcingKind::Uniform => {
                let _ = writeln!(s, "f_ext = uniform, fx = {}, fy = {}", num(fo.fx), num(fo.fy));
            }
        }
        let mm = &self.mms;
        let study = match mm.study {
            Study::Both => "both",
            Study::Spatial => "spatial",
            Study::Temporal => "temporal",
        };
        let _ = writeln!(s, "\n[mms]\nstudy = {study}");
        for (k, v) in [
            ("base_cells", mm.base_cells),
            ("temporal_cells", mm.temporal_cells),
            ("base_steps", mm.base_steps),
            ("levels", mm.levels),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in [
            ("t_end", mm.t_end),
            ("decay_rate", mm.decay_rate),
            ("velocity_amplitude", mm.velocity_amplitude),
            ("c_amplitude", mm.c_amplitude),
            ("mu_amplitude", mm.mu_amplitude),
        ] {
            let _ = writeln!(s, "{k} = {}", num(v));
        }
        f.write_str(&s)
    }
}

/// Annotated configuration printed by `print-config-template`.
pub const TEMPLATE: &str = "\
# nsch configuration. `#` starts a comment.

[grid]
extents = 1.0, 1.0              # domain lengths per axis; one entry in 1D
n_cells = 48, 48                # at least 4 per axis
face_tags = noslip, noslip, noslip, noslip   # x_lo, x_hi, y_lo, y_hi: noslip | slip

[material]
law = default_logrho_doublewell  # or constant_coefficients (no K)
K = 1.0                          # psibar = K ln(rho) + beta/4 (c^2 - 1)^2
beta = 1.0
eps = 1e-3                       # capillarity
gamma = 1.0                      # mobility
eta = 1.0                        # shear viscosity
lambda = 0.0                     # bulk viscosity, 2 eta + lambda > 0

[initial]
scenario = compressible_spinodal # equilibrium | ch_eigenmode | viscous_eigenmode |
                                 # compressible_spinodal | manufactured | density_drain
# snapshot = path/to/snapshot.txt  (instead of scenario)
amplitude = 0.05
seed = 1

[stepper]
dt0 = 1e-4
t_end = 0.02
picard_tol = 1e-9
max_picard = 25
max_halvings = 8
linear_tol = 1e-12
snapshot_every = 0               # 0 disables snapshots
density_floor_ratio = 1e-8       # floor relative to the initial minimum density
w_u = 1.0                        # weak-norm weights
w_grad_u = 1.0
w_c = 1.0
w_grad_c = 1.0
w_mu = 1.0

[forcing]
f_ext = none                     # none | uniform (with fx, fy)

[mms]
study = both                     # both | spatial | temporal
base_cells = 16
temporal_cells = 64
t_end = 0.1
base_steps = 4
levels = 3
decay_rate = 5.0                 # temporal study time factor exp(-k t)
";

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nn_cells = 8\n[initial]\nscenario = equilibrium\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid.extents, vec![1.0]);
        assert_eq!(c.grid.face_tags, vec![FaceTag::NoSlip; 2]);
        assert_eq!(c.stepper, StepperConfig::default());
        assert_eq!(c.material.law, "default_logrho_doublewell");
        assert_eq!(c.material.params().k, 1.0);
    }

    #[test]
    fn negative_cells_is_a_range_error() {
        let err = parse_config("[grid]\nn_cells = -4\n[initial]\nscenario = equilibrium\n").unwrap_err();
        match err {
            Error::Config { line: Some(2), msg } => assert!(msg.contains("n_cells"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comma_separated_assignments() {
        let c = parse_config(
            "[grid]\nn_cells = 8, 8\n[material]\nlaw = default_logrho_doublewell, K = 1.0, beta = 1.0\n\
             [initial]\nscenario = equilibrium\n",
        )
        .unwrap();
        assert_eq!(c.material.law, "default_logrho_doublewell");
        assert_eq!(c.material.k, Some(1.0));
        assert_eq!(c.grid.n_cells, vec![8, 8]);
    }

    #[test]
    fn unknown_keys_and_sections_rejected() {
        for bad in [
            "[grid]\nn_cels = 8\n",
            "[grids]\nn_cells = 8\n",
            "n_cells = 8\n",
            "[grid]\nn_cells = 8\n[initial]\nscenario = equilibrium\nq = 2\n",
            "[grid]\nn_cells = 8\n[initial]\nscenario = nope\n",
            "[grid]\nn_cells = 8\nn_cells = 9\n[initial]\nscenario = equilibrium\n",
            "[grid]\nn_cells = 8\n[material]\nlaw = constant_coefficients\nK = 1\n[initial]\nscenario = equilibrium\n",
            "[grid]\nn_cells = 8\n[material]\neta = 1\nlambda = -3\n[initial]\nscenario = equilibrium\n",
        ] {
            assert!(matches!(parse_config(bad), Err(Error::Config { .. })), "{bad}");
        }
    }

    #[test]
    fn template_parses_and_round_trips() {
        let c = parse_config(TEMPLATE).unwrap();
        let text = c.to_string();
        let again = parse_config(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_string());
    }
}
