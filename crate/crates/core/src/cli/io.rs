//! Snapshot and diagnostics files.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::material::State;
use crate::mesh::{make_grid, FaceTag, ScalarField, VectorField};
use crate::stepper::{DiagnosticsRow, DIAGNOSTICS_HEADER};

pub const SNAPSHOT_MAGIC: &str = "NSCH-FIELDS v1";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Snapshot text: a header line, then one line per cell with the cell
/// indices, `rho`, the velocity components, `c` and `mu`.
pub fn format_snapshot(state: &State<f64>) -> String {
    let g = state.grid();
    let mut s = format!(
        "{SNAPSHOT_MAGIC} dim={} n_cells={} extents={} face_tags={} t={:.17e}\n",
        g.dim(),
        join(g.n_cells()),
        g.extents().iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(","),
        join(g.face_tags()),
        state.t
    );
    for (i, j) in g.cells() {
        s.push_str(&i.to_string());
        if g.dim() == 2 {
            s.push_str(&format!(" {j}"));
        }
        s.push_str(&format!(" {:.17e}", state.rho.get(i, j)));
        for a in 0..g.dim() {
            s.push_str(&format!(" {:.17e}", state.u.comp(a).get(i, j)));
        }
        s.push_str(&format!(" {:.17e} {:.17e}\n", state.c.get(i, j), state.mu.get(i, j)));
    }
    s
}

pub fn parse_snapshot(text: &str) -> Result<State<f64>> {
    let bad = |line: usize, msg: String| Error::config_at(line, format!("snapshot: {msg}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::config("snapshot: empty file"))?;
    let rest = header
        .strip_prefix(SNAPSHOT_MAGIC)
        .ok_or_else(|| bad(1, format!("missing `{SNAPSHOT_MAGIC}` header")))?;
    let mut dim = None;
    let mut n_cells = None;
    let mut extents = None;
    let mut tags = None;
    let mut t = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(1, format!("bad header field `{kv}`")))?;
        let nums = || -> Result<Vec<f64>> {
            v.split(',').map(|x| x.parse().map_err(|_| bad(1, format!("bad number `{x}`")))).collect()
        };
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| bad(1, format!("bad dim `{v}`")))?),
            "n_cells" => {
                n_cells = Some(
                    v.split(',')
                        .map(|x| x.parse::<usize>().map_err(|_| bad(1, format!("bad cell count `{x}`"))))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            "extents" => extents = Some(nums()?),
            "face_tags" => tags = Some(v.split(',').map(|x| x.parse::<FaceTag>()).collect::<Result<Vec<_>>>()?),
            "t" => t = Some(nums()?[0]),
            other => return Err(bad(1, format!("unknown header field `{other}`"))),
        }
    }
    let missing = |k: &str| bad(1, format!("header lacks `{k}`"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let n_cells = n_cells.ok_or_else(|| missing("n_cells"))?;
    let extents = extents.ok_or_else(|| missing("extents"))?;
    let tags = tags.unwrap_or_else(|| vec![FaceTag::NoSlip; 2 * dim]);
    let grid = make_grid(&extents, &n_cells, &tags).map_err(|e| bad(1, e.to_string()))?;
    if grid.dim() != dim {
        return Err(bad(1, "dim disagrees with n_cells".into()));
    }
    let n = grid.cell_count();
    let mut rho = vec![f64::NAN; n];
    let mut u = vec![vec![f64::NAN; n]; dim];
    let mut c = vec![f64::NAN; n];
    let mut mu = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    for (idx, line) in lines {
        let ln = idx + 1;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 * dim + 3 {
            return Err(bad(ln, format!("expected {} columns, got {}", 2 * dim + 3, cols.len())));
        }
        let ix = |k: usize, axis: usize| -> Result<usize> {
            let v: usize = cols[k].parse().map_err(|_| bad(ln, format!("bad index `{}`", cols[k])))?;
            if v >= grid.n(axis) {
                return Err(bad(ln, format!("index {v} out of range")));
            }
            Ok(v)
        };
        let i = ix(0, 0)?;
        let j = if dim == 2 { ix(1, 1)? } else { 0 };
        let vals = cols[dim..]
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| bad(ln, format!("bad number `{x}`"))))
            .collect::<Result<Vec<_>>>()?;
        let k = grid.cell_index(i, j);
        if std::mem::replace(&mut seen[k], true) {
            return Err(bad(ln, format!("cell ({i}, {j}) listed twice")));
        }
        rho[k] = vals[0];
        for (a, ua) in u.iter_mut().enumerate() {
            ua[k] = vals[1 + a];
        }
        c[k] = vals[1 + dim];
        mu[k] = vals[2 + dim];
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::config(format!("snapshot: cell {k} missing")));
    }
    let comps = u.iter().map(|v| ScalarField::from_interior(&grid, v)).collect();
    State::new(
        ScalarField::from_interior(&grid, &rho),
        VectorField::from_components(comps),
        ScalarField::from_interior(&grid, &c),
        ScalarField::from_interior(&grid, &mu),
        t.ok_or_else(|| missing("t"))?,
    )
}

pub fn write_snapshot(state: &State<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_snapshot(state)).map_err(|e| io_err(path, e))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<State<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_snapshot(&text).map_err(|e| match e {
        Error::Config { msg, line } => Error::Io {
            path: path.display().to_string(),
            msg: match line {
                Some(l) => format!("line {l}: {msg}"),
                None => msg,
            },
        },
        other => other,
    })
}

pub fn format_diagnostics(rows: &[DiagnosticsRow]) -> String {
    let mut s = format!("{DIAGNOSTICS_HEADER}\n");
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn write_diagnostics(rows: &[DiagnosticsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_diagnostics(rows)).map_err(|e| io_err(path, e))
}

pub fn read_diagnostics(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(DIAGNOSTICS_HEADER) {
        return Err(io_err(path, "missing diagnostics header"));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| DiagnosticsRow::from_csv(l).map_err(|e| io_err(path, e)))
        .collect()
}
