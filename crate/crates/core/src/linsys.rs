//! Sparse linear systems: triplet assembly, CSR storage, a banded LU direct
//! solver and a Jacobi-preconditioned BiCGSTAB fallback, all behind a
//! relative-residual contract.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative residuals are measured against `max(|b|, RESIDUAL_FLOOR)`.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Banded LU is used while `n * (2 kl + ku)` stays below this many entries.
const BANDED_STORAGE_LIMIT: usize = 40_000_000;

/// Compressed sparse row matrix with duplicate entries summed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T: Real = f64> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds from triplets; entries are sorted by column and duplicates summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            if r >= n || c >= n {
                return Err(Error::System(format!("entry ({r}, {c}) out of range for n = {n}")));
            }
            counts[r + 1] += 1;
        }
        for r in 0..n {
            counts[r + 1] += counts[r];
        }
        let mut fill = counts.clone();
        let mut raw = vec![(0usize, T::zero()); triplets.len()];
        for &(r, c, v) in triplets {
            raw[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..n {
            let row = &mut raw[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = T::zero();
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(CsrMatrix { n, row_ptr, cols, vals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|r| self.row(r).find(|(c, _)| *c == r).map(|(_, v)| v).unwrap_or_else(T::zero))
            .collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `(lower, upper)` bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.n {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| {
            self.row(r).all(|(c, v)| {
                self.row(c).find(|(cc, _)| *cc == r).map(|(_, w)| w == v).unwrap_or(v == T::zero())
            })
        })
    }
}

/// Assembled operator plus right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem<T: Real = f64> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub symmetric: bool,
}

impl<T: Real> SparseSystem<T> {
    /// Seals a triplet assembly, checking ranges and diagonals.
    pub fn new(n: usize, triplets: &[(usize, usize, T)], rhs: Vec<T>) -> Result<Self> {
        if rhs.len() != n {
            return Err(Error::System(format!("rhs has {} entries, expected {n}", rhs.len())));
        }
        let matrix = CsrMatrix::from_triplets(n, triplets)?;
        if let Some(row) = matrix.diagonal().iter().position(|d| *d == T::zero()) {
            return Err(Error::Singular { row });
        }
        let symmetric = matrix.is_symmetric();
        Ok(SparseSystem { matrix, rhs, symmetric })
    }

    pub fn n_unknowns(&self) -> usize {
        self.matrix.n
    }

    /// Relative residual `|A x - b| / max(|b|, floor)`.
    pub fn relative_residual(&self, x: &[T]) -> T {
        relative_residual(&self.matrix, x, &self.rhs)
    }
}

/// Which algorithm produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Trivial,
    BandedLu,
    BiCgStab,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T: Real = f64> {
    pub x: Vec<T>,
    /// Relative residual recomputed from the returned `x`.
    pub residual: T,
    pub iterations: usize,
    pub method: Method,
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn relative_residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.mul_vec(x);
    let r: Vec<T> = ax.iter().zip(b).map(|(p, q)| *p - *q).collect();
    norm2(&r) / norm2(b).max(T::lit(RESIDUAL_FLOOR))
}

/// Solves `sys` to relative residual `tol` within `max_iter` Krylov
/// iterations (direct solves count as one iteration).
pub fn solve<T: Real>(sys: &SparseSystem<T>, tol: T, max_iter: usize) -> Result<Solution<T>> {
    Solver::new(sys.matrix.clone())?.solve(&sys.rhs, tol, max_iter)
}

/// Default iteration cap of `10 n`.
pub fn default_max_iter(n: usize) -> usize {
    10 * n.max(1)
}

/// A sealed matrix with a reusable factorisation.
#[derive(Debug, Clone)]
pub struct Solver<T: Real = f64> {
    matrix: CsrMatrix<T>,
    lu: Option<BandedLu<T>>,
}

impl<T: Real> Solver<T> {
    pub fn new(matrix: CsrMatrix<T>) -> Result<Self> {
        let (kl, ku) = matrix.bandwidths();
        let lu = if matrix.n * (2 * kl + ku + 1) <= BANDED_STORAGE_LIMIT {
            Some(BandedLu::factor(&matrix)?)
        } else {
            None
        };
        Ok(Solver { matrix, lu })
    }

    /// Krylov-only solver (no factorisation).
    pub fn iterative(matrix: CsrMatrix<T>) -> Self {
        Solver { matrix, lu: None }
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn solve(&self, b: &[T], tol: T, max_iter: usize) -> Result<Solution<T>> {
        if !(tol > T::zero()) {
            return Err(Error::System(format!("tolerance must be positive, got {tol}")));
        }
        let n = self.matrix.n;
        if b.len() != n {
            return Err(Error::System(format!("rhs has {} entries, expected {n}", b.len())));
        }
        if norm2(b) <= T::lit(RESIDUAL_FLOOR) {
            return Ok(Solution {
                x: vec![T::zero(); n],
                residual: T::zero(),
                iterations: 0,
                method: Method::Trivial,
            });
        }
        if let Some(lu) = &self.lu {
            let mut x = lu.solve(b);
            let mut res = relative_residual(&self.matrix, &x, b);
            // iterative refinement
            let mut steps = 1;
            while !(res <= tol) && steps < 4 {
                let ax = self.matrix.mul_vec(&x);
                let r: Vec<T> = b.iter().zip(&ax).map(|(p, q)| *p - *q).collect();
                let dx = lu.solve(&r);
                for (xi, di) in x.iter_mut().zip(&dx) {
                    *xi += *di;
                }
                res = relative_residual(&self.matrix, &x, b);
                steps += 1;
            }
            if res <= tol {
                return Ok(Solution { x, residual: res, iterations: steps, method: Method::BandedLu });
            }
            return bicgstab(&self.matrix, b, Some(x), tol, max_iter);
        }
        bicgstab(&self.matrix, b, None, tol, max_iter)
    }

    /// Solves `A x = b` as a correction to `x0`. The tolerance keeps its
    /// meaning relative to `b`; an exactly consistent `x0` is returned as is.
    pub fn solve_from(&self, b: &[T], x0: &[T], tol: T, max_iter: usize) -> Result<Solution<T>> {
        if x0.len() != b.len() {
            return Err(Error::System(format!("initial guess has {} entries, expected {}", x0.len(), b.len())));
        }
        let ax = self.matrix.mul_vec(x0);
        let r: Vec<T> = b.iter().zip(&ax).map(|(p, q)| *p - *q).collect();
        let (nb, nr) = (norm2(b), norm2(&r));
        let floor = T::lit(RESIDUAL_FLOOR);
        if nr <= floor || nr <= T::epsilon() * T::epsilon() * nb {
            return Ok(Solution { x: x0.to_vec(), residual: nr / nb.max(floor), iterations: 0, method: Method::Trivial });
        }
        let half = T::lit(0.5);
        let tol_r = (tol * nb / nr).min(half);
        let dx = self.solve(&r, tol_r, max_iter)?;
        let x: Vec<T> = x0.iter().zip(&dx.x).map(|(p, q)| *p + *q).collect();
        let residual = relative_residual(&self.matrix, &x, b);
        Ok(Solution { x, residual, iterations: dx.iterations, method: dx.method })
    }
}

/// Row-pivoted LU of a banded matrix, stored row-wise over the widened band
/// `[r - kl, r + ku + kl]` that partial pivoting can fill.
#[derive(Debug, Clone)]
pub struct BandedLu<T: Real = f64> {
    n: usize,
    kl: usize,
    width: usize,
    /// Row `r` holds columns `r - kl ..= r + ku + kl` at offsets `0..width`.
    rows: Vec<T>,
    /// Multipliers: `lower[r * kl + (r - k - 1)]`... stored as `(k, r)` pairs.
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut rows = vec![T::zero(); n * width];
        for r in 0..n {
            for (c, v) in a.row(r) {
                rows[r * width + (c + kl - r)] = v;
            }
        }
        let idx = |r: usize, c: usize| r * width + (c + kl - r);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[idx(k, k)].abs();
            for r in k + 1..=last {
                let v = rows[idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(Error::Singular { row: k });
            }
            piv[k] = p;
            let cmax = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (a1, a2) = (idx(k, c), idx(p, c));
                    rows.swap(a1, a2);
                }
            }
            let pivot = rows[idx(k, k)];
            for r in k + 1..=last {
                let m = rows[idx(r, k)] / pivot;
                rows[idx(r, k)] = m;
                if m != T::zero() {
                    for c in k + 1..=cmax {
                        let u = rows[idx(k, c)];
                        rows[idx(r, c)] -= m * u;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, width, rows, piv })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let idx = |r: usize, c: usize| r * width + (c + kl - r);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != T::zero() {
                for r in k + 1..=(k + kl).min(n.saturating_sub(1)) {
                    x[r] -= self.rows[idx(r, k)] * xk;
                }
            }
        }
        let reach = width - kl - 1;
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..=(k + reach).min(n - 1) {
                s -= self.rows[idx(k, c)] * x[c];
            }
            x[k] = s / self.rows[idx(k, k)];
        }
        x
    }
}

/// Jacobi-preconditioned BiCGSTAB.
pub fn bicgstab<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<Vec<T>>,
    tol: T,
    max_iter: usize,
) -> Result<Solution<T>> {
    let n = a.n;
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|d| *d == T::zero()) {
        return Err(Error::Singular { row });
    }
    let inv_d: Vec<T> = diag.iter().map(|d| T::one() / *d).collect();
    let bnorm = norm2(b).max(T::lit(RESIDUAL_FLOOR));
    let mut x = x0.unwrap_or_else(|| vec![T::zero(); n]);
    let ax = a.mul_vec(&x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(p, q)| *p - *q).collect();
    let r_hat = r.clone();
    let mut rho = T::one();
    let mut alpha = T::one();
    let mut omega = T::one();
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut iterations = 0;
    let mut res = norm2(&r) / bnorm;
    while !(res <= tol) && iterations < max_iter {
        iterations += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new == T::zero() || !rho_new.is_finite() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let y: Vec<T> = p.iter().zip(&inv_d).map(|(a, d)| *a * *d).collect();
        v = a.mul_vec(&y);
        let denom = dot(&r_hat, &v);
        if denom == T::zero() {
            break;
        }
        alpha = rho / denom;
        let s: Vec<T> = r.iter().zip(&v).map(|(ri, vi)| *ri - alpha * *vi).collect();
        for k in 0..n {
            x[k] += alpha * y[k];
        }
        if norm2(&s) / bnorm <= tol {
            r = s;
            res = relative_residual(a, &x, b);
            continue;
        }
        let z: Vec<T> = s.iter().zip(&inv_d).map(|(a, d)| *a * *d).collect();
        let t = a.mul_vec(&z);
        let tt = dot(&t, &t);
        omega = if tt > T::zero() { dot(&t, &s) / tt } else { T::zero() };
        for k in 0..n {
            x[k] += omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        res = norm2(&r) / bnorm;
        if res <= tol {
            // guard against drift between recursive and true residuals
            res = relative_residual(a, &x, b);
        }
        if omega == T::zero() {
            break;
        }
    }
    let res = relative_residual(a, &x, b);
    if res <= tol {
        Ok(Solution { x, residual: res, iterations, method: Method::BiCgStab })
    } else {
        Err(Error::NotConverged { residual: res.as_f64(), iterations })
    }
}
