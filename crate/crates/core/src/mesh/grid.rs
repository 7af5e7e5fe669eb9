use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest admissible number of cells per axis.
pub const MIN_CELLS: usize = 4;

/// Velocity boundary type of a whole domain face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceTag {
    /// `u = 0`.
    NoSlip,
    /// Zero normal velocity and zero tangential traction.
    Slip,
}

impl FaceTag {
    pub fn name(self) -> &'static str {
        match self {
            FaceTag::NoSlip => "noslip",
            FaceTag::Slip => "slip",
        }
    }
}

impl fmt::Display for FaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FaceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "noslip" | "no_slip" | "dirichlet_noslip" => Ok(FaceTag::NoSlip),
            "slip" => Ok(FaceTag::Slip),
            other => Err(Error::config(format!("unknown face tag `{other}`"))),
        }
    }
}

/// Domain face. Faces are ordered x-low, x-high, y-low, y-high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XLo,
    XHi,
    YLo,
    YHi,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::XLo, Face::XHi, Face::YLo, Face::YHi];

    pub fn axis(self) -> usize {
        match self {
            Face::XLo | Face::XHi => 0,
            Face::YLo | Face::YHi => 1,
        }
    }

    pub fn is_low(self) -> bool {
        matches!(self, Face::XLo | Face::YLo)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::XLo => "x_lo",
            Face::XHi => "x_hi",
            Face::YLo => "y_lo",
            Face::YHi => "y_hi",
        }
    }
}

/// Uniform cell-centred grid on `[0, L_x] (x [0, L_y])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T: Real = f64> {
    dim: usize,
    extents: [T; 2],
    n: [usize; 2],
    h: [T; 2],
    tags: [FaceTag; 4],
}

/// Builds a grid; `face_tags` holds one tag per face in [`Face`] order.
pub fn make_grid<T: Real>(
    extents: &[T],
    n_cells: &[usize],
    face_tags: &[FaceTag],
) -> Result<Arc<Grid<T>>> {
    Grid::new(extents, n_cells, face_tags).map(Arc::new)
}

impl<T: Real> Grid<T> {
    pub fn new(extents: &[T], n_cells: &[usize], face_tags: &[FaceTag]) -> Result<Self> {
        let dim = extents.len();
        if dim != 1 && dim != 2 {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n_cells.len() != dim {
            return Err(Error::Grid(format!(
                "{} cell counts given for a {dim}-dimensional grid",
                n_cells.len()
            )));
        }
        if face_tags.len() != 2 * dim {
            return Err(Error::Grid(format!(
                "expected {} face tags, got {}",
                2 * dim,
                face_tags.len()
            )));
        }
        let mut e = [T::one(); 2];
        let mut n = [1usize; 2];
        let mut h = [T::one(); 2];
        let mut tags = [FaceTag::NoSlip; 4];
        for axis in 0..dim {
            if !(extents[axis] > T::zero()) || !extents[axis].is_finite() {
                return Err(Error::Grid(format!(
                    "extent along axis {axis} must be positive, got {}",
                    extents[axis]
                )));
            }
            if n_cells[axis] < MIN_CELLS {
                return Err(Error::Grid(format!(
                    "need at least {MIN_CELLS} cells along axis {axis}, got {}",
                    n_cells[axis]
                )));
            }
            e[axis] = extents[axis];
            n[axis] = n_cells[axis];
            h[axis] = extents[axis] / T::from_usize_lossy(n_cells[axis]);
        }
        tags[..2 * dim].copy_from_slice(face_tags);
        Ok(Grid { dim, extents: e, n, h, tags })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[T] {
        &self.extents[..self.dim]
    }

    pub fn n_cells(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    /// Cells along `axis`; 1 for the unused y axis of a 1D grid.
    #[inline]
    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    #[inline]
    pub fn h(&self, axis: usize) -> T {
        self.h[axis]
    }

    pub fn spacing(&self) -> &[T] {
        &self.h[..self.dim]
    }

    pub fn tag(&self, face: Face) -> FaceTag {
        self.tags[face.index()]
    }

    pub fn face_tags(&self) -> &[FaceTag] {
        &self.tags[..2 * self.dim]
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        Face::ALL.into_iter().take(2 * self.dim)
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dim).fold(T::one(), |v, a| v * self.h[a])
    }

    /// Cell centre; the y coordinate of a 1D grid is 0.
    pub fn center(&self, i: usize, j: usize) -> [T; 2] {
        let half = T::lit(0.5);
        let x = (T::from_usize_lossy(i) + half) * self.h[0];
        let y = if self.dim == 2 {
            (T::from_usize_lossy(j) + half) * self.h[1]
        } else {
            T::zero()
        };
        [x, y]
    }

    /// Interior cells in storage order (x fastest).
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> {
        let (nx, ny) = (self.n[0], self.n[1]);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub(crate) fn padded_len(&self) -> usize {
        self.px() * self.py()
    }

    #[inline]
    pub(crate) fn px(&self) -> usize {
        self.n[0] + 2
    }

    #[inline]
    pub(crate) fn py(&self) -> usize {
        if self.dim == 2 {
            self.n[1] + 2
        } else {
            1
        }
    }

    /// Storage offset of cell `(i, j)`; ghosts sit at index -1 and n.
    #[inline]
    pub(crate) fn offset(&self, i: isize, j: isize) -> usize {
        let oy = if self.dim == 2 { 1 } else { 0 };
        debug_assert!(i >= -1 && i <= self.n[0] as isize);
        debug_assert!(j + oy >= 0 && ((j + oy) as usize) < self.py());
        ((j + oy) as usize) * self.px() + (i + 1) as usize
    }

    /// Unit step along `axis` as an `(di, dj)` pair.
    #[inline]
    pub(crate) fn step(axis: usize) -> (isize, isize) {
        if axis == 0 {
            (1, 0)
        } else {
            (0, 1)
        }
    }

    /// Maps a possibly-ghost cell to the interior cell it mirrors, returning
    /// the reflecting faces crossed along x and y.
    pub(crate) fn fold(&self, i: isize, j: isize) -> (usize, usize, Option<Face>, Option<Face>) {
        let nx = self.n[0] as isize;
        let ny = self.n[1] as isize;
        let (fi, fx) = if i < 0 {
            (0, Some(Face::XLo))
        } else if i >= nx {
            (nx - 1, Some(Face::XHi))
        } else {
            (i, None)
        };
        let (fj, fy) = if self.dim == 1 {
            (0, None)
        } else if j < 0 {
            (0, Some(Face::YLo))
        } else if j >= ny {
            (ny - 1, Some(Face::YHi))
        } else {
            (j, None)
        };
        (fi as usize, fj as usize, fx, fy)
    }
}
