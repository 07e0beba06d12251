//! Tensor-product grid on a rectangle, the matrix-free five-point Laplacian
//! with homogeneous ghost values, and Dirichlet boundary lifting.
//!
//! Unknowns live on interior nodes `x_i = a + i h_x` (`i = 1..N_x-1`) and
//! `y_j = c + j h_y` (`j = 1..N_y-1`), stored column-major with `x` fastest:
//! `k = (i - 1) + (j - 1)(N_x - 1)`.

use std::io::Write;
use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest interior node count accepted by the dense assembly paths.
pub const DENSE_LIMIT: usize = 10_000;

/// Closed rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn square(min: f64, max: f64) -> Self {
        Self::new(min, max, min, max)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    domain: Rectangle,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
}

impl SpaceGrid {
    /// `nx`, `ny` are subdivision counts; each must be at least 2 so that
    /// there is an interior node.
    pub fn new(domain: Rectangle, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 subdivisions per axis, got {nx}x{ny}"
            )));
        }
        if !(domain.x_max > domain.x_min && domain.y_max > domain.y_min) {
            return Err(Error::InvalidParameter(format!("empty domain {domain:?}")));
        }
        Ok(Self {
            domain,
            nx,
            ny,
            hx: (domain.x_max - domain.x_min) / nx as f64,
            hy: (domain.y_max - domain.y_min) / ny as f64,
        })
    }

    pub fn domain(&self) -> Rectangle {
        self.domain
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Interior nodes per row, `N_x - 1`.
    pub fn mx(&self) -> usize {
        self.nx - 1
    }

    /// Interior nodes per column, `N_y - 1`.
    pub fn my(&self) -> usize {
        self.ny - 1
    }

    pub fn len(&self) -> usize {
        self.mx() * self.my()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of grid line `i` (`0..=N_x`).
    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx {
            self.domain.x_max
        } else {
            self.domain.x_min + i as f64 * self.hx
        }
    }

    /// Coordinate of grid line `j` (`0..=N_y`).
    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny {
            self.domain.y_max
        } else {
            self.domain.y_min + j as f64 * self.hy
        }
    }

    /// Storage index of interior node `(i, j)`, both 1-based.
    pub fn index(&self, i: usize, j: usize) -> usize {
        (i - 1) + (j - 1) * self.mx()
    }

    /// Interior coordinates in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (1..self.ny).flat_map(move |j| (1..self.nx).map(move |i| (self.x(i), self.y(j))))
    }

    /// Sample `f(x, y)` on the interior nodes.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Field {
        Field(self.points().map(|(x, y)| f(x, y)).collect())
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.len(),
                found: u.len(),
            })
        }
    }
}

/// Scalar values on the interior nodes of a [`SpaceGrid`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn zeros(grid: &SpaceGrid) -> Self {
        Field(vec![0.0; grid.len()])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    /// `(x, y, value)` triples in storage order.
    pub fn write_csv<W: Write>(&self, grid: &SpaceGrid, mut out: W) -> Result<()> {
        grid.check(self)?;
        writeln!(out, "x,y,value")?;
        for ((x, y), v) in grid.points().zip(self.iter()) {
            writeln!(out, "{x:.17e},{y:.17e},{v:.17e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

/// Write `L u` into `out`, with zero values at boundary neighbours.
pub fn apply_laplacian_into(grid: &SpaceGrid, u: &[f64], out: &mut [f64]) -> Result<()> {
    grid.check(u)?;
    grid.check(out)?;
    let mx = grid.mx();
    let my = grid.my();
    let cx = 1.0 / (grid.hx * grid.hx);
    let cy = 1.0 / (grid.hy * grid.hy);
    let centre = -2.0 * (cx + cy);
    for j in 0..my {
        let row = j * mx;
        for i in 0..mx {
            let k = row + i;
            let mut acc = centre * u[k];
            if i > 0 {
                acc += cx * u[k - 1];
            }
            if i + 1 < mx {
                acc += cx * u[k + 1];
            }
            if j > 0 {
                acc += cy * u[k - mx];
            }
            if j + 1 < my {
                acc += cy * u[k + mx];
            }
            out[k] = acc;
        }
    }
    Ok(())
}

pub fn apply_laplacian(grid: &SpaceGrid, u: &[f64]) -> Result<Field> {
    let mut out = Field::zeros(grid);
    apply_laplacian_into(grid, u, &mut out)?;
    Ok(out)
}

/// Boundary neighbour values divided by `h²`, accumulated into `out`
/// scaled by `weight`.
pub fn add_boundary_contribution<F>(grid: &SpaceGrid, bc: F, t: f64, weight: f64, out: &mut [f64]) -> Result<()>
where
    F: Fn(f64, f64, f64) -> f64,
{
    grid.check(out)?;
    let (nx, ny) = (grid.nx, grid.ny);
    let cx = weight / (grid.hx * grid.hx);
    let cy = weight / (grid.hy * grid.hy);
    for j in 1..ny {
        let y = grid.y(j);
        out[grid.index(1, j)] += cx * bc(grid.x(0), y, t);
        out[grid.index(nx - 1, j)] += cx * bc(grid.x(nx), y, t);
    }
    for i in 1..nx {
        let x = grid.x(i);
        out[grid.index(i, 1)] += cy * bc(x, grid.y(0), t);
        out[grid.index(i, ny - 1)] += cy * bc(x, grid.y(ny), t);
    }
    Ok(())
}

pub fn boundary_contribution<F>(grid: &SpaceGrid, bc: F, t: f64) -> Field
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut out = Field::zeros(grid);
    add_boundary_contribution(grid, bc, t, 1.0, &mut out).expect("conforming by construction");
    out
}

/// Dense `L = I_y ⊗ A_x + A_y ⊗ I_x`.
pub fn assemble_dense(grid: &SpaceGrid) -> Result<DMatrix<f64>> {
    let n = grid.len();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let tridiag = |m: usize, h: f64| {
        let s = 1.0 / (h * h);
        DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                -2.0 * s
            } else if r.abs_diff(c) == 1 {
                s
            } else {
                0.0
            }
        })
    };
    let ax = tridiag(grid.mx(), grid.hx);
    let ay = tridiag(grid.my(), grid.hy);
    let ix = DMatrix::<f64>::identity(grid.mx(), grid.mx());
    let iy = DMatrix::<f64>::identity(grid.my(), grid.my());
    Ok(iy.kronecker(&ax) + ay.kronecker(&ix))
}
