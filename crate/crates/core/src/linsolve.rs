//! Solvers for the per-step system `(σ I - κ L) x = r`.
//!
//! The default is Jacobi-preconditioned conjugate gradients applied matrix-free;
//! a dense Cholesky solve backs it up on small grids and acts as an oracle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spatial::{apply_laplacian_into, assemble_dense, Field, SpaceGrid, DENSE_LIMIT};

/// `σ I - κ L` on a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedOperator<'g> {
    pub sigma: f64,
    pub kappa: f64,
    pub grid: &'g SpaceGrid,
}

impl<'g> ShiftedOperator<'g> {
    pub fn new(sigma: f64, kappa: f64, grid: &'g SpaceGrid) -> Result<Self> {
        if !(sigma > 0.0 && kappa >= 0.0 && sigma.is_finite() && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shifted operator needs σ > 0 and κ ≥ 0, got σ = {sigma}, κ = {kappa}"
            )));
        }
        Ok(Self { sigma, kappa, grid })
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        apply_laplacian_into(self.grid, u, out)?;
        for (o, &v) in out.iter_mut().zip(u) {
            *o = self.sigma * v - self.kappa * *o;
        }
        Ok(())
    }

    pub fn apply(&self, u: &[f64]) -> Result<Field> {
        let mut out = Field::zeros(self.grid);
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    /// Constant diagonal entry.
    pub fn diagonal(&self) -> f64 {
        let g = self.grid;
        self.sigma + 2.0 * self.kappa * (1.0 / (g.hx() * g.hx()) + 1.0 / (g.hy() * g.hy()))
    }

    pub fn dense(&self) -> Result<DMatrix<f64>> {
        let l = assemble_dense(self.grid)?;
        let n = l.nrows();
        Ok(DMatrix::<f64>::identity(n, n) * self.sigma - l * self.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Cg,
    Direct,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(SolverKind::Cg),
            "direct" => Ok(SolverKind::Direct),
            other => Err(Error::Config(format!(
                "unknown solver '{other}' (expected cg or direct)"
            ))),
        }
    }
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Cg => "cg",
            SolverKind::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Relative residual target.
    pub tol: f64,
    /// `None` means `10 (N_x + N_y)`.
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverKind::Cg,
            tol: 1e-10,
            max_iter: None,
        }
    }
}

impl SolverConfig {
    pub fn max_iter_for(&self, grid: &SpaceGrid) -> usize {
        self.max_iter.unwrap_or(10 * (grid.nx() + grid.ny()))
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Field,
    pub iterations: usize,
    /// Final relative residual `‖r - A x‖ / ‖r‖`.
    pub residual: f64,
    /// Relative residual after each iteration, starting with the initial guess.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients from the initial guess `x0`.
///
/// The returned iterate carries minimal residual smoothing: after each CG
/// update the reported pair `(y, s)` moves to the point of smallest residual
/// on the line through the previous smoothed iterate and the new CG
/// iterate, so `s = rhs - A y` has non-increasing 2-norm. The CG recurrence
/// itself is untouched. Convergence is declared on `‖s‖ / ‖rhs‖ ≤ tol`.
pub fn cg_solve(op: &ShiftedOperator<'_>, rhs: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Result<Solution> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let n = op.grid.len();
    for len in [rhs.len(), x0.len()] {
        if len != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let rhs_norm = norm(rhs);
    if rhs_norm == 0.0 {
        return Ok(Solution {
            x: Field(vec![0.0; n]),
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }

    let inv_diag = 1.0 / op.diagonal();
    let mut x = x0.to_vec();
    let mut ap = vec![0.0; n];
    op.apply_into(&x, &mut ap)?;
    let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().map(|v| v * inv_diag).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    // smoothed iterate and its residual
    let mut y = x.clone();
    let mut s = r.clone();
    let mut ds = vec![0.0; n];

    let mut residual = norm(&s) / rhs_norm;
    let mut history = vec![residual];
    let mut iterations = 0;
    while residual > tol {
        if iterations == max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual,
                best: y,
            });
        }
        op.apply_into(&p, &mut ap)?;
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = r[k] * inv_diag;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }

        for k in 0..n {
            ds[k] = r[k] - s[k];
        }
        let dd = dot(&ds, &ds);
        if dd > 0.0 {
            let eta = -dot(&s, &ds) / dd;
            for k in 0..n {
                s[k] += eta * ds[k];
                y[k] += eta * (x[k] - y[k]);
            }
        }
        iterations += 1;
        residual = norm(&s) / rhs_norm;
        history.push(residual);
    }
    Ok(Solution {
        x: Field(y),
        iterations,
        residual,
        history,
    })
}

/// Dense Cholesky solve, limited to [`DENSE_LIMIT`] unknowns.
pub fn direct_solve_small(op: &ShiftedOperator<'_>, rhs: &[f64]) -> Result<Field> {
    let n = op.grid.len();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    if rhs.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    let chol = op.dense()?.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let x = chol.solve(&DVector::from_column_slice(rhs));
    Ok(Field(x.as_slice().to_vec()))
}

/// Dispatch on `config.kind`; the direct route reports zero iterations.
pub fn solve(op: &ShiftedOperator<'_>, rhs: &[f64], x0: &[f64], config: &SolverConfig) -> Result<Solution> {
    match config.kind {
        SolverKind::Cg => cg_solve(op, rhs, x0, config.tol, config.max_iter_for(op.grid)),
        SolverKind::Direct => {
            let x = direct_solve_small(op, rhs)?;
            let ax = op.apply(&x)?;
            let rn = norm(rhs);
            let res: Vec<f64> = rhs.iter().zip(ax.iter()).map(|(b, a)| b - a).collect();
            let residual = if rn > 0.0 { norm(&res) / rn } else { 0.0 };
            Ok(Solution {
                x,
                iterations: 0,
                residual,
                history: vec![residual],
            })
        }
    }
}
