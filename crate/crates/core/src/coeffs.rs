//! Shifted BDF2 / IMEX coefficient sets collocated at `t^{n+β}`.
//!
//! A step from `t^n` to `t^{n+1}` uses three sets of weights:
//!
//! * `a = (a_0, a_1, a_2)` on `(u^{n-1}, u^n, u^{n+1})` approximating `∂_t u(t^{n+β})`,
//! * `b = (b_0, b_1)` on `(u^n, u^{n+1})` interpolating `u(t^{n+β})` (implicit part),
//! * `c = (c_0, c_1)` on `(u^{n-1}, u^n)` extrapolating `u(t^{n+β})` (explicit part).
//!
//! The weights are the solutions of small Vandermonde systems in the node
//! offsets `t - t^{n+β}`, solved here by closed-form elimination. The
//! [`StepCoefficients::lagrange`] route differentiates and evaluates the
//! Lagrange basis directly and serves as an independent check.

use std::io::Write;

use crate::error::{Error, Result};

/// Default bound on the scaled Vandermonde condition number.
pub const DEFAULT_CONDITION_BOUND: f64 = 1e10;

/// Weights for one BDF-IMEX step.
///
/// For [`StepCoefficients::uniform`] the values are in Δt-scaled form: the
/// derivative weights must be divided by Δt and `t_eval` is the offset `β`
/// measured in steps from `t^n`. All other constructors, and
/// [`StepCoefficients::for_uniform_step`], return absolute values where `a`
/// carries units of 1/time and `t_eval` is an absolute time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub beta: f64,
    pub a: [f64; 3],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub t_eval: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("β must exceed 1, got {beta}")))
    }
}

fn check_triple(t_prev: f64, t_curr: f64, t_next: f64) -> Result<()> {
    let finite = t_prev.is_finite() && t_curr.is_finite() && t_next.is_finite();
    if finite && t_prev < t_curr && t_curr < t_next {
        Ok(())
    } else {
        Err(Error::NonMonotoneNodes(t_prev, t_curr, t_next))
    }
}

/// Solve `[1 1 1; x; x²] w = (0, 1, 0)`.
fn vandermonde3(x: [f64; 3]) -> [f64; 3] {
    let w2 = -(x[0] + x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    let w1 = (1.0 - (x[2] - x[0]) * w2) / (x[1] - x[0]);
    let w0 = -w1 - w2;
    [w0, w1, w2]
}

/// Solve `[1 1; x] w = (1, 0)`.
fn vandermonde2(x: [f64; 2]) -> [f64; 2] {
    let w1 = -x[0] / (x[1] - x[0]);
    [1.0 - w1, w1]
}

/// Infinity-norm condition number of `[1 1 1; x; x²]`.
fn vandermonde3_condition(x: [f64; 3]) -> f64 {
    let m = [[1.0, 1.0, 1.0], x, [x[0] * x[0], x[1] * x[1], x[2] * x[2]]];
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    if det == 0.0 || !det.is_finite() {
        return f64::INFINITY;
    }
    // adjugate, transposed
    let inv = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let norm = |a: &[[f64; 3]; 3]| {
        a.iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    norm(&m) * norm(&inv) / det.abs()
}

impl StepCoefficients {
    /// Δt-scaled weights for a uniform mesh.
    pub fn uniform(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let [a2, a1, a0] = vandermonde3([1.0 - beta, -beta, -1.0 - beta]);
        let [b1, b0] = vandermonde2([1.0 - beta, -beta]);
        let [c1, c0] = vandermonde2([-beta, -1.0 - beta]);
        Ok(Self {
            beta,
            a: [a0, a1, a2],
            b: [b0, b1],
            c: [c0, c1],
            t_eval: beta,
        })
    }

    /// Absolute weights for a uniform step of size `dt` starting at `t_curr`.
    pub fn for_uniform_step(&self, t_curr: f64, dt: f64) -> Self {
        Self {
            beta: self.beta,
            a: self.a.map(|a| a / dt),
            b: self.b,
            c: self.c,
            t_eval: t_curr + self.beta * dt,
        }
    }

    /// Weights for an arbitrary increasing node triple, by Vandermonde elimination.
    pub fn nonuniform(t_prev: f64, t_curr: f64, t_next: f64, beta: f64) -> Result<Self> {
        Self::nonuniform_with_bound(t_prev, t_curr, t_next, beta, DEFAULT_CONDITION_BOUND)
    }

    pub fn nonuniform_with_bound(
        t_prev: f64,
        t_curr: f64,
        t_next: f64,
        beta: f64,
        condition_bound: f64,
    ) -> Result<Self> {
        check_beta(beta)?;
        check_triple(t_prev, t_curr, t_next)?;
        let h = t_next - t_curr;
        let t_eval = t_curr + beta * h;
        // offsets in units of the current step
        let s_next = (t_next - t_eval) / h;
        let s_curr = (t_curr - t_eval) / h;
        let s_prev = (t_prev - t_eval) / h;

        let x = [s_next, s_curr, s_prev];
        let condition = vandermonde3_condition(x);
        if !(condition <= condition_bound) {
            return Err(Error::DegenerateNodes {
                condition,
                bound: condition_bound,
            });
        }
        let [a2, a1, a0] = vandermonde3(x);
        let [b1, b0] = vandermonde2([s_next, s_curr]);
        let [c1, c0] = vandermonde2([s_curr, s_prev]);
        Ok(Self {
            beta,
            a: [a0 / h, a1 / h, a2 / h],
            b: [b0, b1],
            c: [c0, c1],
            t_eval,
        })
    }

    /// Weights from the Lagrange basis over `(t_prev, t_curr, t_next)`.
    pub fn lagrange(t_prev: f64, t_curr: f64, t_next: f64, beta: f64) -> Result<Self> {
        Self::nonuniform(t_prev, t_curr, t_next, beta)?;
        let t = t_curr + beta * (t_next - t_curr);
        let a0 = (2.0 * t - t_next - t_curr) / ((t_prev - t_next) * (t_prev - t_curr));
        let a1 = (2.0 * t - t_prev - t_next) / ((t_curr - t_prev) * (t_curr - t_next));
        let a2 = (2.0 * t - t_curr - t_prev) / ((t_next - t_curr) * (t_next - t_prev));
        let b0 = (t - t_next) / (t_curr - t_next);
        let b1 = (t - t_curr) / (t_next - t_curr);
        let c0 = (t - t_curr) / (t_prev - t_curr);
        let c1 = (t - t_prev) / (t_curr - t_prev);
        Ok(Self {
            beta,
            a: [a0, a1, a2],
            b: [b0, b1],
            c: [c0, c1],
            t_eval: t,
        })
    }

    /// Normalized residuals of the moment conditions for absolute weights on
    /// `(t_prev, t_curr, t_next)`, each of which vanishes for exact weights:
    ///
    /// `[Σa·h, Σa·δ - 1, Σa·δ²/h, Σb - 1, Σb·δ/h, Σc - 1, Σc·δ/h]`
    ///
    /// with `δ = t - t_eval` and `h = t_next - t_curr`.
    pub fn consistency_residuals(&self, t_prev: f64, t_curr: f64, t_next: f64) -> [f64; 7] {
        let h = t_next - t_curr;
        let d = [t_prev - self.t_eval, t_curr - self.t_eval, t_next - self.t_eval];
        let a = self.a;
        let [b0, b1] = self.b;
        let [c0, c1] = self.c;
        [
            (a[0] + a[1] + a[2]) * h,
            a[0] * d[0] + a[1] * d[1] + a[2] * d[2] - 1.0,
            (a[0] * d[0] * d[0] + a[1] * d[1] * d[1] + a[2] * d[2] * d[2]) / h,
            b0 + b1 - 1.0,
            (b0 * d[1] + b1 * d[2]) / h,
            c0 + c1 - 1.0,
            (c0 * d[0] + c1 * d[1]) / h,
        ]
    }

    /// Largest componentwise difference relative to the largest magnitude in each set.
    pub fn max_relative_difference(&self, other: &Self) -> f64 {
        fn rel(x: &[f64], y: &[f64]) -> f64 {
            let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            x.iter().zip(y).map(|(p, q)| (p - q).abs() / scale).fold(0.0, f64::max)
        }
        rel(&self.a, &other.a)
            .max(rel(&self.b, &other.b))
            .max(rel(&self.c, &other.c))
    }
}

/// Which route produced a coefficient row in [`write_coeffs_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffRoute {
    Uniform,
    Vandermonde,
    Lagrange,
}

impl CoeffRoute {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoeffRoute::Uniform => "uniform",
            CoeffRoute::Vandermonde => "vandermonde",
            CoeffRoute::Lagrange => "lagrange",
        }
    }
}

/// A coefficient table row: the route, the node triple (absent for the
/// Δt-scaled uniform row) and the weights.
pub type CoeffRow = (CoeffRoute, Option<[f64; 3]>, StepCoefficients);

pub fn write_coeffs_csv<W: Write>(mut out: W, rows: &[CoeffRow]) -> std::io::Result<()> {
    writeln!(out, "route,beta,t_prev,t_curr,t_next,t_eval,a0,a1,a2,b0,b1,c0,c1")?;
    for (route, nodes, c) in rows {
        let nodes = match nodes {
            Some([p, q, r]) => format!("{p:.17e},{q:.17e},{r:.17e}"),
            None => "-1,0,1".to_string(),
        };
        writeln!(
            out,
            "{},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            route.as_str(),
            c.beta,
            nodes,
            c.t_eval,
            c.a[0],
            c.a[1],
            c.a[2],
            c.b[0],
            c.b[1],
            c.c[0],
            c.c[1]
        )?;
    }
    out.flush()
}
