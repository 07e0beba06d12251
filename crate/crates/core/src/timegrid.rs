//! Temporal meshes on `[0, T]`.
//!
//! Two families are provided: the uniform mesh `t_n = n T / M` and the
//! tanh-graded mesh
//!
//! ```text
//! t_n = T - T φ(β(n), y(n)),   φ(μ1, μ2) = tanh(μ1 μ2) / tanh(μ1)
//! β(z) = (γ/2) M (ln(M + 2) - ln(z + 1)) / (M - z + 1)
//! y(z) = (M - z) / M
//! ```
//!
//! Every node is evaluated directly from its closed form, so `t_M` carries no
//! accumulated rounding.

use std::io::Write;

use crate::error::{Error, Result};

/// Which mesh family a [`TimeGrid`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Uniform,
    Graded { gamma: f64 },
}

impl GridKind {
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            GridKind::Uniform => None,
            GridKind::Graded { gamma } => Some(gamma),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GridKind::Uniform => "uniform".to_string(),
            GridKind::Graded { gamma } => format!("graded(gamma={gamma})"),
        }
    }

    /// Build a grid of this kind.
    pub fn build(&self, t_final: f64, steps: usize) -> Result<TimeGrid> {
        match *self {
            GridKind::Uniform => TimeGrid::uniform(t_final, steps),
            GridKind::Graded { gamma } => TimeGrid::graded(t_final, steps, gamma),
        }
    }
}

/// Strictly increasing node sequence `t_0 = 0 < t_1 < ... < t_M = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    nodes: Vec<f64>,
    kind: GridKind,
}

fn check_common(t_final: f64, steps: usize) -> Result<()> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least two time steps are required, got {steps}"
        )));
    }
    Ok(())
}

impl TimeGrid {
    pub fn uniform(t_final: f64, steps: usize) -> Result<Self> {
        check_common(t_final, steps)?;
        let dt = t_final / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
        nodes[steps] = t_final;
        Ok(Self {
            t_final,
            nodes,
            kind: GridKind::Uniform,
        })
    }

    pub fn graded(t_final: f64, steps: usize, gamma: f64) -> Result<Self> {
        check_common(t_final, steps)?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grading exponent must be positive, got {gamma}"
            )));
        }
        let m = steps as f64;
        let grading = |z: f64| 0.5 * gamma * m * ((m + 2.0).ln() - (z + 1.0).ln()) / (m - z + 1.0);
        let nodes: Vec<f64> = (0..=steps)
            .map(|n| {
                let z = n as f64;
                let mu1 = grading(z);
                let mu2 = (m - z) / m;
                let phi = (mu1 * mu2).tanh() / mu1.tanh();
                t_final - t_final * phi
            })
            .collect();
        for (index, w) in nodes.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotoneGrid {
                    index: index + 1,
                    value: w[1],
                    previous: w[0],
                });
            }
        }
        Ok(Self {
            t_final,
            nodes,
            kind: GridKind::Graded { gamma },
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn gamma(&self) -> Option<f64> {
        self.kind.gamma()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, GridKind::Uniform)
    }

    /// Step sizes `τ_n = t_n - t_{n-1}` for `n = 1..=M`.
    pub fn step_sizes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `max τ / min τ`.
    pub fn step_ratio(&self) -> f64 {
        let taus = self.step_sizes();
        let max = taus.iter().cloned().fold(f64::MIN, f64::max);
        let min = taus.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// Two-column CSV dump: `index,t`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,t")?;
        for (n, t) in self.nodes.iter().enumerate() {
            writeln!(out, "{n},{t:.17e}")?;
        }
        out.flush()
    }
}
