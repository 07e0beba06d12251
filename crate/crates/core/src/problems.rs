//! Fisher-KPP problem instances `u_t = D Δu + K f(u) + g` with Dirichlet data.

use std::fmt;
use std::sync::Arc;

use crate::coeffs::StepCoefficients;
use crate::error::{Error, Result};
use crate::spatial::{Field, Rectangle, SpaceGrid};

/// `(x, y, t) -> value`.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// `(x, y) -> value`.
pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Reaction term `f(u)`.
#[derive(Clone, Copy)]
pub enum Nonlinearity {
    /// `u (1 - u^p)`
    LogisticP { p: f64 },
    /// `u^p (1 - u)^q`
    PqProduct { p: f64, q: f64 },
    /// Any pointwise law, for code-level experiments.
    Custom(fn(f64) -> f64),
}

fn pow(u: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        u.powi(p as i32)
    } else {
        u.powf(p)
    }
}

impl Nonlinearity {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::LogisticP { p } => u * (1.0 - pow(u, p)),
            Nonlinearity::PqProduct { p, q } => pow(u, p) * pow(1.0 - u, q),
            Nonlinearity::Custom(f) => f(u),
        }
    }

    pub fn logistic() -> Self {
        Nonlinearity::LogisticP { p: 1.0 }
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::LogisticP { p } => write!(f, "LogisticP {{ p: {p} }}"),
            Nonlinearity::PqProduct { p, q } => write!(f, "PqProduct {{ p: {p}, q: {q} }}"),
            Nonlinearity::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `f_eval(u, nl)`.
pub fn f_eval(u: f64, nl: &Nonlinearity) -> f64 {
    nl.eval(u)
}

/// A complete problem definition. All callables take `(x, y, t)` or `(x, y)`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Rectangle,
    pub t_final: f64,
    pub diffusion: f64,
    pub reaction: f64,
    pub nonlinearity: Nonlinearity,
    pub source: Option<SpaceTimeFn>,
    pub boundary: SpaceTimeFn,
    pub initial: SpaceFn,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("diffusion", &self.diffusion)
            .field("reaction", &self.reaction)
            .field("nonlinearity", &self.nonlinearity)
            .field("source", &self.source.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Manufactured solution `u = sin t sin x sin y` on `[0, π]²`.
pub fn example1() -> ProblemSpec {
    let exact = |x: f64, y: f64, t: f64| t.sin() * x.sin() * y.sin();
    ProblemSpec {
        name: "manufactured".to_string(),
        domain: Rectangle::square(0.0, std::f64::consts::PI),
        t_final: 1.0,
        diffusion: 1.0,
        reaction: 1.0,
        nonlinearity: Nonlinearity::logistic(),
        source: Some(Arc::new(|x: f64, y: f64, t: f64| {
            let s = x.sin() * y.sin();
            let u = t.sin() * s;
            u * (1.0 + u) + t.cos() * s
        })),
        boundary: Arc::new(|_, _, _| 0.0),
        initial: Arc::new(|_, _| 0.0),
        exact: Some(Arc::new(exact)),
    }
}

/// Fisher travelling wave `[1 + exp(ξ/√6 - 5t/6)]^{-2}`, `ξ = (x - y)/√2`.
pub fn travelling_wave(x: f64, y: f64, t: f64) -> f64 {
    let xi = (x - y) / std::f64::consts::SQRT_2;
    let e = (xi / 6f64.sqrt() - 5.0 * t / 6.0).exp();
    1.0 / ((1.0 + e) * (1.0 + e))
}

/// Travelling wave on `[-50, 50]²` with logistic reaction and no source.
pub fn example2() -> ProblemSpec {
    ProblemSpec {
        name: "wave".to_string(),
        domain: Rectangle::square(-50.0, 50.0),
        t_final: 1.0,
        diffusion: 1.0,
        reaction: 1.0,
        nonlinearity: Nonlinearity::PqProduct { p: 1.0, q: 1.0 },
        source: None,
        boundary: Arc::new(travelling_wave),
        initial: Arc::new(|x, y| travelling_wave(x, y, 0.0)),
        exact: Some(Arc::new(travelling_wave)),
    }
}

impl ProblemSpec {
    /// `"manufactured"` or `"wave"`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "manufactured" | "example1" => Ok(example1()),
            "wave" | "example2" => Ok(example2()),
            other => Err(Error::Config(format!(
                "unknown example '{other}' (expected manufactured or wave)"
            ))),
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        self.nonlinearity.eval(u)
    }

    pub fn initial_field(&self, grid: &SpaceGrid) -> Field {
        grid.sample(|x, y| (self.initial)(x, y))
    }

    /// `g(·, t)` on interior nodes; zero when there is no source.
    pub fn source_at(&self, grid: &SpaceGrid, t: f64) -> Field {
        match &self.source {
            Some(g) => grid.sample(|x, y| g(x, y, t)),
            None => Field::zeros(grid),
        }
    }

    /// Add `weight · g(·, t)` into `out`.
    pub fn add_source(&self, grid: &SpaceGrid, t: f64, weight: f64, out: &mut [f64]) {
        if let Some(g) = &self.source {
            for ((x, y), o) in grid.points().zip(out.iter_mut()) {
                *o += weight * g(x, y, t);
            }
        }
    }

    /// Source sampled at the step's collocation time `t^{n+β}`.
    pub fn source_at_shifted_time(&self, coeffs: &StepCoefficients, grid: &SpaceGrid) -> Field {
        self.source_at(grid, coeffs.t_eval)
    }

    pub fn exact_at(&self, grid: &SpaceGrid, t: f64) -> Option<Field> {
        self.exact.as_ref().map(|u| grid.sample(|x, y| u(x, y, t)))
    }

    /// Largest `|φ(x, y, 0) - u_0(x, y)|` over `samples` points on each edge.
    pub fn compatibility_defect(&self, samples: usize) -> f64 {
        let d = self.domain;
        let mut worst: f64 = 0.0;
        for k in 0..=samples {
            let s = k as f64 / samples.max(1) as f64;
            let x = d.x_min + s * (d.x_max - d.x_min);
            let y = d.y_min + s * (d.y_max - d.y_min);
            for (px, py) in [(x, d.y_min), (x, d.y_max), (d.x_min, y), (d.x_max, y)] {
                worst = worst.max(((self.boundary)(px, py, 0.0) - (self.initial)(px, py)).abs());
            }
        }
        worst
    }
}
