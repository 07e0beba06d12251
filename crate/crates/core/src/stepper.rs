//! Time marching for the fully discrete BDF-IMEX scheme.
//!
//! The first level `u^1` comes from an adaptive Dormand-Prince 5(4) integration
//! of the method-of-lines system
//!
//! ```text
//! du/dt = D (L u + bc(t)) + K f(u) + g(t)
//! ```
//!
//! and every later level solves
//!
//! ```text
//! (a_2 I - D b_1 L) u^{n+1} = -a_1 u^n - a_0 u^{n-1}
//!     + D b_0 (L u^n + bc(t^n)) + D b_1 bc(t^{n+1})
//!     + K f(c_1 u^n + c_0 u^{n-1}) + g(t^{n+β}).
//! ```

use std::io::Write;
use std::time::Instant;

use crate::coeffs::StepCoefficients;
use crate::error::{Error, Result};
use crate::linsolve::{solve, ShiftedOperator, Solution, SolverConfig};
use crate::problems::ProblemSpec;
use crate::spatial::{add_boundary_contribution, apply_laplacian_into, Field, SpaceGrid};
use crate::timegrid::TimeGrid;

/// Semi-discrete right-hand side `D (L u + bc(t)) + K f(u) + g(t)`.
pub fn mol_rhs(problem: &ProblemSpec, grid: &SpaceGrid, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
    apply_laplacian_into(grid, u, out)?;
    add_boundary_contribution(grid, |x, y, t| (problem.boundary)(x, y, t), t, 1.0, out)?;
    let d = problem.diffusion;
    let k = problem.reaction;
    for (o, &v) in out.iter_mut().zip(u) {
        *o = d * *o + k * problem.f(v);
    }
    problem.add_source(grid, t, 1.0, out);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for RkConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RkOutcome {
    pub field: Field,
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn weighted_rms(v: &[f64], scale: &[f64]) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().zip(scale).map(|(e, s)| (e / s).powi(2)).sum::<f64>() / n).sqrt()
}

/// Adaptive Dormand-Prince 5(4) integration of the method-of-lines system.
pub fn dopri5(
    problem: &ProblemSpec,
    grid: &SpaceGrid,
    t0: f64,
    t1: f64,
    u0: &[f64],
    config: &RkConfig,
) -> Result<RkOutcome> {
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let n = grid.len();
    if u0.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: u0.len(),
        });
    }
    let rhs = |t: f64, u: &[f64], out: &mut [f64]| mol_rhs(problem, grid, t, u, out);
    let (rtol, atol) = (config.rtol, config.atol);

    let mut y = u0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut scale = vec![0.0; n];

    rhs(t0, &y, &mut k[0])?;

    // starting step from the local Lipschitz estimate
    for (s, v) in scale.iter_mut().zip(&y) {
        *s = atol + rtol * v.abs();
    }
    let d0 = weighted_rms(&y, &scale);
    let d1 = weighted_rms(&k[0], &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(t1 - t0);
    for q in 0..n {
        stage[q] = y[q] + h0 * k[0][q];
    }
    rhs(t0 + h0, &stage, &mut y_new)?;
    for q in 0..n {
        err[q] = (y_new[q] - k[0][q]) / h0;
    }
    let d2 = weighted_rms(&err, &scale);
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1).min(t1 - t0);

    let mut t = t0;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut last_rejected = false;
    while t < t1 {
        if accepted + rejected >= config.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for q in 0..n {
                let mut acc = y[q];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[q];
                }
                stage[q] = acc;
            }
            rhs(t + C[s] * h, &stage, &mut k[s])?;
        }
        // stage 7 evaluated the fifth-order solution
        y_new.copy_from_slice(&stage);
        for q in 0..n {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[q];
            }
            err[q] = h * e;
            scale[q] = atol + rtol * y[q].abs().max(y_new[q].abs());
        }
        let error = weighted_rms(&err, &scale);
        if error <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            // first-same-as-last
            let k7 = std::mem::take(&mut k[6]);
            k[6] = std::mem::replace(&mut k[0], k7);
            accepted += 1;
            let mut fac = if error == 0.0 { 10.0 } else { 0.9 * error.powf(-0.2) };
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            rejected += 1;
            h *= (0.9 * error.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(RkOutcome {
        field: Field(y),
        accepted,
        rejected,
    })
}

/// `u^1` from `u^0` over `[t0, t1]` with tolerances `1e-10`.
pub fn rk_init(problem: &ProblemSpec, grid: &SpaceGrid, t0: f64, t1: f64, u0: &[f64]) -> Result<Field> {
    dopri5(problem, grid, t0, t1, u0, &RkConfig::default()).map(|o| o.field)
}

/// Two history levels of the multistep scheme.
#[derive(Debug, Clone)]
pub struct SchemeState {
    pub u_prev: Field,
    pub u_curr: Field,
    /// Index of `u_curr` on the time grid.
    pub n: usize,
}

/// Result of one BDF-IMEX step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub field: Field,
    pub solve: Solution,
}

/// Advance `(u^{n-1}, u^n)` to `u^{n+1}`. `coeffs` must be in absolute form
/// for the node triple ending at `t_next`.
#[allow(clippy::too_many_arguments)]
pub fn bdf_imex_step(
    problem: &ProblemSpec,
    grid: &SpaceGrid,
    u_prev: &[f64],
    u_curr: &[f64],
    t_curr: f64,
    t_next: f64,
    coeffs: &StepCoefficients,
    solver: &SolverConfig,
) -> Result<StepOutput> {
    let n = grid.len();
    for len in [u_prev.len(), u_curr.len()] {
        if len != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let [a0, a1, a2] = coeffs.a;
    let [b0, b1] = coeffs.b;
    let [c0, c1] = coeffs.c;
    let d = problem.diffusion;
    let k = problem.reaction;

    // D b_0 (L u^n + bc(t^n)) + D b_1 bc(t^{n+1})
    let mut rhs = vec![0.0; n];
    apply_laplacian_into(grid, u_curr, &mut rhs)?;
    let bc = |x: f64, y: f64, t: f64| (problem.boundary)(x, y, t);
    add_boundary_contribution(grid, bc, t_curr, 1.0, &mut rhs)?;
    for v in rhs.iter_mut() {
        *v *= d * b0;
    }
    add_boundary_contribution(grid, bc, t_next, d * b1, &mut rhs)?;

    for q in 0..n {
        let extrapolated = c1 * u_curr[q] + c0 * u_prev[q];
        rhs[q] += -a1 * u_curr[q] - a0 * u_prev[q] + k * problem.f(extrapolated);
    }
    problem.add_source(grid, coeffs.t_eval, 1.0, &mut rhs);

    let op = ShiftedOperator::new(a2, d * b1, grid)?;
    let solve = solve(&op, &rhs, u_curr, solver)?;
    Ok(StepOutput {
        field: solve.x.clone(),
        solve,
    })
}

impl SchemeState {
    /// Take one step on `tgrid` with the supplied coefficients and shift the history.
    pub fn advance(
        &mut self,
        problem: &ProblemSpec,
        grid: &SpaceGrid,
        tgrid: &TimeGrid,
        coeffs: &StepCoefficients,
        solver: &SolverConfig,
    ) -> Result<Solution> {
        let t = tgrid.nodes();
        let out = bdf_imex_step(
            problem,
            grid,
            &self.u_prev,
            &self.u_curr,
            t[self.n],
            t[self.n + 1],
            coeffs,
            solver,
        )?;
        self.u_prev = std::mem::replace(&mut self.u_curr, out.field);
        self.n += 1;
        Ok(out.solve)
    }
}

/// How the per-step coefficients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientPath {
    /// Uniform weights on uniform grids, per-step weights otherwise.
    #[default]
    Auto,
    /// Cached Δt-scaled weights; requires a uniform grid.
    Uniform,
    /// Per-step Vandermonde weights.
    Nonuniform,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrateOptions {
    pub solver: SolverConfig,
    pub path: CoefficientPath,
    pub rk: RkConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Level produced by this step.
    pub step: usize,
    pub t: f64,
    pub cg_iters: usize,
    pub residual: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rk_accepted: usize,
    pub rk_rejected: usize,
    pub steps: Vec<StepRecord>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn total_cg_iters(&self) -> usize {
        self.steps.iter().map(|s| s.cg_iters).sum()
    }

    /// CSV `step,t_n,cg_iters,residual`; timing is left out so reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, mut out: W, tag: &str) -> std::io::Result<()> {
        writeln!(
            out,
            "# run report {tag} rk_init accepted={} rejected={}",
            self.rk_accepted, self.rk_rejected
        )?;
        writeln!(out, "step,t_n,cg_iters,residual")?;
        for s in &self.steps {
            writeln!(out, "{},{:.17e},{},{:.6e}", s.step, s.t, s.cg_iters, s.residual)?;
        }
        out.flush()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: Field,
    pub report: RunReport,
}

/// March from the initial data to `t_M`.
pub fn integrate(
    problem: &ProblemSpec,
    tgrid: &TimeGrid,
    sgrid: &SpaceGrid,
    beta: f64,
    options: &IntegrateOptions,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let t = tgrid.nodes();
    let m = tgrid.steps();
    let use_uniform = match options.path {
        CoefficientPath::Auto => tgrid.is_uniform(),
        CoefficientPath::Uniform => {
            if !tgrid.is_uniform() {
                return Err(Error::InvalidParameter(
                    "uniform coefficient path requested on a graded grid".to_string(),
                ));
            }
            true
        }
        CoefficientPath::Nonuniform => false,
    };
    let cached = StepCoefficients::uniform(beta)?;
    let dt = tgrid.t_final() / m as f64;

    let u0 = problem.initial_field(sgrid);
    let rk = dopri5(problem, sgrid, t[0], t[1], &u0, &options.rk).map_err(|e| Error::StepFailed {
        step: 1,
        source: Box::new(e),
    })?;
    let mut report = RunReport {
        rk_accepted: rk.accepted,
        rk_rejected: rk.rejected,
        ..Default::default()
    };
    let mut state = SchemeState {
        u_prev: u0,
        u_curr: rk.field,
        n: 1,
    };
    while state.n < m {
        let n = state.n;
        let step_start = Instant::now();
        let wrap = |e: Error| Error::StepFailed {
            step: n + 1,
            source: Box::new(e),
        };
        let coeffs = if use_uniform {
            cached.for_uniform_step(t[n], dt)
        } else {
            StepCoefficients::nonuniform(t[n - 1], t[n], t[n + 1], beta).map_err(wrap)?
        };
        let solve = state
            .advance(problem, sgrid, tgrid, &coeffs, &options.solver)
            .map_err(wrap)?;
        report.steps.push(StepRecord {
            step: n + 1,
            t: t[n + 1],
            cg_iters: solve.iterations,
            residual: solve.residual,
            wall_seconds: step_start.elapsed().as_secs_f64(),
        });
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutcome {
        field: state.u_curr,
        report,
    })
}
