//! Error norms at the final time, observed orders and refinement sweeps.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::spatial::SpaceGrid;
use crate::stepper::{integrate, IntegrateOptions};
use crate::timegrid::GridKind;

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: b.len(),
            found: a.len(),
        })
    }
}

/// `max |u - U|` over interior nodes.
pub fn linf_error(numeric: &[f64], exact: &[f64]) -> Result<f64> {
    check_pair(numeric, exact)?;
    Ok(numeric
        .iter()
        .zip(exact)
        .map(|(u, e)| (u - e).abs())
        .fold(0.0, f64::max))
}

/// `sqrt(h_x h_y Σ |u - U|²)` over interior nodes.
pub fn l2_error(numeric: &[f64], exact: &[f64], grid: &SpaceGrid) -> Result<f64> {
    check_pair(numeric, exact)?;
    if numeric.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            found: numeric.len(),
        });
    }
    let sum: f64 = numeric.iter().zip(exact).map(|(u, e)| (u - e) * (u - e)).sum();
    Ok((grid.hx() * grid.hy() * sum).sqrt())
}

/// `log2(coarse / fine)`; `None` unless both errors are positive and finite.
pub fn observed_order(err_coarse: f64, err_fine: f64) -> Option<f64> {
    let ok = |e: f64| e > 0.0 && e.is_finite();
    if ok(err_coarse) && ok(err_fine) {
        Some((err_coarse / err_fine).log2())
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Temporal,
    Spatial,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Temporal => "temporal",
            SweepAxis::Spatial => "spatial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// `M` for temporal sweeps, `N = N_x = N_y` for spatial sweeps.
    pub param: usize,
    pub linf: f64,
    pub l2: f64,
    pub order_inf: Option<f64>,
    pub order_2: Option<f64>,
    pub cg_iters: usize,
    /// Set when the run for this row failed; errors are NaN then.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub axis: SweepAxis,
    pub example: String,
    pub beta: f64,
    pub grid_kind: GridKind,
    /// The parameter held fixed (`N` for temporal sweeps, `M` for spatial).
    pub fixed: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Build a table from `(param, linf, l2)` triples, filling in orders.
    pub fn from_errors(
        axis: SweepAxis,
        example: &str,
        beta: f64,
        grid_kind: GridKind,
        fixed: usize,
        errors: &[(usize, f64, f64)],
    ) -> Self {
        let mut rows: Vec<ConvergenceRow> = errors
            .iter()
            .map(|&(param, linf, l2)| ConvergenceRow {
                param,
                linf,
                l2,
                order_inf: None,
                order_2: None,
                cg_iters: 0,
                failure: None,
            })
            .collect();
        fill_orders(&mut rows);
        Self {
            axis,
            example: example.to_string(),
            beta,
            grid_kind,
            fixed,
            rows,
        }
    }

    pub fn last(&self) -> Option<&ConvergenceRow> {
        self.rows.last()
    }

    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.failure.is_some())
    }

    pub fn describe(&self) -> String {
        format!(
            "axis={} example={} beta={} grid={} fixed={}",
            self.axis.as_str(),
            self.example,
            self.beta,
            self.grid_kind.label(),
            self.fixed
        )
    }

    /// CSV with header `param,Linf,order_inf,L2,order_2`, preceded by one
    /// comment line describing the sweep and `tag`.
    pub fn write_csv<W: Write>(&self, mut out: W, tag: &str) -> std::io::Result<()> {
        writeln!(out, "# convergence {} {tag}", self.describe())?;
        writeln!(out, "param,Linf,order_inf,L2,order_2")?;
        let fmt = |o: Option<f64>| o.map(|v| format!("{v:.6}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.6e},{},{:.6e},{}",
                r.param,
                r.linf,
                fmt(r.order_inf),
                r.l2,
                fmt(r.order_2)
            )?;
        }
        out.flush()
    }

    /// Plot companion: `log2(param)` against `log10` errors plus a slope-2
    /// reference anchored at the first row's `L∞`.
    pub fn write_plot_data<W: Write>(&self, mut out: W, tag: &str) -> std::io::Result<()> {
        writeln!(out, "# plot data {} {tag}", self.describe())?;
        writeln!(out, "log2_param,log10_Linf,log10_L2,log10_slope2")?;
        let Some(first) = self.rows.first() else {
            return out.flush();
        };
        for r in &self.rows {
            let ratio = first.param as f64 / r.param as f64;
            let reference = first.linf * ratio * ratio;
            writeln!(
                out,
                "{:.6},{:.6},{:.6},{:.6}",
                (r.param as f64).log2(),
                r.linf.log10(),
                r.l2.log10(),
                reference.log10()
            )?;
        }
        out.flush()
    }
}

fn fill_orders(rows: &mut [ConvergenceRow]) {
    for k in 1..rows.len() {
        let (coarse, fine) = (rows[k - 1].clone(), &mut rows[k]);
        fine.order_inf = observed_order(coarse.linf, fine.linf);
        fine.order_2 = observed_order(coarse.l2, fine.l2);
    }
}

/// Problem plus scheme settings shared by every row of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub problem: ProblemSpec,
    pub beta: f64,
    pub grid_kind: GridKind,
    pub options: IntegrateOptions,
    /// Rows run concurrently on this many threads.
    pub workers: usize,
}

fn check_doubling(list: &[usize]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::InvalidParameter("sweep list is empty".to_string()));
    }
    for w in list.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::InvalidParameter(format!(
                "sweep list must double at each entry, found {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// Final-time errors of one run.
pub fn run_errors(spec: &SweepSpec, steps: usize, n: usize) -> Result<(f64, f64, usize)> {
    let p = &spec.problem;
    let tgrid = spec.grid_kind.build(p.t_final, steps)?;
    let sgrid = SpaceGrid::new(p.domain, n, n)?;
    let out = integrate(p, &tgrid, &sgrid, spec.beta, &spec.options)?;
    let exact = p.exact_at(&sgrid, p.t_final).ok_or(Error::NoExactSolution)?;
    Ok((
        linf_error(&out.field, &exact)?,
        l2_error(&out.field, &exact, &sgrid)?,
        out.report.total_cg_iters(),
    ))
}

fn sweep(spec: &SweepSpec, axis: SweepAxis, list: &[usize], fixed: usize) -> Result<ConvergenceTable> {
    check_doubling(list)?;
    if spec.problem.exact.is_none() {
        return Err(Error::NoExactSolution);
    }
    let run = |param: usize| {
        let result = match axis {
            SweepAxis::Temporal => run_errors(spec, param, fixed),
            SweepAxis::Spatial => run_errors(spec, fixed, param),
        };
        match result {
            Ok((linf, l2, cg_iters)) => ConvergenceRow {
                param,
                linf,
                l2,
                order_inf: None,
                order_2: None,
                cg_iters,
                failure: None,
            },
            Err(e) => ConvergenceRow {
                param,
                linf: f64::NAN,
                l2: f64::NAN,
                order_inf: None,
                order_2: None,
                cg_iters: 0,
                failure: Some(e.to_string()),
            },
        }
    };
    let mut rows: Vec<ConvergenceRow> = if spec.workers <= 1 {
        list.iter().map(|&p| run(p)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| list.par_iter().map(|&p| run(p)).collect())
    };
    fill_orders(&mut rows);
    Ok(ConvergenceTable {
        axis,
        example: spec.problem.name.clone(),
        beta: spec.beta,
        grid_kind: spec.grid_kind,
        fixed,
        rows,
    })
}

/// Refine `M` over `steps_list` at fixed `N_x = N_y = n`.
pub fn temporal_sweep(spec: &SweepSpec, steps_list: &[usize], n: usize) -> Result<ConvergenceTable> {
    sweep(spec, SweepAxis::Temporal, steps_list, n)
}

/// Refine `N_x = N_y` over `n_list` at fixed `M = steps`.
pub fn spatial_sweep(spec: &SweepSpec, n_list: &[usize], steps: usize) -> Result<ConvergenceTable> {
    sweep(spec, SweepAxis::Spatial, n_list, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::example1;
    use crate::spatial::Rectangle;

    #[test]
    fn norms_on_simple_pairs() {
        let g = SpaceGrid::new(Rectangle::square(0.0, 1.0), 4, 4).unwrap();
        let a = vec![1.0; g.len()];
        assert_eq!(linf_error(&a, &a).unwrap(), 0.0);
        assert_eq!(l2_error(&a, &a, &g).unwrap(), 0.0);
        let b = vec![1.5; g.len()];
        assert_eq!(linf_error(&a, &b).unwrap(), 0.5);
        let expected = 0.5 * (g.hx() * g.hy() * 9.0f64).sqrt();
        assert!((l2_error(&a, &b, &g).unwrap() - expected).abs() < 1e-15);
        assert!(linf_error(&a, &b[..3]).is_err());
    }

    #[test]
    fn order_values() {
        assert!((observed_order(4e-3, 1e-3).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(observed_order(1e-3, 1e-3).unwrap(), 0.0);
        assert!(observed_order(0.0, 1e-3).is_none());
        assert!(observed_order(1e-3, -1.0).is_none());
    }

    #[test]
    fn synthetic_second_order_fixture() {
        let errors: Vec<(usize, f64, f64)> = [10usize, 20, 40, 80]
            .iter()
            .map(|&m| {
                let e = 3.0 / (m * m) as f64;
                (m, e, 0.5 * e)
            })
            .collect();
        let t = ConvergenceTable::from_errors(SweepAxis::Temporal, "synthetic", 2.0, GridKind::Uniform, 64, &errors);
        assert!(t.rows[0].order_inf.is_none() && t.rows[0].order_2.is_none());
        for r in &t.rows[1..] {
            assert!((r.order_inf.unwrap() - 2.0).abs() < 1e-12);
            assert!((r.order_2.unwrap() - 2.0).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf, "x").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "param,Linf,order_inf,L2,order_2");
        assert!(lines[2].starts_with("10,") && lines[2].contains(",,"));
        let mut buf = Vec::new();
        t.write_plot_data(&mut buf, "x").unwrap();
        let text = String::from_utf8(buf).unwrap();
        // the reference line coincides with the data for an exact second-order model
        for line in text.lines().skip(2) {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert!((v[1] - v[3]).abs() < 1e-5);
        }
    }

    #[test]
    fn single_row_has_no_orders() {
        let t = ConvergenceTable::from_errors(SweepAxis::Spatial, "s", 2.0, GridKind::Uniform, 100, &[(8, 1e-2, 1e-2)]);
        assert!(t.last().unwrap().order_inf.is_none());
    }

    #[test]
    fn rejects_non_doubling_lists() {
        let spec = SweepSpec {
            problem: example1(),
            beta: 2.0,
            grid_kind: GridKind::Uniform,
            options: IntegrateOptions::default(),
            workers: 1,
        };
        assert!(temporal_sweep(&spec, &[10, 30], 8).is_err());
        assert!(spatial_sweep(&spec, &[], 8).is_err());
    }

    #[test]
    fn failing_row_is_marked() {
        let spec = SweepSpec {
            problem: example1(),
            beta: 2.0,
            grid_kind: GridKind::Uniform,
            options: IntegrateOptions {
                solver: crate::linsolve::SolverConfig {
                    max_iter: Some(1),
                    tol: 1e-14,
                    ..Default::default()
                },
                ..Default::default()
            },
            workers: 1,
        };
        let t = temporal_sweep(&spec, &[4, 8], 16).unwrap();
        assert!(t.failed());
        assert!(t.rows[0].failure.as_ref().unwrap().contains("did not converge"));
    }

    #[test]
    fn small_sweep_is_deterministic_across_workers() {
        let mut spec = SweepSpec {
            problem: example1(),
            beta: 2.0,
            grid_kind: GridKind::Graded { gamma: 0.75 },
            options: IntegrateOptions::default(),
            workers: 1,
        };
        let serial = temporal_sweep(&spec, &[4, 8, 16], 12).unwrap();
        spec.workers = 3;
        let parallel = temporal_sweep(&spec, &[4, 8, 16], 12).unwrap();
        assert_eq!(serial, parallel);
    }
}
