//! Log-minima traces of flowed lattices, trace-vs-template comparison, and
//! occupation profiles. Per-sample minima computations are independent, so
//! the sampling loops are data-parallel; results are ordered by sample
//! index regardless of scheduling. The `parallel` feature selects rayon;
//! the sequential implementations remain available for benchmarking.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::minima::{first_minimum, successive_minima_with_budget, DEFAULT_BUDGET};
use crate::path::PiecewisePath;
use crate::rational::{rat_from_f64, rat_to_f64};

/// Sampled successive minima of `a_t x` along an increasing time grid,
/// with natural logs (the log-minima function of the lattice).
#[derive(Debug, Clone)]
pub struct MinimaTrace {
    pub d: usize,
    pub times: Vec<f64>,
    pub minima: Vec<Vec<f64>>,
    pub log_minima: Vec<Vec<f64>>,
}

/// Uniform grid `0, dt, 2 dt, ..., <= t_max` (inclusive when divisible).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !(dt > 0.0) {
        return Err(Error::Domain(format!(
            "grid requires t_max > 0 and dt > 0, got t_max={t_max}, dt={dt}"
        )));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

fn sample_minima(x: &Lattice, t: f64, budget: u128) -> Result<Vec<f64>> {
    let flowed = x.apply_flow(t).map_err(|e| match e {
        Error::FlowRange { t, max_t } => Error::FlowRange { t, max_t },
        other => other,
    })?;
    successive_minima_with_budget(&flowed, budget)
        .map_err(|e| Error::Domain(format!("minima at t = {t}: {e}")))
}

fn check_trace_invariants(times: &[f64], minima: &[Vec<f64>]) -> Result<()> {
    for (t, row) in times.iter().zip(minima) {
        if row.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invariant(format!(
                "minima at t = {t} are not sorted: {row:?}"
            )));
        }
        let d = row.len();
        let product: f64 = row.iter().product();
        let lower = 1.0 / (1..=d).map(|i| i as f64).product::<f64>();
        if product < lower * (1.0 - 1e-6) || product > 1.0 + 1e-6 {
            return Err(Error::Invariant(format!(
                "Minkowski bounds violated at t = {t}: product = {product}, \
                 expected within [{lower}, 1]"
            )));
        }
    }
    Ok(())
}

fn assemble_trace(d: usize, times: Vec<f64>, minima: Vec<Vec<f64>>) -> Result<MinimaTrace> {
    check_trace_invariants(&times, &minima)?;
    let log_minima = minima
        .iter()
        .map(|row| row.iter().map(|v| v.ln()).collect())
        .collect();
    Ok(MinimaTrace {
        d,
        times,
        minima,
        log_minima,
    })
}

/// Log-minima trace over an explicit grid; parallel across samples when the
/// `parallel` feature is enabled.
pub fn log_minima_trace(x: &Lattice, grid: &[f64], budget: u128) -> Result<MinimaTrace> {
    if grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    #[cfg(feature = "parallel")]
    let minima = grid
        .par_iter()
        .map(|&t| sample_minima(x, t, budget))
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let minima = grid
        .iter()
        .map(|&t| sample_minima(x, t, budget))
        .collect::<Result<Vec<_>>>()?;
    assemble_trace(x.dims().d_usize(), grid.to_vec(), minima)
}

/// Single-threaded variant kept for benchmarking against the parallel path.
pub fn log_minima_trace_sequential(x: &Lattice, grid: &[f64], budget: u128) -> Result<MinimaTrace> {
    if grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let minima = grid
        .iter()
        .map(|&t| sample_minima(x, t, budget))
        .collect::<Result<Vec<_>>>()?;
    assemble_trace(x.dims().d_usize(), grid.to_vec(), minima)
}

/// Sup distance of a trace window against a template.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct WindowSup {
    pub t_start: f64,
    pub t_end: f64,
    pub sup: f64,
}

/// Comparison of a sampled trace against a piecewise-linear path: the
/// global sup of the max-coordinate gap, plus per-window sups that reveal
/// growth trends. Bounded window sups over a finite horizon are evidence
/// toward equivalence, never proof.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TraceComparison {
    pub sup_dist: f64,
    pub window_width: f64,
    pub windows: Vec<WindowSup>,
}

pub fn compare_trace_to_template(
    trace: &MinimaTrace,
    template: &PiecewisePath,
    window_width: f64,
) -> Result<TraceComparison> {
    if template.dims().d_usize() != trace.d {
        return Err(Error::Domain(format!(
            "trace dimension {} does not match template dimension {}",
            trace.d,
            template.dims().d()
        )));
    }
    if !(window_width > 0.0) {
        return Err(Error::Domain("window width must be positive".into()));
    }
    let end = rat_to_f64(template.end());
    let mut windows: Vec<WindowSup> = Vec::new();
    let mut sup_dist = 0.0f64;
    for (t, logs) in trace.times.iter().zip(&trace.log_minima) {
        let tr = rat_from_f64(*t)?;
        if !template.contains_time(&tr) {
            return Err(Error::Domain(format!(
                "trace time {t} outside template domain [0, {end}]"
            )));
        }
        let f = template.eval(&tr)?;
        let gap = logs
            .iter()
            .zip(&f)
            .map(|(l, fv)| (l - rat_to_f64(fv)).abs())
            .fold(0.0, f64::max);
        sup_dist = sup_dist.max(gap);
        let w = (t / window_width).floor() as usize;
        while windows.len() <= w {
            let i = windows.len();
            windows.push(WindowSup {
                t_start: i as f64 * window_width,
                t_end: (i + 1) as f64 * window_width,
                sup: 0.0,
            });
        }
        windows[w].sup = windows[w].sup.max(gap);
    }
    Ok(TraceComparison {
        sup_dist,
        window_width,
        windows,
    })
}

/// Fraction of sampled times whose first log-minimum stays at or above a
/// threshold: the finite-horizon occupation of the compact part of the
/// space. A fraction drifting to zero as the horizon grows is the
/// divergence-on-average diagnostic.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OccupationProfile {
    pub threshold: f64,
    pub horizon: f64,
    pub dt: f64,
    pub samples: usize,
    pub count_above: usize,
    pub fraction: f64,
}

fn occupation_from_logs(threshold: f64, horizon: f64, dt: f64, logs: Vec<f64>) -> OccupationProfile {
    let samples = logs.len();
    let count_above = logs.iter().filter(|l| **l >= threshold).count();
    OccupationProfile {
        threshold,
        horizon,
        dt,
        samples,
        count_above,
        fraction: count_above as f64 / samples as f64,
    }
}

fn sample_log_lambda1(x: &Lattice, t: f64, budget: u128) -> Result<f64> {
    let flowed = x.apply_flow(t)?;
    Ok(first_minimum(&flowed, budget)
        .map_err(|e| Error::Domain(format!("minima at t = {t}: {e}")))?
        .ln())
}

pub fn occupation_fraction(
    x: &Lattice,
    t_max: f64,
    threshold: f64,
    dt: f64,
) -> Result<OccupationProfile> {
    let grid = time_grid(t_max, dt)?;
    #[cfg(feature = "parallel")]
    let logs = grid
        .par_iter()
        .map(|&t| sample_log_lambda1(x, t, DEFAULT_BUDGET))
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let logs = grid
        .iter()
        .map(|&t| sample_log_lambda1(x, t, DEFAULT_BUDGET))
        .collect::<Result<Vec<_>>>()?;
    Ok(occupation_from_logs(threshold, t_max, dt, logs))
}

/// Single-threaded variant kept for benchmarking against the parallel path.
pub fn occupation_fraction_sequential(
    x: &Lattice,
    t_max: f64,
    threshold: f64,
    dt: f64,
) -> Result<OccupationProfile> {
    let grid = time_grid(t_max, dt)?;
    let logs = grid
        .iter()
        .map(|&t| sample_log_lambda1(x, t, DEFAULT_BUDGET))
        .collect::<Result<Vec<_>>>()?;
    Ok(occupation_from_logs(threshold, t_max, dt, logs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::Dims;
    use crate::rational::rat;

    fn d11() -> Dims {
        Dims::new(1, 1).unwrap()
    }

    #[test]
    fn z2_trace_is_linear_in_t() {
        let x = Lattice::zd(d11());
        let trace = log_minima_trace(&x, &[0.0, 1.0, 2.0], DEFAULT_BUDGET).unwrap();
        let expect = [[0.0, 0.0], [-1.0, 1.0], [-2.0, 2.0]];
        for (row, exp) in trace.log_minima.iter().zip(expect) {
            for (a, b) in row.iter().zip(exp) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn single_point_grid_matches_static_minima() {
        let x = Lattice::zd(Dims::new(2, 1).unwrap());
        let trace = log_minima_trace(&x, &[0.0], DEFAULT_BUDGET).unwrap();
        assert_eq!(trace.minima[0], crate::minima::successive_minima(&x).unwrap());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let x = Lattice::from_theta(d11(), &[0.618033988749895]).unwrap();
        let grid = time_grid(5.0, 0.5).unwrap();
        let a = log_minima_trace(&x, &grid, DEFAULT_BUDGET).unwrap();
        let b = log_minima_trace_sequential(&x, &grid, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.minima, b.minima);
    }

    #[test]
    fn self_comparison_is_zero() {
        // Compare the Z^3 trace under (2,1) against the degenerate path
        // t -> (-t, t/2, t/2), which tracks it exactly.
        let dims = Dims::new(2, 1).unwrap();
        let x = Lattice::zd(dims);
        let grid = time_grid(10.0, 0.25).unwrap();
        let trace = log_minima_trace(&x, &grid, DEFAULT_BUDGET).unwrap();
        let path = PiecewisePath::new(
            dims,
            vec![rat(0), rat(10)],
            vec![
                vec![rat(0), rat(0), rat(0)],
                vec![rat(-10), rat(5), rat(5)],
            ],
        )
        .unwrap();
        let cmp = compare_trace_to_template(&trace, &path, 2.5).unwrap();
        assert!(cmp.sup_dist <= 1e-9, "sup_dist = {}", cmp.sup_dist);
        assert_eq!(cmp.windows.len(), 5);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = Lattice::zd(d11());
        let trace = log_minima_trace(&x, &[0.0, 1.0], DEFAULT_BUDGET).unwrap();
        let path = PiecewisePath::zero(Dims::new(2, 1).unwrap(), rat(5)).unwrap();
        assert!(compare_trace_to_template(&trace, &path, 1.0).is_err());
    }

    #[test]
    fn z2_occupation_near_one_tenth() {
        let x = Lattice::zd(d11());
        let prof = occupation_fraction(&x, 10.0, -1.0, 0.01).unwrap();
        assert_eq!(prof.samples, 1001);
        assert!((prof.fraction - 0.1).abs() <= 0.01, "{}", prof.fraction);
        // A threshold below the minimum gives fraction 1.
        let all = occupation_fraction(&x, 10.0, -11.0, 0.5).unwrap();
        assert_eq!(all.fraction, 1.0);
    }

    #[test]
    fn grid_rejects_bad_steps() {
        assert!(time_grid(10.0, 0.0).is_err());
        assert!(time_grid(0.0, 0.1).is_err());
    }
}
