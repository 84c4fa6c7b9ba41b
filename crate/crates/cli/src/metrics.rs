use serde::{Deserialize, Serialize};
use synplan_core::sim::ExecutionTrace;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("trace has no tasks or tick records")]
    EmptyTrace,
    #[error("invalid grid: {0}")]
    Grid(String),
}

/// Latest measured end time.
pub fn metric_makespan(trace: &ExecutionTrace) -> Result<f64, MetricError> {
    trace.makespan().ok_or(MetricError::EmptyTrace)
}

/// `0, step, 2 step, ...` up to and including `d_max`.
pub fn distance_grid(d_max: f64, step: f64) -> Vec<f64> {
    let n = (d_max / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    if d_max - g[n] > 1e-9 {
        g.push(d_max);
    }
    g
}

fn check_grid(grid: &[f64]) -> Result<(), MetricError> {
    if grid.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(MetricError::Grid("points must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(MetricError::Grid("points must be sorted".into()));
    }
    Ok(())
}

/// Fraction of sorted `samples` that are `<= d`, at each grid point.
fn empirical_cdf(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&d| sorted.partition_point(|&x| x <= d) as f64 / sorted.len() as f64)
        .collect()
}

fn sorted_separations(trace: &ExecutionTrace) -> Result<Vec<f64>, MetricError> {
    if trace.ticks.is_empty() {
        return Err(MetricError::EmptyTrace);
    }
    let mut s: Vec<f64> = trace.ticks.iter().map(|t| t.separation).collect();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Per-tick separation CDF of each run, averaged over runs.
pub fn metric_distance_cdf(traces: &[ExecutionTrace], grid: &[f64]) -> Result<Vec<f64>, MetricError> {
    if traces.is_empty() {
        return Err(MetricError::EmptyTrace);
    }
    check_grid(grid)?;
    let mut acc = vec![0.0; grid.len()];
    for t in traces {
        for (a, p) in acc.iter_mut().zip(empirical_cdf(&sorted_separations(t)?, grid)) {
            *a += p;
        }
    }
    Ok(acc.into_iter().map(|a| a / traces.len() as f64).collect())
}

/// Smallest separation of each run.
pub fn run_minima(traces: &[ExecutionTrace]) -> Result<Vec<f64>, MetricError> {
    traces
        .iter()
        .map(|t| sorted_separations(t).map(|s| s[0]))
        .collect()
}

/// Distribution over runs of the per-run minimum separation.
pub fn metric_dmin_cdf(traces: &[ExecutionTrace], grid: &[f64]) -> Result<Vec<f64>, MetricError> {
    if traces.is_empty() {
        return Err(MetricError::EmptyTrace);
    }
    check_grid(grid)?;
    let mut minima = run_minima(traces)?;
    minima.sort_by(f64::total_cmp);
    Ok(empirical_cdf(&minima, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// `None` for an empty slice.
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        Some(Self {
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use synplan_core::sim::{MeasuredTask, TickRecord};

    fn trace(ends: &[f64], seps: &[f64]) -> ExecutionTrace {
        ExecutionTrace {
            seed: 0,
            dt: 0.05,
            robots: vec![1],
            tasks: ends
                .iter()
                .map(|&e| MeasuredTask {
                    agent: 0,
                    start: 0.0,
                    end: e,
                })
                .collect(),
            human_idle: vec![],
            ticks: seps
                .iter()
                .enumerate()
                .map(|(k, &s)| TickRecord {
                    time: k as f64 * 0.05,
                    human: [0.0, 0.0],
                    tools: vec![[s, 0.0]],
                    separation: s,
                    scales: vec![1.0],
                })
                .collect(),
        }
    }

    #[test]
    fn makespan_is_latest_end() {
        assert_eq!(metric_makespan(&trace(&[4.2], &[1.0])), Ok(4.2));
        assert_eq!(metric_makespan(&trace(&[3.0, 7.0, 5.0], &[1.0])), Ok(7.0));
        assert_eq!(metric_makespan(&trace(&[], &[])), Err(MetricError::EmptyTrace));
    }

    #[test]
    fn cdf_examples() {
        let far = trace(&[1.0], &[3.5, 4.0]);
        assert_eq!(metric_distance_cdf(&[far], &[0.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        let inside = trace(&[1.0], &[0.5, 3.0]);
        assert_eq!(metric_distance_cdf(&[inside], &[3.0]).unwrap(), vec![1.0]);
        let two = trace(&[1.0], &[1.0, 3.0]);
        assert_eq!(metric_distance_cdf(&[two], &[2.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn cdf_averages_runs() {
        let a = trace(&[1.0], &[1.0, 1.0]);
        let b = trace(&[1.0], &[1.0, 3.0, 3.0, 3.0]);
        assert_eq!(metric_distance_cdf(&[a, b], &[2.0]).unwrap(), vec![0.625]);
    }

    #[test]
    fn dmin_cdf_uses_run_minima() {
        let a = trace(&[1.0], &[0.4, 2.0]);
        let b = trace(&[1.0], &[1.5, 2.5]);
        assert_eq!(metric_dmin_cdf(&[a, b], &[0.0, 0.5, 1.5, 3.0]).unwrap(), vec![0.0, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert_eq!(metric_distance_cdf(&[], &[1.0]), Err(MetricError::EmptyTrace));
        let t = trace(&[1.0], &[]);
        assert_eq!(metric_distance_cdf(&[t], &[1.0]), Err(MetricError::EmptyTrace));
        let t = trace(&[1.0], &[1.0]);
        assert!(matches!(metric_distance_cdf(&[t], &[2.0, 1.0]), Err(MetricError::Grid(_))));
    }

    #[test]
    fn grid_covers_range() {
        let g = distance_grid(3.0, 0.05);
        assert_eq!(g.len(), 61);
        assert_eq!(g[0], 0.0);
        assert!((g[60] - 3.0).abs() < 1e-12);
        assert_eq!(distance_grid(1.0, 0.3), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
    }

    #[test]
    fn stats_of_values() {
        let s = Stats::of(&[2.0, 4.0, 9.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max), (5.0, 2.0, 9.0));
        assert!(Stats::of(&[]).is_none());
    }
}
