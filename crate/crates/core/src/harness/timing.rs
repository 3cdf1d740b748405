//! Wall-clock cost of reaching a target accuracy.

use std::hint::black_box;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::problems::Problem;
use crate::solvers::{Method, Workspace};

use super::{attempt_stream, exact_on_grid, mc_lp_error, sample_path_error, ExperimentConfig};

/// Median wall time of one solve (one sample path) at step size `h`, after
/// one untimed warm-up run.
pub fn median_solve_time(problem: &Problem, method: Method, h: f64, repeats: usize) -> Result<Duration> {
    let grid = TimeGrid::new(problem.final_time(), h)?;
    let exact = exact_on_grid(problem, &grid);
    let mut ws = Workspace::new(problem.dim());
    let mut state = Vec::new();
    let mut run = |i: usize| -> Result<f64> {
        let mut stream = attempt_stream(0, i, 0);
        let stream = method.is_randomized().then_some(&mut stream);
        sample_path_error(problem, method, &grid, &exact, stream, &mut ws, &mut state)
    };
    black_box(run(usize::MAX)?);
    let mut times = Vec::with_capacity(repeats.max(1));
    for i in 0..repeats.max(1) {
        let start = Instant::now();
        black_box(run(i)?);
        times.push(start.elapsed());
    }
    times.sort();
    Ok(times[times.len() / 2])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPoint {
    pub method: Method,
    pub level: u32,
    pub error: f64,
    pub time: Duration,
}

/// Coarsest `h = 2^{-n}`, `n` in `config.n_min..=config.n_max`, whose
/// `L^p` error is at most `target`, and the median time of one solve there.
pub fn time_to_accuracy(config: &ExperimentConfig, target: f64) -> Result<CostPoint> {
    config.validate()?;
    for n in config.n_min..=config.n_max {
        let h = (-(n as f64)).exp2();
        let est = mc_lp_error(config, h)?;
        if est.error <= target {
            return Ok(CostPoint {
                method: config.method,
                level: n,
                error: est.error,
                time: median_solve_time(&config.problem, config.method, h, 5)?,
            });
        }
    }
    Err(Error::domain(format!(
        "{} does not reach error {target} for n <= {}",
        config.method, config.n_max
    )))
}
