//! Pathwise (almost sure) rate checks and the adversarial-indicator demo.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::problems::Problem;
use crate::solvers::{Method, Workspace};

use super::{attempt_stream, exact_on_grid, sample_path_error, with_threads, ExperimentConfig, ReseedEvent};

/// Outcome of checking `error_m(omega) <= h_m^{exponent - margin}` along
/// coupled paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub levels: Vec<u32>,
    pub exponent: f64,
    pub margin: f64,
    /// Per path: the largest level `m` whose error exceeded the threshold.
    pub last_violation: Vec<Option<u32>>,
    /// Per level: fraction of paths above the threshold.
    pub violation_fraction: Vec<f64>,
    pub reseeds: Vec<ReseedEvent>,
}

impl RateReport {
    pub fn paths(&self) -> usize {
        self.last_violation.len()
    }

    pub fn finest_violation_fraction(&self) -> f64 {
        *self.violation_fraction.last().unwrap_or(&0.0)
    }

    /// Empirical distribution of the last violating level; `None` counts
    /// paths that never violated.
    pub fn last_violation_histogram(&self) -> BTreeMap<Option<u32>, usize> {
        let mut hist = BTreeMap::new();
        for v in &self.last_violation {
            *hist.entry(*v).or_insert(0) += 1;
        }
        hist
    }
}

/// Pathwise check on `h_m = 2^{-m}`, `m = n_min..=n_max`.
///
/// Path `omega` uses the stream of sample `omega` on every level. A singular
/// hit on any level re-seeds the whole path, keeping the levels coupled.
pub fn as_rate_check(config: &ExperimentConfig, exponent: f64, margin: f64) -> Result<RateReport> {
    config.validate()?;
    if !exponent.is_finite() || !(margin >= 0.0) {
        return Err(Error::domain(format!(
            "need a finite exponent and margin >= 0, got {exponent} and {margin}"
        )));
    }
    let problem = &config.problem;
    let levels: Vec<u32> = (config.n_min..=config.n_max).collect();
    let grids: Vec<TimeGrid> = levels
        .iter()
        .map(|&m| TimeGrid::dyadic(problem.final_time(), m))
        .collect::<Result<_>>()?;
    let exact: Vec<Vec<f64>> = grids.iter().map(|g| exact_on_grid(problem, g)).collect();
    let thresholds: Vec<f64> = grids.iter().map(|g| g.step().powf(exponent - margin)).collect();

    let per_path: Result<Vec<(Vec<bool>, Vec<ReseedEvent>)>> = with_threads(config.threads, || {
        (0..config.samples)
            .into_par_iter()
            .map_init(
                || (Workspace::new(problem.dim()), Vec::new()),
                |(ws, state), path| {
                    let mut events = Vec::new();
                    let mut attempt = 0;
                    'attempts: loop {
                        let mut flags = Vec::with_capacity(grids.len());
                        for (i, grid) in grids.iter().enumerate() {
                            let mut stream = attempt_stream(config.master_seed, path, attempt);
                            let stream = config.method.is_randomized().then_some(&mut stream);
                            match sample_path_error(problem, config.method, grid, &exact[i], stream, ws, state) {
                                Ok(e) => flags.push(e > thresholds[i]),
                                Err(e @ Error::Eval { .. }) if e.is_singular_hit() && attempt < config.max_reseeds => {
                                    let Error::Eval { t, .. } = e else { unreachable!() };
                                    attempt += 1;
                                    events.push(ReseedEvent {
                                        sample: path,
                                        h: grid.step(),
                                        attempt,
                                        t,
                                    });
                                    continue 'attempts;
                                }
                                Err(e) => {
                                    return Err(Error::Sample {
                                        sample: path,
                                        h: grid.step(),
                                        source: Box::new(e),
                                    })
                                }
                            }
                        }
                        return Ok((flags, events));
                    }
                },
            )
            .collect()
    })?;
    let per_path = per_path?;

    let paths = per_path.len() as f64;
    let mut counts = vec![0usize; levels.len()];
    let mut last_violation = Vec::with_capacity(per_path.len());
    let mut reseeds = Vec::new();
    for (flags, events) in per_path {
        for (c, &v) in counts.iter_mut().zip(&flags) {
            *c += usize::from(v);
        }
        last_violation.push(flags.iter().rposition(|&v| v).map(|i| levels[i]));
        reseeds.extend(events);
    }
    Ok(RateReport {
        levels,
        exponent,
        margin,
        last_violation,
        violation_fraction: counts.iter().map(|&c| c as f64 / paths).collect(),
        reseeds,
    })
}

/// Classical versus randomized Euler on the grid-node indicator field.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialReport {
    pub h: f64,
    pub classical_error: f64,
    pub samples: usize,
    /// Paths whose first draw sequence already gave error zero.
    pub zero_first_attempt: usize,
    /// Paths with error zero after re-seeding collisions.
    pub zero_after_reseed: usize,
    /// Largest randomized path error after re-seeding.
    pub randomized_max_error: f64,
    /// Paths whose draws landed on a grid node.
    pub collisions: Vec<ReseedEvent>,
}

/// Runs classical Euler once and randomized Euler on `samples` paths for
/// the indicator of the left nodes of the grid with step `h` on `[0, T]`.
pub fn adversarial_demo(
    final_time: f64,
    h: f64,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<AdversarialReport> {
    const MAX_RESEEDS: u32 = 3;
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let grid = TimeGrid::new(final_time, h)?;
    let problem = Problem::adversarial_indicator(grid)?;
    let exact = exact_on_grid(&problem, &grid);
    let mut ws = Workspace::new(1);
    let mut state = Vec::new();
    let classical_error = sample_path_error(
        &problem,
        Method::ClassicalEuler,
        &grid,
        &exact,
        None,
        &mut ws,
        &mut state,
    )?;

    let runs: Result<Vec<(f64, bool, Vec<ReseedEvent>)>> = with_threads(threads, || {
        (0..samples)
            .into_par_iter()
            .map_init(
                || (Workspace::new(1), Vec::new()),
                |(ws, state), m| {
                    let mut events = Vec::new();
                    let mut attempt = 0;
                    loop {
                        let mut stream = attempt_stream(seed, m, attempt);
                        let e = sample_path_error(
                            &problem,
                            Method::RandEuler,
                            &grid,
                            &exact,
                            Some(&mut stream),
                            ws,
                            state,
                        )?;
                        if e == 0.0 || attempt == MAX_RESEEDS {
                            return Ok((e, attempt == 0 && e == 0.0, events));
                        }
                        attempt += 1;
                        events.push(ReseedEvent {
                            sample: m,
                            h,
                            attempt,
                            t: f64::NAN,
                        });
                    }
                },
            )
            .collect()
    })?;
    let runs = runs?;
    let mut report = AdversarialReport {
        h,
        classical_error,
        samples,
        zero_first_attempt: 0,
        zero_after_reseed: 0,
        randomized_max_error: 0.0,
        collisions: Vec::new(),
    };
    for (e, first, events) in runs {
        report.zero_first_attempt += usize::from(first);
        report.zero_after_reseed += usize::from(e == 0.0);
        report.randomized_max_error = report.randomized_max_error.max(e);
        report.collisions.extend(events);
    }
    Ok(report)
}
