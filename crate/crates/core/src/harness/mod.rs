//! Monte Carlo error estimation and convergence studies.
//!
//! Sample `m` of an experiment always uses stream index `m`. In
//! [`run_convergence`] every step size gets its own master seed derived from
//! `(master_seed, h)`, so the levels are independent of each other. The
//! pathwise check in [`as_rate_check`] instead reuses the stream of sample
//! `m` on every level, which couples the paths across step sizes.
//!
//! Per-sample results are stored by sample index and reduced in index order,
//! so every estimate is bit-identical for any number of worker threads.

mod constants;
mod fit;
mod quad;
mod rate;
mod timing;

pub use constants::{apriori_bound, apriori_sup_bound, error_constants, ConstantInputs, ConstantReport};
pub use fit::{fit_loglog, fit_order, OrderFit};
pub use quad::{quadrature_bias, quadrature_lp_error, BiasReport};
pub use rate::{adversarial_demo, as_rate_check, AdversarialReport, RateReport};
pub use timing::{median_solve_time, time_to_accuracy, CostPoint};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::distance;
use crate::grid::TimeGrid;
use crate::problems::Problem;
use crate::rng::{mix_seed, RandomStream};
use crate::solvers::{integrate, Method, Thetas, Trajectory, Workspace};

const RESEED_SALT: u64 = 0x5eed_a11e_c0ff_ee00;

/// Settings shared by all Monte Carlo experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub method: Method,
    /// Moment of the `L^p(Omega)` error.
    pub p: f64,
    pub samples: usize,
    /// Step sizes `h = 2^{-n}` for `n` in `n_min..=n_max`.
    pub n_min: u32,
    pub n_max: u32,
    pub master_seed: u64,
    /// Worker threads; `0` uses the global rayon pool.
    pub threads: usize,
    /// Re-seed attempts per sample after a hit on a singular abscissa.
    pub max_reseeds: u32,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, method: Method) -> Self {
        Self {
            problem,
            method,
            p: 2.0,
            samples: 1000,
            n_min: 3,
            n_max: 12,
            master_seed: 42,
            threads: 0,
            max_reseeds: 3,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_levels(mut self, n_min: u32, n_max: u32) -> Self {
        self.n_min = n_min;
        self.n_max = n_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::domain(format!("p must be a finite number >= 2, got {}", self.p)));
        }
        if self.samples < 2 {
            return Err(Error::domain(format!("need at least 2 samples, got {}", self.samples)));
        }
        if self.n_min == 0 || self.n_min >= self.n_max {
            return Err(Error::domain(format!(
                "need 1 <= n-min < n-max, got n-min = {} and n-max = {}",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > 30 {
            return Err(Error::domain(format!(
                "n-max = {} is too fine (at most 30)",
                self.n_max
            )));
        }
        Ok(())
    }

    pub fn step_sizes(&self) -> impl Iterator<Item = f64> {
        (self.n_min..=self.n_max).map(|n| (-(n as f64)).exp2())
    }
}

/// A sample that hit a singular abscissa and was redrawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReseedEvent {
    pub sample: usize,
    pub h: f64,
    pub attempt: u32,
    pub t: f64,
}

/// `L^p(Omega)` estimate of the path-maximum error at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct LpEstimate {
    pub h: f64,
    pub error: f64,
    /// Sample standard deviation of `e^p`, mapped to the scale of the
    /// `p`-th root by the delta method.
    pub sample_std: f64,
    pub samples: usize,
    pub reseeds: Vec<ReseedEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub error: f64,
    pub sample_std: f64,
    pub samples: usize,
}

impl ConvergenceRow {
    /// `n` with `h = 2^{-n}`.
    pub fn level(&self) -> f64 {
        -self.h.log2()
    }

    pub fn std_error(&self) -> f64 {
        self.sample_std / (self.samples as f64).sqrt()
    }
}

/// Error estimates per step size, sorted by decreasing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub problem: String,
    pub method: Method,
    pub p: f64,
    pub master_seed: u64,
    pub rows: Vec<ConvergenceRow>,
    pub reseeds: Vec<ReseedEvent>,
}

/// `max_{n} |u(t_n) - U^n|` over all grid nodes, including `n = 0`.
pub fn path_error_max<F>(traj: &Trajectory, exact: F) -> f64
where
    F: Fn(f64, &mut [f64]),
{
    let grid = traj.grid();
    let mut buf = vec![0.0; traj.dim()];
    (0..=grid.n_steps())
        .map(|j| {
            exact(grid.node(j), &mut buf);
            distance(&buf, traj.state(j))
        })
        .fold(0.0, f64::max)
}

/// Exact solution at every node, flattened.
pub(crate) fn exact_on_grid(problem: &Problem, grid: &TimeGrid) -> Vec<f64> {
    let d = problem.dim();
    let mut out = vec![0.0; (grid.n_steps() + 1) * d];
    for (j, chunk) in out.chunks_exact_mut(d).enumerate() {
        problem.exact_into(grid.node(j), chunk);
    }
    out
}

/// Path-maximum error of one run against precomputed exact node values.
pub(crate) fn sample_path_error(
    problem: &Problem,
    method: Method,
    grid: &TimeGrid,
    exact: &[f64],
    stream: Option<&mut RandomStream>,
    ws: &mut Workspace,
    state: &mut Vec<f64>,
) -> Result<f64> {
    let d = problem.dim();
    let thetas = match stream {
        Some(s) => Thetas::Stream(s),
        None => Thetas::None,
    };
    let mut err = 0.0f64;
    integrate(
        problem.field(),
        problem.u0().as_slice(),
        grid,
        method,
        thetas,
        ws,
        state,
        |j, x, _| {
            err = err.max(distance(&exact[j * d..(j + 1) * d], x));
        },
    )?;
    Ok(err)
}

/// Seed used for the samples at step size `h`.
pub fn level_seed(master_seed: u64, h: f64) -> u64 {
    mix_seed(master_seed, h.to_bits())
}

/// Stream for `(seed, sample)` on re-seed attempt `attempt` (0 = original).
pub(crate) fn attempt_stream(seed: u64, sample: usize, attempt: u32) -> RandomStream {
    let seed = if attempt == 0 {
        seed
    } else {
        mix_seed(seed ^ RESEED_SALT, attempt as u64)
    };
    RandomStream::derive(seed, sample as u64)
}

/// Runs `job` on `threads` workers (`0` = global pool).
pub(crate) fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(job))
}

#[derive(Debug)]
struct SampleOutcome {
    error: f64,
    reseeds: Vec<ReseedEvent>,
}

/// One sample with the re-seed policy applied to singular hits.
#[allow(clippy::too_many_arguments)]
fn run_sample(
    problem: &Problem,
    method: Method,
    grid: &TimeGrid,
    exact: &[f64],
    seed: u64,
    sample: usize,
    max_reseeds: u32,
    ws: &mut Workspace,
    state: &mut Vec<f64>,
) -> Result<SampleOutcome> {
    let mut reseeds = Vec::new();
    let mut attempt = 0;
    loop {
        let mut stream = attempt_stream(seed, sample, attempt);
        match sample_path_error(problem, method, grid, exact, Some(&mut stream), ws, state) {
            Ok(error) => return Ok(SampleOutcome { error, reseeds }),
            Err(e @ Error::Eval { .. }) if e.is_singular_hit() && attempt < max_reseeds => {
                let Error::Eval { t, .. } = e else { unreachable!() };
                attempt += 1;
                reseeds.push(ReseedEvent {
                    sample,
                    h: grid.step(),
                    attempt,
                    t,
                });
            }
            Err(e) => {
                return Err(Error::Sample {
                    sample,
                    h: grid.step(),
                    source: Box::new(e),
                })
            }
        }
    }
}

/// Plug-in `L^p` estimate `((1/M) sum e_m^p)^{1/p}` and its propagated
/// sample standard deviation.
pub fn lp_moment(errors: &[f64], p: f64) -> (f64, f64) {
    let m = errors.len() as f64;
    let powers: Vec<f64> = errors.iter().map(|e| e.powf(p)).collect();
    let mean = powers.iter().sum::<f64>() / m;
    let estimate = mean.powf(1.0 / p);
    if errors.len() < 2 || powers.iter().all(|&x| x == powers[0]) {
        return (estimate, 0.0);
    }
    let var = powers.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (estimate, var.sqrt() * mean.powf(1.0 / p - 1.0) / p)
}

fn mc_errors_with_seed(config: &ExperimentConfig, grid: &TimeGrid, seed: u64) -> Result<(Vec<f64>, Vec<ReseedEvent>)> {
    let problem = &config.problem;
    let exact = exact_on_grid(problem, grid);
    if !config.method.is_randomized() {
        let mut ws = Workspace::new(problem.dim());
        let mut state = Vec::new();
        let e = sample_path_error(problem, config.method, grid, &exact, None, &mut ws, &mut state).map_err(|e| {
            Error::Sample {
                sample: 0,
                h: grid.step(),
                source: Box::new(e),
            }
        })?;
        return Ok((vec![e; config.samples], Vec::new()));
    }
    let outcomes: Result<Vec<SampleOutcome>> = with_threads(config.threads, || {
        (0..config.samples)
            .into_par_iter()
            .map_init(
                || (Workspace::new(problem.dim()), Vec::new()),
                |(ws, state), m| {
                    run_sample(
                        problem,
                        config.method,
                        grid,
                        &exact,
                        seed,
                        m,
                        config.max_reseeds,
                        ws,
                        state,
                    )
                },
            )
            .collect()
    })?;
    let outcomes = outcomes?;
    let mut reseeds = Vec::new();
    let errors = outcomes
        .into_iter()
        .map(|o| {
            reseeds.extend(o.reseeds);
            o.error
        })
        .collect();
    Ok((errors, reseeds))
}

/// Per-sample path errors at step size `h`, in sample order.
pub fn mc_path_errors(config: &ExperimentConfig, h: f64) -> Result<Vec<f64>> {
    config.validate()?;
    let grid = TimeGrid::new(config.problem.final_time(), h)?;
    Ok(mc_errors_with_seed(config, &grid, level_seed(config.master_seed, h))?.0)
}

/// `L^p(Omega)` norm of the path-maximum error at step size `h`.
pub fn mc_lp_error(config: &ExperimentConfig, h: f64) -> Result<LpEstimate> {
    config.validate()?;
    let grid = TimeGrid::new(config.problem.final_time(), h)?;
    let (errors, reseeds) = mc_errors_with_seed(config, &grid, level_seed(config.master_seed, h))?;
    let (error, sample_std) = lp_moment(&errors, config.p);
    Ok(LpEstimate {
        h,
        error,
        sample_std,
        samples: errors.len(),
        reseeds,
    })
}

/// One row per `n` in `n_min..=n_max`.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut reseeds = Vec::new();
    for h in config.step_sizes() {
        let est = mc_lp_error(config, h)?;
        rows.push(ConvergenceRow {
            h,
            error: est.error,
            sample_std: est.sample_std,
            samples: est.samples,
        });
        reseeds.extend(est.reseeds);
    }
    Ok(ConvergenceTable {
        problem: config.problem.label(),
        method: config.method,
        p: config.p,
        master_seed: config.master_seed,
        rows,
        reseeds,
    })
}
