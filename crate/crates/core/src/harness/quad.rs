//! Monte Carlo statistics of the randomized Riemann sum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Integrand;
use crate::grid::TimeGrid;
use crate::quadrature::{quad_error_max, randomized_riemann, QuadraturePrefix};

use super::{attempt_stream, lp_moment, with_threads, LpEstimate, ReseedEvent};

/// Signed deviation of `Q^{N_h}` from the exact integral over many streams.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub exact: f64,
    /// Mean of `Q^{N_h} - exact`.
    pub mean_deviation: f64,
    /// Sample standard deviation of `Q^{N_h}`.
    pub sample_std: f64,
    pub samples: usize,
    pub reseeds: Vec<ReseedEvent>,
}

impl BiasReport {
    /// `|mean| / (std / sqrt(M))`.
    pub fn z_score(&self) -> f64 {
        if self.sample_std == 0.0 {
            return if self.mean_deviation == 0.0 { 0.0 } else { f64::INFINITY };
        }
        self.mean_deviation.abs() / (self.sample_std / (self.samples as f64).sqrt())
    }
}

fn realizations<I: Integrand + ?Sized>(
    g: &I,
    grid: &TimeGrid,
    samples: usize,
    seed: u64,
    threads: usize,
    max_reseeds: u32,
) -> Result<(Vec<QuadraturePrefix>, Vec<ReseedEvent>)> {
    if samples < 2 {
        return Err(Error::domain(format!("need at least 2 samples, got {samples}")));
    }
    let runs: Result<Vec<(QuadraturePrefix, Vec<ReseedEvent>)>> = with_threads(threads, || {
        (0..samples)
            .into_par_iter()
            .map(|m| {
                let mut events = Vec::new();
                let mut attempt = 0;
                loop {
                    let mut stream = attempt_stream(seed, m, attempt);
                    match randomized_riemann(g, grid, &mut stream) {
                        Ok(q) => return Ok((q, events)),
                        Err(e @ Error::Eval { .. }) if e.is_singular_hit() && attempt < max_reseeds => {
                            let Error::Eval { t, .. } = e else { unreachable!() };
                            attempt += 1;
                            events.push(ReseedEvent {
                                sample: m,
                                h: grid.step(),
                                attempt,
                                t,
                            });
                        }
                        Err(e) => {
                            return Err(Error::Sample {
                                sample: m,
                                h: grid.step(),
                                source: Box::new(e),
                            })
                        }
                    }
                }
            })
            .collect()
    })?;
    let mut reseeds = Vec::new();
    let prefixes = runs?
        .into_iter()
        .map(|(q, ev)| {
            reseeds.extend(ev);
            q
        })
        .collect();
    Ok((prefixes, reseeds))
}

/// Unbiasedness statistics of the final prefix `Q^{N_h}` of a scalar integrand.
pub fn quadrature_bias<I, F>(
    g: &I,
    integral: F,
    grid: &TimeGrid,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<BiasReport>
where
    I: Integrand + ?Sized,
    F: Fn(f64) -> f64,
{
    if g.dim() != 1 {
        return Err(Error::domain("bias statistics need a scalar integrand"));
    }
    let (qs, reseeds) = realizations(g, grid, samples, seed, threads, 3)?;
    let exact = integral(grid.node(grid.n_steps()));
    let m = qs.len() as f64;
    let finals: Vec<f64> = qs.iter().map(|q| q.last()[0]).collect();
    let mean = finals.iter().sum::<f64>() / m;
    let var = finals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    Ok(BiasReport {
        exact,
        mean_deviation: mean - exact,
        sample_std: var.sqrt(),
        samples: qs.len(),
        reseeds,
    })
}

/// `L^p(Omega)` norm of `max_n |int_0^{t_n} g - Q^n|`.
pub fn quadrature_lp_error<I, F>(
    g: &I,
    integral: F,
    grid: &TimeGrid,
    p: f64,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<LpEstimate>
where
    I: Integrand + ?Sized,
    F: Fn(f64, &mut [f64]) + Sync,
{
    if !(p >= 2.0) {
        return Err(Error::domain(format!("p must be at least 2, got {p}")));
    }
    let (qs, reseeds) = realizations(g, grid, samples, seed, threads, 3)?;
    let errors: Vec<f64> = qs.iter().map(|q| quad_error_max(q, &integral)).collect();
    let (error, sample_std) = lp_moment(&errors, p);
    Ok(LpEstimate {
        h: grid.step(),
        error,
        sample_std,
        samples: errors.len(),
        reseeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarIntegrand;

    #[test]
    fn constant_integrand_has_no_spread() {
        let g = ScalarIntegrand::new("c", |_| 2.0);
        let grid = TimeGrid::new(1.0, 0.125).unwrap();
        let r = quadrature_bias(&g, |t| 2.0 * t, &grid, 20, 1, 0).unwrap();
        assert_eq!(r.mean_deviation, 0.0);
        assert_eq!(r.sample_std, 0.0);
        assert_eq!(r.z_score(), 0.0);
        let e = quadrature_lp_error(&g, |t, out: &mut [f64]| out[0] = 2.0 * t, &grid, 2.0, 20, 1, 0).unwrap();
        assert_eq!(e.error, 0.0);
    }
}
