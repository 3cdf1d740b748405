//! Randomized Riemann sums with all prefix values.
//!
//! `Q^n = h * sum_{j=1..n} g(t_{j-1} + tau_j h)` with one fresh uniform per
//! subinterval. The prefixes of one realization share their draws.

use crate::error::{Error, EvalError, Result};
use crate::field::{distance, Integrand};
use crate::grid::TimeGrid;
use crate::rng::RandomStream;

/// Prefix sums `Q^1 ..= Q^{N_h}` of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePrefix {
    grid: TimeGrid,
    dim: usize,
    partials: Vec<f64>,
    draws: Vec<f64>,
}

impl QuadraturePrefix {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Q^n` for `n` in `1..=N_h`; `Q^0 = 0` is implicit.
    pub fn partial(&self, n: usize) -> &[f64] {
        assert!(n >= 1 && n <= self.grid.n_steps(), "prefix index {n} out of range");
        &self.partials[(n - 1) * self.dim..n * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.partial(self.grid.n_steps())
    }

    /// Relative positions used in each subinterval; empty for the
    /// deterministic left-endpoint rule.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }
}

fn accumulate<I, F>(g: &I, grid: &TimeGrid, mut abscissa: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    I: Integrand + ?Sized,
    F: FnMut(usize, f64) -> (f64, Option<f64>),
{
    let d = g.dim();
    let h = grid.step();
    let n = grid.n_steps();
    let mut partials = Vec::with_capacity(n * d);
    let mut draws = Vec::new();
    let mut acc = vec![0.0; d];
    let mut val = vec![0.0; d];
    for j in 1..=n {
        let (t, tau) = abscissa(j, grid.node(j - 1));
        draws.extend(tau);
        g.eval(t, &mut val)
            .map_err(|source| Error::Eval { step: j, t, source })?;
        if val.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eval {
                step: j,
                t,
                source: EvalError::NonFinite { t },
            });
        }
        for (a, v) in acc.iter_mut().zip(&val) {
            *a += h * v;
        }
        partials.extend_from_slice(&acc);
    }
    Ok((partials, draws))
}

/// Randomized Riemann sum; consumes exactly `N_h` uniforms from `stream`.
pub fn randomized_riemann<I: Integrand + ?Sized>(
    g: &I,
    grid: &TimeGrid,
    stream: &mut RandomStream,
) -> Result<QuadraturePrefix> {
    let h = grid.step();
    let (partials, draws) = accumulate(g, grid, |_, t_prev| {
        let tau = stream.draw_tau();
        (t_prev + tau * h, Some(tau))
    })?;
    Ok(QuadraturePrefix {
        grid: *grid,
        dim: g.dim(),
        partials,
        draws,
    })
}

/// Randomized Riemann sum from prescribed relative positions, e.g. recorded
/// draws of an earlier realization.
pub fn riemann_with_draws<I: Integrand + ?Sized>(g: &I, grid: &TimeGrid, draws: &[f64]) -> Result<QuadraturePrefix> {
    if draws.len() != grid.n_steps() {
        return Err(Error::domain(format!(
            "expected {} draws, got {}",
            grid.n_steps(),
            draws.len()
        )));
    }
    if let Some(tau) = draws.iter().find(|tau| !(0.0..=1.0).contains(*tau)) {
        return Err(Error::domain(format!("draw {tau} outside [0, 1]")));
    }
    let h = grid.step();
    let (partials, draws) = accumulate(g, grid, |j, t_prev| {
        let tau = draws[j - 1];
        (t_prev + tau * h, Some(tau))
    })?;
    Ok(QuadraturePrefix {
        grid: *grid,
        dim: g.dim(),
        partials,
        draws,
    })
}

/// Deterministic left-endpoint rule `h * sum_{j<=n} g(t_{j-1})`.
pub fn left_riemann<I: Integrand + ?Sized>(g: &I, grid: &TimeGrid) -> Result<QuadraturePrefix> {
    let (partials, draws) = accumulate(g, grid, |_, t_prev| (t_prev, None))?;
    Ok(QuadraturePrefix {
        grid: *grid,
        dim: g.dim(),
        partials,
        draws,
    })
}

/// `max_{n in 1..=N_h} |int_0^{t_n} g - Q^n|`, with `true_integral(t, out)`
/// writing the exact integral up to `t`.
pub fn quad_error_max<F>(q: &QuadraturePrefix, true_integral: F) -> f64
where
    F: Fn(f64, &mut [f64]),
{
    let mut exact = vec![0.0; q.dim];
    (1..=q.grid.n_steps())
        .map(|n| {
            true_integral(q.grid.node(n), &mut exact);
            distance(&exact, q.partial(n))
        })
        .fold(0.0, f64::max)
}
