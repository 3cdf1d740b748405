//! Explicit one-step methods: classical Euler, randomized Euler and the
//! randomized two-stage Runge-Kutta method.
//!
//! In step `j` the randomized methods draw one `tau_j ~ U(0, 1)` and run the
//! explicit Runge-Kutta method whose Butcher tableau is parameterized by
//! `theta = tau_j`:
//!
//! ```text
//!  theta | 0            0     | 0     0
//!  ------+---    and    theta | theta 0
//!        | 1            ------+------------
//!                             | 0     1
//! ```
//!
//! The second method reuses the same `tau_j` for its intermediate stage.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, EvalError, Result};
use crate::field::{State, VectorField};
use crate::grid::TimeGrid;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// `U^j = U^{j-1} + h f(t_{j-1}, U^{j-1})`.
    ClassicalEuler,
    /// `U^j = U^{j-1} + h f(t_{j-1} + tau_j h, U^{j-1})`.
    RandEuler,
    /// Predictor to the random time, then a full step from the predicted state.
    RandRk2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ClassicalEuler, Method::RandEuler, Method::RandRk2];

    pub fn is_randomized(self) -> bool {
        !matches!(self, Method::ClassicalEuler)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::ClassicalEuler => "euler",
            Method::RandEuler => "rand-euler",
            Method::RandRk2 => "rand-rk2",
        }
    }

    /// Right-hand-side evaluations per step.
    pub fn stages(self) -> usize {
        match self {
            Method::ClassicalEuler | Method::RandEuler => 1,
            Method::RandRk2 => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" | "classical-euler" | "classical_euler" => Ok(Method::ClassicalEuler),
            "rand-euler" | "rand_euler" => Ok(Method::RandEuler),
            "rand-rk2" | "rand_rk2" => Ok(Method::RandRk2),
            other => Err(Error::domain(format!(
                "unknown method '{other}' (expected euler, rand-euler or rand-rk2)"
            ))),
        }
    }
}

/// Explicit Butcher tableau `(A, b, c)` with strictly lower triangular `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// One explicit Runge-Kutta step from `(t, x)`.
    ///
    /// Zero coefficients are skipped, so a stage value that is never used
    /// cannot poison the result.
    pub fn step<F: VectorField + ?Sized>(&self, f: &F, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>, EvalError> {
        let d = x.len();
        let s = self.stages();
        let mut k = vec![vec![0.0; d]; s];
        let mut y = vec![0.0; d];
        for i in 0..s {
            y.copy_from_slice(x);
            let mut incr = vec![0.0; d];
            let mut any = false;
            for (j, &aij) in self.a[i].iter().enumerate().take(i) {
                if aij != 0.0 {
                    any = true;
                    for (acc, kj) in incr.iter_mut().zip(&k[j]) {
                        *acc += aij * kj;
                    }
                }
            }
            if any {
                for (yv, inc) in y.iter_mut().zip(&incr) {
                    *yv += h * inc;
                }
            }
            let ti = if self.c[i] == 0.0 { t } else { t + self.c[i] * h };
            f.eval(ti, &y, &mut k[i])?;
            check_finite(&k[i], ti)?;
        }
        let mut incr = vec![0.0; d];
        for (bi, ki) in self.b.iter().zip(&k) {
            if *bi != 0.0 {
                for (acc, kv) in incr.iter_mut().zip(ki) {
                    *acc += bi * kv;
                }
            }
        }
        Ok(x.iter().zip(&incr).map(|(xv, inc)| xv + h * inc).collect())
    }
}

/// The two randomized families, instantiated per step with `theta = tau_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomTableau {
    EulerTheta,
    TwoStageTheta,
}

impl RandomTableau {
    pub fn instantiate(self, theta: f64) -> ButcherTableau {
        match self {
            RandomTableau::EulerTheta => ButcherTableau {
                a: vec![vec![0.0]],
                b: vec![1.0],
                c: vec![theta],
            },
            RandomTableau::TwoStageTheta => ButcherTableau {
                a: vec![vec![0.0, 0.0], vec![theta, 0.0]],
                b: vec![0.0, 1.0],
                c: vec![0.0, theta],
            },
        }
    }
}

fn check_finite(v: &[f64], t: f64) -> Result<(), EvalError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(EvalError::NonFinite { t })
    }
}

/// Scratch buffers for allocation-free stepping.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    k: Vec<f64>,
    stage: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            k: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }
}

/// Advances `x` in place by one step of `method` with parameter `theta`
/// (ignored by classical Euler). Returns the failing abscissa on error.
#[inline]
pub(crate) fn step_in_place<F: VectorField + ?Sized>(
    f: &F,
    method: Method,
    t_prev: f64,
    x: &mut [f64],
    h: f64,
    theta: f64,
    ws: &mut Workspace,
) -> Result<(), EvalError> {
    match method {
        Method::ClassicalEuler => {
            f.eval(t_prev, x, &mut ws.k)?;
            check_finite(&ws.k, t_prev)?;
        }
        Method::RandEuler => {
            let t = t_prev + theta * h;
            f.eval(t, x, &mut ws.k)?;
            check_finite(&ws.k, t)?;
        }
        Method::RandRk2 => {
            f.eval(t_prev, x, &mut ws.k)?;
            check_finite(&ws.k, t_prev)?;
            for ((s, xv), kv) in ws.stage.iter_mut().zip(x.iter()).zip(&ws.k) {
                *s = xv + h * (theta * kv);
            }
            let t = t_prev + theta * h;
            f.eval(t, &ws.stage, &mut ws.k)?;
            check_finite(&ws.k, t)?;
        }
    }
    for (xv, kv) in x.iter_mut().zip(&ws.k) {
        *xv += h * kv;
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")))
    }
}

fn single_step<F: VectorField + ?Sized>(
    f: &F,
    method: Method,
    t_prev: f64,
    x: &State,
    h: f64,
    theta: f64,
) -> Result<State> {
    if f.dim() != x.dim() {
        return Err(Error::domain("state dimension does not match the field"));
    }
    let mut y = x.as_slice().to_vec();
    let mut ws = Workspace::new(x.dim());
    step_in_place(f, method, t_prev, &mut y, h, theta, &mut ws).map_err(|source| Error::Eval {
        step: 1,
        t: t_prev,
        source,
    })?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { step: 1, t: t_prev + h });
    }
    State::new(y)
}

/// `x + h f(t_prev + theta h, x)`.
pub fn step_euler_theta<F: VectorField + ?Sized>(f: &F, t_prev: f64, x: &State, h: f64, theta: f64) -> Result<State> {
    check_theta(theta)?;
    single_step(f, Method::RandEuler, t_prev, x, h, theta)
}

/// `stage = x + h theta f(t_prev, x)`, then `x + h f(t_prev + theta h, stage)`.
pub fn step_rk2_theta<F: VectorField + ?Sized>(f: &F, t_prev: f64, x: &State, h: f64, theta: f64) -> Result<State> {
    check_theta(theta)?;
    single_step(f, Method::RandRk2, t_prev, x, h, theta)
}

/// Numerical solution on the grid nodes together with the draws that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    method: Method,
    dim: usize,
    states: Vec<f64>,
    draws: Vec<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `U^j` for `j` in `0..=N_h`.
    pub fn state(&self, j: usize) -> &[f64] {
        &self.states[j * self.dim..(j + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.grid.n_steps())
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    /// `tau_1 ..= tau_{N_h}`; empty for classical Euler.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }
}

/// Where the per-step parameters come from.
pub(crate) enum Thetas<'a> {
    None,
    Stream(&'a mut RandomStream),
    Replay(&'a [f64]),
}

/// Core loop shared by [`solve`] and the Monte Carlo harness. `visit` sees
/// `(j, U^j)` for `j = 0..=N_h`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate<F, V>(
    f: &F,
    u0: &[f64],
    grid: &TimeGrid,
    method: Method,
    mut thetas: Thetas<'_>,
    ws: &mut Workspace,
    state: &mut Vec<f64>,
    mut visit: V,
) -> Result<()>
where
    F: VectorField + ?Sized,
    V: FnMut(usize, &[f64], Option<f64>),
{
    state.clear();
    state.extend_from_slice(u0);
    visit(0, state, None);
    let h = grid.step();
    for j in 1..=grid.n_steps() {
        let t_prev = grid.node(j - 1);
        let theta = match &mut thetas {
            Thetas::None => None,
            Thetas::Stream(s) => Some(s.draw_tau()),
            Thetas::Replay(d) => Some(d[j - 1]),
        };
        step_in_place(f, method, t_prev, state, h, theta.unwrap_or(0.0), ws).map_err(|source| Error::Eval {
            step: j,
            t: match source {
                EvalError::Singular { t } | EvalError::NonFinite { t } => t,
            },
            source,
        })?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow {
                step: j,
                t: grid.node(j),
            });
        }
        visit(j, state, theta);
    }
    Ok(())
}

fn check_inputs<F: VectorField + ?Sized>(f: &F, u0: &State) -> Result<()> {
    if f.dim() != u0.dim() {
        return Err(Error::domain(format!(
            "initial state has dimension {}, field expects {}",
            u0.dim(),
            f.dim()
        )));
    }
    Ok(())
}

/// Runs `method` over the whole grid. Randomized methods require a stream
/// and consume exactly `N_h` uniforms from it, one per step in step order.
pub fn solve<F: VectorField + ?Sized>(
    f: &F,
    u0: &State,
    grid: &TimeGrid,
    method: Method,
    stream: Option<&mut RandomStream>,
) -> Result<Trajectory> {
    check_inputs(f, u0)?;
    let thetas = match (method.is_randomized(), stream) {
        (true, Some(s)) => Thetas::Stream(s),
        (false, None) => Thetas::None,
        (true, None) => return Err(Error::domain(format!("method {method} needs a random stream"))),
        (false, Some(_)) => {
            return Err(Error::domain(format!(
                "method {method} is deterministic; no stream expected"
            )))
        }
    };
    run_collect(f, u0, grid, method, thetas)
}

/// Re-runs a randomized method from recorded draws.
pub fn replay<F: VectorField + ?Sized>(
    f: &F,
    u0: &State,
    grid: &TimeGrid,
    method: Method,
    draws: &[f64],
) -> Result<Trajectory> {
    check_inputs(f, u0)?;
    if !method.is_randomized() {
        return Err(Error::domain(format!("method {method} does not use draws")));
    }
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
    run_collect(f, u0, grid, method, Thetas::Replay(draws))
}

fn run_collect<F: VectorField + ?Sized>(
    f: &F,
    u0: &State,
    grid: &TimeGrid,
    method: Method,
    thetas: Thetas<'_>,
) -> Result<Trajectory> {
    let d = u0.dim();
    let n = grid.n_steps();
    let mut states = Vec::with_capacity((n + 1) * d);
    let mut draws = Vec::with_capacity(if method.is_randomized() { n } else { 0 });
    let mut ws = Workspace::new(d);
    let mut scratch = Vec::with_capacity(d);
    integrate(
        f,
        u0.as_slice(),
        grid,
        method,
        thetas,
        &mut ws,
        &mut scratch,
        |_, x, theta| {
            states.extend_from_slice(x);
            draws.extend(theta);
        },
    )?;
    Ok(Trajectory {
        grid: *grid,
        method,
        dim: d,
        states,
        draws,
    })
}
