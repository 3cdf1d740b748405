//! Randomized quadrature and randomized Runge-Kutta methods for ordinary
//! differential equations whose right-hand side is irregular in time.
//!
//! The crate provides
//!
//! - [`quadrature`]: the randomized Riemann sum and a left-endpoint baseline,
//! - [`solvers`]: classical Euler, randomized Euler and the randomized
//!   two-stage Runge-Kutta method, plus a generic Butcher-tableau executor,
//! - [`problems`]: test problems with closed-form solutions (weakly singular,
//!   discontinuous, Hölder continuous and adversarial right-hand sides),
//! - [`harness`]: Monte Carlo `L^p` errors, convergence-order fits, pathwise
//!   rate checks and the closed-form error constants,
//! - [`report`]: CSV tables and SVG log-log plots.
//!
//! ```
//! use randrk::{Method, Problem, RandomStream, TimeGrid, solve};
//!
//! let problem = Problem::jump_linear(1.0).unwrap();
//! let grid = TimeGrid::dyadic(1.0, 8).unwrap();
//! let mut stream = RandomStream::derive(42, 0);
//! let traj = solve(problem.field(), problem.u0(), &grid, Method::RandRk2, Some(&mut stream)).unwrap();
//! assert!((traj.last()[0] - (-0.3f64).exp()).abs() < 1e-3);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod problems;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod solvers;

pub use error::{Error, EvalError, Result};
pub use field::{HoelderMeta, Integrand, RegularityMeta, State, VectorField};
pub use grid::TimeGrid;
pub use harness::{
    fit_order, mc_lp_error, path_error_max, run_convergence, ConvergenceRow, ConvergenceTable, ExperimentConfig,
    OrderFit,
};
pub use problems::{Problem, Regime};
pub use rng::RandomStream;
pub use solvers::{solve, step_euler_theta, step_rk2_theta, Method, Trajectory};
