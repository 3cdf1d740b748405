//! States, right-hand sides, integrands and their declared regularity.

use crate::error::{Error, EvalError, Result};

/// A point of `R^d`. Components are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct State(Vec<f64>);

impl State {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("state dimension must be positive"));
        }
        if let Some(x) = components.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("state component {x} is not finite")));
        }
        Ok(Self(components))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl std::ops::Index<usize> for State {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Euclidean distance.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Right-hand side `f(t, x)` of `u' = f(t, u)`.
///
/// `eval` writes `f(t, x)` into `out`. It may fail at isolated singular
/// abscissas; the solvers also reject non-finite outputs.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), EvalError>;
}

/// Time-only function `g(t)` for quadrature.
pub trait Integrand: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, out: &mut [f64]) -> Result<(), EvalError>;
    fn label(&self) -> &str;
}

/// Scalar integrand from a closure. NaN and infinite values are reported as
/// [`EvalError::NonFinite`].
pub struct ScalarIntegrand<F> {
    label: String,
    g: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> ScalarIntegrand<F> {
    pub fn new(label: impl Into<String>, g: F) -> Self {
        Self { label: label.into(), g }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Integrand for ScalarIntegrand<F> {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, out: &mut [f64]) -> Result<(), EvalError> {
        let v = (self.g)(t);
        if !v.is_finite() {
            return Err(EvalError::NonFinite { t });
        }
        out[0] = v;
        Ok(())
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Vector field from a closure `(t, x, out)`.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), EvalError> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), EvalError> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        (self.f)(t, x, out)
    }
}

/// `f(t, x) = g(t)`: an integrand viewed as a state-independent field.
pub struct StateIndependent<I>(pub I);

impl<I: Integrand> VectorField for StateIndependent<I> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, t: f64, _x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.0.eval(t, out)
    }
}

/// Constants of the Hölder regime: `|f(t,x1) - f(t,x2)| <= L |x1 - x2|` and
/// `|f(t1,x) - f(t2,x)| <= K (1 + |x|) |t1 - t2|^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoelderMeta {
    pub gamma: f64,
    pub lipschitz: f64,
    pub constant: f64,
    /// Linear-growth constant `max(L, K T^gamma + |f(0,0)|)`.
    pub growth: f64,
}

/// Declared integrability and continuity data of a right-hand side.
///
/// `lipschitz_norm` and `growth_norm` are the `L^p([0,T])` norms of the
/// time-dependent Lipschitz bound `L(t)` and of `max(K(t), L(t))` where
/// `|f(t,0)| <= K(t)`. `None` means unknown or infinite. `growth_integral`
/// is the `L^1` norm of `max(K(t), L(t))`, which feeds the a-priori bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityMeta {
    pub p: f64,
    pub lipschitz_norm: Option<f64>,
    pub growth_norm: Option<f64>,
    pub growth_integral: Option<f64>,
    pub hoelder: Option<HoelderMeta>,
}

impl RegularityMeta {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) {
            return Err(Error::domain(format!(
                "integrability exponent p must be at least 2, got {}",
                self.p
            )));
        }
        let nonneg = |v: Option<f64>| v.is_none_or(|x| x >= 0.0);
        if !(nonneg(self.lipschitz_norm) && nonneg(self.growth_norm) && nonneg(self.growth_integral)) {
            return Err(Error::domain("norms must be nonnegative"));
        }
        if let Some(h) = self.hoelder {
            if !(h.gamma > 0.0 && h.gamma <= 1.0) {
                return Err(Error::domain(format!(
                    "Hölder exponent must lie in (0, 1], got {}",
                    h.gamma
                )));
            }
            if !(h.lipschitz >= 0.0 && h.constant >= 0.0 && h.growth >= 0.0) {
                return Err(Error::domain("Hölder constants must be nonnegative"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_rejects_non_finite() {
        assert!(State::new(vec![1.0, f64::NAN]).is_err());
        assert!(State::new(vec![f64::INFINITY]).is_err());
        assert!(State::new(vec![]).is_err());
        assert_eq!(State::new(vec![3.0, 4.0]).unwrap().norm(), 5.0);
    }

    #[test]
    fn scalar_integrand_flags_non_finite() {
        let g = ScalarIntegrand::new("inv", |t: f64| 1.0 / t);
        let mut out = [0.0];
        assert_eq!(g.eval(0.0, &mut out), Err(EvalError::NonFinite { t: 0.0 }));
        g.eval(2.0, &mut out).unwrap();
        assert_eq!(out[0], 0.5);
    }

    #[test]
    fn regularity_validation() {
        let mut meta = RegularityMeta {
            p: 2.0,
            lipschitz_norm: Some(1.0),
            growth_norm: None,
            growth_integral: Some(0.0),
            hoelder: None,
        };
        meta.validate().unwrap();
        meta.p = 1.5;
        assert!(meta.validate().is_err());
        meta.p = 2.0;
        meta.hoelder = Some(HoelderMeta {
            gamma: 1.5,
            lipschitz: 1.0,
            constant: 1.0,
            growth: 1.0,
        });
        assert!(meta.validate().is_err());
    }
}
