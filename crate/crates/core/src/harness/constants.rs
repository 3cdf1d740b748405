//! Closed-form error constants and a-priori bounds.

use crate::error::{Error, Result};
use crate::field::HoelderMeta;
use crate::problems::{Problem, Regime};

/// Inputs of the error-constant formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantInputs {
    /// Constant of the Burkholder-Davis-Gundy inequality for moment `p`.
    pub cp: f64,
    pub final_time: f64,
    pub p: f64,
    /// `||L||_{L^p}`.
    pub lipschitz_norm: Option<f64>,
    /// `||max(K, L)||_{L^p}`.
    pub growth_norm: Option<f64>,
    pub hoelder: Option<HoelderMeta>,
    /// Bound on `sup_t |u(t)|`.
    pub sup_u: f64,
}

impl ConstantInputs {
    /// Norms from the problem's declared regularity at moment `p` and
    /// `sup |u|` from the a-priori bound.
    pub fn from_problem(problem: &Problem, p: f64, cp: f64) -> Result<Self> {
        let meta = problem.regularity(p)?;
        Ok(Self {
            cp,
            final_time: problem.final_time(),
            p,
            lipschitz_norm: meta.lipschitz_norm,
            growth_norm: meta.growth_norm,
            hoelder: meta.hoelder,
            sup_u: apriori_sup_bound(problem)?,
        })
    }

    fn check(&self) -> Result<()> {
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::domain(format!("p must be a finite number >= 2, got {}", self.p)));
        }
        if !(self.cp > 0.0) {
            return Err(Error::domain(format!("C_p must be positive, got {}", self.cp)));
        }
        if !(self.final_time > 0.0) {
            return Err(Error::domain(format!("T must be positive, got {}", self.final_time)));
        }
        if !(self.sup_u >= 0.0) {
            return Err(Error::domain(format!(
                "sup |u| bound must be nonnegative, got {}",
                self.sup_u
            )));
        }
        Ok(())
    }

    /// Constant `C` of the `L^p` bound for randomized Euler under
    /// integrable (Carathéodory) time dependence.
    pub fn caratheodory_constant(&self) -> Result<f64> {
        self.check()?;
        let (Some(l), Some(k)) = (self.lipschitz_norm, self.growth_norm) else {
            return Err(Error::domain(
                "the constant C needs finite L^p norms of L and max(K, L)",
            ));
        };
        let (p, t) = (self.p, self.final_time);
        Ok(2f64.powf(1.0 - 1.0 / p)
            * t.powf(0.5 - 1.0 / p)
            * k
            * ((2.0 * t).powf(p - 1.0) * l.powf(p) / p).exp()
            * (2.0 * self.cp + t.sqrt() * l)
            * (1.0 + self.sup_u))
    }

    /// Constants `(C_U, C_V)` for randomized Euler and the randomized
    /// two-stage method under Hölder time dependence.
    pub fn hoelder_constants(&self) -> Result<(f64, f64)> {
        self.check()?;
        let Some(h) = self.hoelder else {
            return Err(Error::domain(
                "C_U and C_V need a Hölder exponent gamma with constants L and K",
            ));
        };
        let (t, l, kbar, cp) = (self.final_time, h.lipschitz, h.growth, self.cp);
        let tail = 2.0 + l * t.powf(1.0 - h.gamma);
        let sup = 1.0 + self.sup_u;
        let c_u = (l * t).exp() * kbar * t.sqrt() * (cp * tail + l * t.sqrt()) * sup;
        let c_v = (l * (1.0 + l) * t).exp() * kbar * (cp * t.sqrt() + l * t) * tail * sup;
        Ok((c_u, c_v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantReport {
    pub inputs: ConstantInputs,
    pub c: Option<f64>,
    pub c_u: Option<f64>,
    pub c_v: Option<f64>,
}

/// Evaluates every constant whose inputs are available.
pub fn error_constants(inputs: &ConstantInputs) -> Result<ConstantReport> {
    inputs.check()?;
    let c = inputs.caratheodory_constant().ok();
    let (c_u, c_v) = match inputs.hoelder_constants() {
        Ok((u, v)) => (Some(u), Some(v)),
        Err(_) => (None, None),
    };
    if c.is_none() && c_u.is_none() {
        return Err(Error::domain(
            "no error constant can be evaluated from the given inputs",
        ));
    }
    Ok(ConstantReport {
        inputs: *inputs,
        c,
        c_u,
        c_v,
    })
}

/// `(|u0| + A) exp(A)` with `A` the integral of the growth bound over `[0, T]`.
pub fn apriori_bound(u0_norm: f64, growth_integral: f64) -> f64 {
    (u0_norm + growth_integral) * growth_integral.exp()
}

/// Bound on `sup_{t <= T} |u(t)|` from the problem's declared growth data.
pub fn apriori_sup_bound(problem: &Problem) -> Result<f64> {
    let u0 = problem.u0().norm();
    let meta = problem.regularity(2.0)?;
    match (problem.regime(), meta.hoelder, meta.growth_integral) {
        (Regime::Hoelder, Some(h), _) => Ok(apriori_bound(u0, h.growth * problem.final_time())),
        (_, _, Some(a)) => Ok(apriori_bound(u0, a)),
        _ => Err(Error::domain(format!(
            "problem {} declares no growth bound",
            problem.label()
        ))),
    }
}
