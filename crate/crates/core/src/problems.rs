//! Built-in initial value problems with closed-form solutions.
//!
//! | name           | right-hand side                       | regime       |
//! |----------------|---------------------------------------|--------------|
//! | `singular`     | `(T - t)^{-1/gamma}`                  | Carathéodory |
//! | `jump`         | `g(t) x`, `g` piecewise constant      | Carathéodory |
//! | `singular-lip` | `|t - T/2|^{-alpha} x`                | Carathéodory |
//! | `manufactured` | `t^gamma + lambda (x - v(t))`         | Hölder       |
//! | `adversarial`  | indicator of the grid's left nodes    | adversarial  |

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, EvalError, Result};
use crate::field::{HoelderMeta, Integrand, RegularityMeta, State, StateIndependent, VectorField};
use crate::grid::TimeGrid;

/// Sign function with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

const JUMP_SLOPES: [f64; 4] = [-1.0, -0.8, -0.4, 1.0];

/// Time-dependent coefficient `g(t)` of a built-in problem together with
/// its antiderivative `int_0^t g`.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeCoefficient {
    /// `(T - t)^{-1/gamma}`, singular at `t = T`.
    SingularPower { final_time: f64, gamma: f64 },
    /// `-sgn(T/4 - t)/10 - sgn(T/2 - t)/5 - 7 sgn(3T/4 - t)/10`.
    Jump { final_time: f64 },
    /// `|t - center|^{-alpha}`, singular at `t = center`.
    AbsPower { center: f64, alpha: f64 },
    /// `t^gamma`.
    Power { gamma: f64 },
    /// `1` on the left nodes `t_0 .. t_{N_h - 1}` of `grid`, `0` elsewhere.
    GridIndicator { grid: TimeGrid },
}

impl TimeCoefficient {
    pub fn value(&self, t: f64) -> Result<f64, EvalError> {
        let v = match *self {
            TimeCoefficient::SingularPower { final_time, gamma } => {
                if t >= final_time {
                    return Err(EvalError::Singular { t });
                }
                (final_time - t).powf(-1.0 / gamma)
            }
            TimeCoefficient::Jump { final_time: tf } => {
                -0.1 * sgn(0.25 * tf - t) - 0.2 * sgn(0.5 * tf - t) - 0.7 * sgn(0.75 * tf - t)
            }
            TimeCoefficient::AbsPower { center, alpha } => {
                if t == center {
                    return Err(EvalError::Singular { t });
                }
                (t - center).abs().powf(-alpha)
            }
            TimeCoefficient::Power { gamma } => t.powf(gamma),
            TimeCoefficient::GridIndicator { grid } => match grid.node_index(t) {
                Some(j) if j < grid.n_steps() => 1.0,
                _ => 0.0,
            },
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t })
        }
    }

    /// `int_0^t g(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            TimeCoefficient::SingularPower { final_time, gamma } => {
                let a = 1.0 - 1.0 / gamma;
                (final_time.powf(a) - (final_time - t).max(0.0).powf(a)) / a
            }
            TimeCoefficient::Jump { final_time } => {
                let q = 0.25 * final_time;
                JUMP_SLOPES
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s * (t - i as f64 * q).clamp(0.0, q))
                    .sum()
            }
            TimeCoefficient::AbsPower { center, alpha } => {
                let a = 1.0 - alpha;
                let left = center.powf(a);
                if t <= center {
                    (left - (center - t).powf(a)) / a
                } else {
                    (left + (t - center).powf(a)) / a
                }
            }
            TimeCoefficient::Power { gamma } => t.powf(1.0 + gamma) / (1.0 + gamma),
            TimeCoefficient::GridIndicator { .. } => 0.0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TimeCoefficient::SingularPower { gamma, .. } => format!("(T-t)^(-1/{gamma})"),
            TimeCoefficient::Jump { .. } => "jump coefficient".into(),
            TimeCoefficient::AbsPower { alpha, .. } => format!("|t-T/2|^(-{alpha})"),
            TimeCoefficient::Power { gamma } => format!("t^{gamma}"),
            TimeCoefficient::GridIndicator { grid } => format!("indicator of grid nodes (h={})", grid.step()),
        }
    }
}

impl Integrand for TimeCoefficient {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, out: &mut [f64]) -> Result<(), EvalError> {
        out[0] = self.value(t)?;
        Ok(())
    }

    fn label(&self) -> &str {
        match self {
            TimeCoefficient::SingularPower { .. } => "singular-power",
            TimeCoefficient::Jump { .. } => "jump",
            TimeCoefficient::AbsPower { .. } => "abs-power",
            TimeCoefficient::Power { .. } => "power",
            TimeCoefficient::GridIndicator { .. } => "grid-indicator",
        }
    }
}

/// `f(t, x) = g(t) x`.
struct Multiplicative(TimeCoefficient);

impl VectorField for Multiplicative {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        out[0] = self.0.value(t)? * x[0];
        Ok(())
    }
}

/// `f(t, x) = t^gamma + lambda (x - t^{1+gamma} / (1+gamma))`.
struct Manufactured {
    gamma: f64,
    lambda: f64,
}

impl VectorField for Manufactured {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let v = t.powf(1.0 + self.gamma) / (1.0 + self.gamma);
        out[0] = t.powf(self.gamma) + self.lambda * (x[0] - v);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Integrable time dependence with `L^p` Lipschitz and growth bounds.
    Caratheodory,
    /// Continuous, Lipschitz in state, Hölder in time.
    Hoelder,
    /// Built to defeat deterministic methods; zero almost everywhere.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    SingularTime { gamma: f64 },
    JumpLinear,
    SingularLipschitz { alpha: f64 },
    ManufacturedHoelder { gamma: f64, lambda: f64 },
    AdversarialIndicator { grid: TimeGrid },
}

/// An initial value problem `u' = f(t, u)`, `u(0) = u0` on `[0, T]`.
#[derive(Clone)]
pub struct Problem {
    kind: ProblemKind,
    final_time: f64,
    u0: State,
    coefficient: TimeCoefficient,
    field: Arc<dyn VectorField>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("kind", &self.kind)
            .field("final_time", &self.final_time)
            .field("u0", &self.u0)
            .finish()
    }
}

fn check_final_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("T must be positive and finite, got {t}")))
    }
}

impl Problem {
    /// `u' = (T - t)^{-1/gamma}`, `u(0) = 0`.
    pub fn singular_time(gamma: f64, final_time: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must exceed 1, got {gamma}")));
        }
        check_final_time(final_time)?;
        let coefficient = TimeCoefficient::SingularPower { final_time, gamma };
        Ok(Self {
            kind: ProblemKind::SingularTime { gamma },
            final_time,
            u0: State::scalar(0.0)?,
            field: Arc::new(StateIndependent(coefficient.clone())),
            coefficient,
        })
    }

    /// `u' = g(t) u`, `u(0) = 1` with jumps of `g` at `T/4`, `T/2`, `3T/4`.
    pub fn jump_linear(final_time: f64) -> Result<Self> {
        check_final_time(final_time)?;
        let coefficient = TimeCoefficient::Jump { final_time };
        Ok(Self {
            kind: ProblemKind::JumpLinear,
            final_time,
            u0: State::scalar(1.0)?,
            field: Arc::new(Multiplicative(coefficient.clone())),
            coefficient,
        })
    }

    /// `u' = |t - T/2|^{-alpha} u`, `u(0) = 1`: unbounded Lipschitz bound.
    pub fn singular_lipschitz(alpha: f64, final_time: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::domain(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        check_final_time(final_time)?;
        let coefficient = TimeCoefficient::AbsPower {
            center: 0.5 * final_time,
            alpha,
        };
        Ok(Self {
            kind: ProblemKind::SingularLipschitz { alpha },
            final_time,
            u0: State::scalar(1.0)?,
            field: Arc::new(Multiplicative(coefficient.clone())),
            coefficient,
        })
    }

    /// Manufactured solution `u(t) = t^{1+gamma}/(1+gamma)` of
    /// `u' = t^gamma + lambda (u - u(t))`, `u(0) = 0`.
    pub fn manufactured_hoelder(gamma: f64, lambda: f64, final_time: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        if !lambda.is_finite() {
            return Err(Error::domain(format!("lambda must be finite, got {lambda}")));
        }
        check_final_time(final_time)?;
        Ok(Self {
            kind: ProblemKind::ManufacturedHoelder { gamma, lambda },
            final_time,
            u0: State::scalar(0.0)?,
            coefficient: TimeCoefficient::Power { gamma },
            field: Arc::new(Manufactured { gamma, lambda }),
        })
    }

    /// `f(t, x) = 1` on the left nodes of `grid`, `0` elsewhere; `u = 0`.
    pub fn adversarial_indicator(grid: TimeGrid) -> Result<Self> {
        let coefficient = TimeCoefficient::GridIndicator { grid };
        Ok(Self {
            kind: ProblemKind::AdversarialIndicator { grid },
            final_time: grid.final_time(),
            u0: State::scalar(0.0)?,
            field: Arc::new(StateIndependent(coefficient.clone())),
            coefficient,
        })
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn u0(&self) -> &State {
        &self.u0
    }

    pub fn dim(&self) -> usize {
        self.u0.dim()
    }

    pub fn field(&self) -> &dyn VectorField {
        self.field.as_ref()
    }

    /// Time-dependent factor of the right-hand side.
    pub fn coefficient(&self) -> &TimeCoefficient {
        &self.coefficient
    }

    pub fn regime(&self) -> Regime {
        match self.kind {
            ProblemKind::ManufacturedHoelder { .. } => Regime::Hoelder,
            ProblemKind::AdversarialIndicator { .. } => Regime::Adversarial,
            _ => Regime::Caratheodory,
        }
    }

    /// Short name as accepted on the command line.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ProblemKind::SingularTime { .. } => "singular",
            ProblemKind::JumpLinear => "jump",
            ProblemKind::SingularLipschitz { .. } => "singular-lip",
            ProblemKind::ManufacturedHoelder { .. } => "manufactured",
            ProblemKind::AdversarialIndicator { .. } => "adversarial",
        }
    }

    /// Name with parameters; contains no commas.
    pub fn label(&self) -> String {
        let t = self.final_time;
        match self.kind {
            ProblemKind::SingularTime { gamma } => format!("singular[gamma={gamma};T={t}]"),
            ProblemKind::JumpLinear => format!("jump[T={t}]"),
            ProblemKind::SingularLipschitz { alpha } => format!("singular-lip[alpha={alpha};T={t}]"),
            ProblemKind::ManufacturedHoelder { gamma, lambda } => {
                format!("manufactured[gamma={gamma};lambda={lambda};T={t}]")
            }
            ProblemKind::AdversarialIndicator { grid } => format!("adversarial[h={};T={t}]", grid.step()),
        }
    }

    /// Abscissas where the right-hand side is undefined.
    pub fn singular_points(&self) -> Vec<f64> {
        match self.kind {
            ProblemKind::SingularTime { .. } => vec![self.final_time],
            ProblemKind::SingularLipschitz { .. } => vec![0.5 * self.final_time],
            _ => Vec::new(),
        }
    }

    pub fn has_exact(&self) -> bool {
        true
    }

    /// Writes `u(t)` into `out`.
    pub fn exact_into(&self, t: f64, out: &mut [f64]) {
        out[0] = match self.kind {
            ProblemKind::SingularTime { .. } | ProblemKind::ManufacturedHoelder { .. } => self.coefficient.integral(t),
            ProblemKind::JumpLinear | ProblemKind::SingularLipschitz { .. } => self.coefficient.integral(t).exp(),
            ProblemKind::AdversarialIndicator { .. } => 0.0,
        };
    }

    pub fn exact(&self, t: f64) -> State {
        let mut out = vec![0.0; self.dim()];
        self.exact_into(t, &mut out);
        State::new(out).expect("closed-form solutions are finite on [0, T]")
    }

    /// `max_{t in [0,T]} |u(t)|`, from the monotonicity of each solution.
    pub fn exact_sup(&self) -> f64 {
        match self.kind {
            ProblemKind::SingularTime { .. }
            | ProblemKind::SingularLipschitz { .. }
            | ProblemKind::ManufacturedHoelder { .. } => self.exact(self.final_time).norm(),
            ProblemKind::JumpLinear => 1.0,
            ProblemKind::AdversarialIndicator { .. } => 0.0,
        }
    }

    /// Integrability and continuity data with norms taken in `L^p([0,T])`.
    ///
    /// Norms that are infinite for the requested `p` are reported as `None`.
    /// For the manufactured problem the growth data are upper bounds.
    pub fn regularity(&self, p: f64) -> Result<RegularityMeta> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::domain(format!("p must be a finite number >= 2, got {p}")));
        }
        let tf = self.final_time;
        let meta = match self.kind {
            ProblemKind::SingularTime { gamma } => {
                let a = 1.0 - 1.0 / gamma;
                let growth_norm = (p < gamma).then(|| {
                    let b = 1.0 - p / gamma;
                    (tf.powf(b) / b).powf(1.0 / p)
                });
                RegularityMeta {
                    p,
                    lipschitz_norm: Some(0.0),
                    growth_norm,
                    growth_integral: Some(tf.powf(a) / a),
                    hoelder: None,
                }
            }
            ProblemKind::JumpLinear => {
                let norm = (0.25 * tf * JUMP_SLOPES.iter().map(|s| s.abs().powf(p)).sum::<f64>()).powf(1.0 / p);
                RegularityMeta {
                    p,
                    lipschitz_norm: Some(norm),
                    growth_norm: Some(norm),
                    growth_integral: Some(0.25 * tf * JUMP_SLOPES.iter().map(|s| s.abs()).sum::<f64>()),
                    hoelder: None,
                }
            }
            ProblemKind::SingularLipschitz { alpha } => {
                let c = 0.5 * tf;
                let norm = (alpha * p < 1.0).then(|| {
                    let b = 1.0 - alpha * p;
                    (2.0 * c.powf(b) / b).powf(1.0 / p)
                });
                RegularityMeta {
                    p,
                    lipschitz_norm: norm,
                    growth_norm: norm,
                    growth_integral: Some(2.0 * c.powf(1.0 - alpha) / (1.0 - alpha)),
                    hoelder: None,
                }
            }
            ProblemKind::ManufacturedHoelder { gamma, lambda } => {
                let lip = lambda.abs();
                // |f(t,0)| <= T^gamma + |lambda| T^{1+gamma} / (1+gamma)
                let k_bound = tf.powf(gamma) + lip * tf.powf(1.0 + gamma) / (1.0 + gamma);
                let kbar = k_bound.max(lip);
                // |t1^g - t2^g| <= |t1-t2|^g and |v(t1) - v(t2)| <= T |t1-t2|^g
                let constant = 1.0 + lip * tf;
                RegularityMeta {
                    p,
                    lipschitz_norm: Some(lip * tf.powf(1.0 / p)),
                    growth_norm: Some(kbar * tf.powf(1.0 / p)),
                    growth_integral: Some(kbar * tf),
                    hoelder: Some(HoelderMeta {
                        gamma,
                        lipschitz: lip,
                        constant,
                        growth: lip.max(constant * tf.powf(gamma)),
                    }),
                }
            }
            ProblemKind::AdversarialIndicator { .. } => RegularityMeta {
                p,
                lipschitz_norm: Some(0.0),
                growth_norm: Some(0.0),
                growth_integral: Some(0.0),
                hoelder: None,
            },
        };
        meta.validate()?;
        Ok(meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_time_exact_values() {
        let p = Problem::singular_time(2.0, 1.0).unwrap();
        assert_eq!(p.exact(1.0)[0], 2.0);
        assert_eq!(p.exact(0.0)[0], 0.0);
        let p = Problem::singular_time(10.0, 1.0).unwrap();
        assert!((p.exact(1.0)[0] - 10.0 / 9.0).abs() < 1e-15);
        let err = Problem::singular_time(0.5, 1.0).unwrap_err();
        assert_eq!(err.to_string(), "gamma must exceed 1, got 0.5");
        assert!(Problem::singular_time(1.0, 1.0).is_err());
    }

    #[test]
    fn singular_time_guards_final_time() {
        let p = Problem::singular_time(3.0, 1.0).unwrap();
        let mut out = [0.0];
        assert_eq!(
            p.field().eval(1.0, &[0.0], &mut out),
            Err(EvalError::Singular { t: 1.0 })
        );
        p.field().eval(1.0 - 1e-16, &[0.0], &mut out).unwrap();
        assert!(out[0].is_finite() && out[0] > 1e5);
    }

    #[test]
    fn jump_coefficient_values() {
        let p = Problem::jump_linear(1.0).unwrap();
        let g = p.coefficient();
        assert_eq!(g.value(0.5).unwrap(), -0.6);
        for eps in [1e-3, 0.1, 0.2] {
            assert!((g.value(0.5 + eps).unwrap() + 0.4).abs() < 1e-15);
            assert!((g.value(0.5 - eps).unwrap() + 0.8).abs() < 1e-15);
        }
        assert_eq!(g.value(0.1).unwrap(), -1.0);
        assert_eq!(g.value(0.9).unwrap(), 1.0);
        assert!((g.value(0.25).unwrap() + 0.9).abs() < 1e-15);
        assert!((g.value(0.75).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn jump_exact_values() {
        let p = Problem::jump_linear(1.0).unwrap();
        assert!((p.exact(1.0)[0] - (-0.3f64).exp()).abs() < 1e-12);
        assert!((p.exact(0.25)[0] - (-0.25f64).exp()).abs() < 1e-15);
        let p = Problem::jump_linear(2.0).unwrap();
        assert!((p.exact(2.0)[0] - (-0.6f64).exp()).abs() < 1e-12);
        assert!((p.exact(0.5)[0] - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn singular_lipschitz_exact_values() {
        let p = Problem::singular_lipschitz(0.25, 1.0).unwrap();
        let h_final = 2.0 * 0.5f64.powf(0.75) / 0.75;
        assert!((p.coefficient().integral(1.0) - h_final).abs() < 1e-15);
        assert!((p.exact(0.5)[0] - (0.5f64.powf(0.75) / 0.75).exp()).abs() < 1e-14);
        assert_eq!(p.exact(0.0)[0], 1.0);
        let mut out = [0.0];
        assert_eq!(
            p.field().eval(0.5, &[1.0], &mut out),
            Err(EvalError::Singular { t: 0.5 })
        );
        assert!(Problem::singular_lipschitz(0.5, 1.0).is_err());
        assert!(Problem::singular_lipschitz(0.0, 1.0).is_err());
    }

    #[test]
    fn manufactured_identity() {
        for (gamma, lambda) in [(0.25, 1.0), (0.5, -2.0), (1.0, 0.0), (0.7, 3.5)] {
            let p = Problem::manufactured_hoelder(gamma, lambda, 1.0).unwrap();
            let mut out = [0.0];
            for t in [0.0, 0.1, 0.37, 0.9, 1.0] {
                let v = p.exact(t)[0];
                p.field().eval(t, &[v], &mut out).unwrap();
                assert!((out[0] - t.powf(gamma)).abs() < 1e-15);
            }
        }
        let p = Problem::manufactured_hoelder(0.5, 1.0, 1.0).unwrap();
        assert!((p.exact(1.0)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(Problem::manufactured_hoelder(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn adversarial_field() {
        let grid = TimeGrid::new(1.0, 1.0 / 16.0).unwrap();
        let p = Problem::adversarial_indicator(grid).unwrap();
        let mut out = [0.0];
        p.field().eval(0.25, &[0.0], &mut out).unwrap();
        assert_eq!(out[0], 1.0);
        p.field().eval(1.0, &[0.0], &mut out).unwrap();
        assert_eq!(out[0], 0.0, "the final node is not a left endpoint");
        p.field().eval(0.26, &[0.0], &mut out).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(p.exact(0.3)[0], 0.0);
    }

    #[test]
    fn sign_function() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(-0.0), 0.0);
        assert_eq!(sgn(2.0), 1.0);
        assert_eq!(sgn(-1e-300), -1.0);
    }

    #[test]
    fn regularity_norms() {
        let p = Problem::jump_linear(1.0).unwrap();
        let m = p.regularity(2.0).unwrap();
        assert!((m.growth_integral.unwrap() - 0.8).abs() < 1e-15);
        assert!((m.lipschitz_norm.unwrap() - (0.25f64 * (1.0 + 0.64 + 0.16 + 1.0)).sqrt()).abs() < 1e-15);
        let s2 = Problem::singular_time(2.0, 1.0).unwrap().regularity(2.0).unwrap();
        assert_eq!(s2.growth_norm, None);
        let s4 = Problem::singular_time(4.0, 1.0).unwrap().regularity(2.0).unwrap();
        assert!((s4.growth_norm.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let lip = Problem::singular_lipschitz(0.25, 1.0).unwrap();
        assert!(lip.regularity(4.0).unwrap().lipschitz_norm.is_none());
        assert!(lip.regularity(3.0).unwrap().lipschitz_norm.is_some());
        assert!(p.regularity(1.0).is_err());
        let man = Problem::manufactured_hoelder(0.5, 1.0, 1.0)
            .unwrap()
            .regularity(2.0)
            .unwrap();
        let hm = man.hoelder.unwrap();
        assert_eq!((hm.gamma, hm.lipschitz, hm.constant, hm.growth), (0.5, 1.0, 2.0, 2.0));
    }
}
