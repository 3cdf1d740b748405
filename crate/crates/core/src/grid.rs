use crate::error::{Error, Result};

/// Uniform grid `t_j = j * h` on `[0, T]` with `N_h * h <= T < (N_h + 1) * h`.
///
/// When `T / h` is not an integer the trailing piece `[t_{N_h}, T]` is not
/// part of the grid; all methods stop at `t_{N_h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    step: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, step: f64) -> Result<Self> {
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::domain(format!(
                "final time must be positive and finite, got {final_time}"
            )));
        }
        if !(step > 0.0 && step < 1.0) {
            return Err(Error::domain(format!("step size must lie in (0, 1), got {step}")));
        }
        let mut n = (final_time / step).floor() as usize;
        // floor(T / h) can be off by one after rounding of the quotient.
        while n > 0 && n as f64 * step > final_time {
            n -= 1;
        }
        while (n + 1) as f64 * step <= final_time {
            n += 1;
        }
        if n == 0 {
            return Err(Error::domain(format!(
                "step size {step} exceeds the final time {final_time}"
            )));
        }
        Ok(Self {
            final_time,
            step,
            n_steps: n,
        })
    }

    /// Grid with `h = 2^{-n}`.
    pub fn dyadic(final_time: f64, level: u32) -> Result<Self> {
        if level == 0 || level > 60 {
            return Err(Error::domain(format!("dyadic level must lie in 1..=60, got {level}")));
        }
        Self::new(final_time, (-(level as f64)).exp2())
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// `t_j = j * h`, computed by multiplication, never by accumulation.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.step
    }

    /// All nodes `t_0 ..= t_{N_h}`.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_steps + 1).map(move |j| self.node(j))
    }

    /// Index `j` with `node(j) == t` exactly, if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0) {
            return None;
        }
        let j = (t / self.step).round();
        if j > self.n_steps as f64 {
            return None;
        }
        let j = j as usize;
        (self.node(j) == t).then_some(j)
    }
}
