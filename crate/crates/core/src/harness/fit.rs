use crate::error::{Error, Result};

use super::ConvergenceTable;

/// Least-squares line `log2(error) = slope * log2(h) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares on `(log2 h, log2 error)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "order fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(h, e)) = points
        .iter()
        .find(|(h, e)| !(*h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite()))
    {
        return Err(Error::domain(format!(
            "order fit needs positive finite values, got h = {h}, error = {e}"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(h, _)| h.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("order fit is degenerate: all step sizes are equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(OrderFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn fit_order(table: &ConvergenceTable) -> Result<OrderFit> {
    let points: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.h, r.error)).collect();
    fit_loglog(&points)
}
