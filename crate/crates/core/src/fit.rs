//! Power-law fits by ordinary least squares in log₁₀–log₁₀ space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { got: usize, need: usize },
    #[error("window spans {decades:.2} decades, need at least {need}")]
    NarrowWindow { decades: f64, need: f64 },
    #[error("non-positive or non-finite sample ({x}, {y})")]
    InvalidSample { x: f64, y: f64 },
}

/// `y ≈ 10^intercept · x^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(min x, max x)` of the fitted samples.
    pub window: (f64, f64),
    pub n_points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        10f64.powf(self.intercept + self.slope * x.log10())
    }

    /// `10^intercept`.
    pub fn prefactor(&self) -> f64 {
        10f64.powf(self.intercept)
    }
}

/// Requirements on the sample set of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub min_points: usize,
    pub min_decades: f64,
}

fn check(x: &[f64], y: &[f64], req: FitWindow) -> Result<(f64, f64), FitError> {
    assert_eq!(x.len(), y.len(), "sample length mismatch");
    for (&a, &b) in x.iter().zip(y) {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(FitError::InvalidSample { x: a, y: b });
        }
    }
    if x.len() < req.min_points {
        return Err(FitError::InsufficientPoints {
            got: x.len(),
            need: req.min_points,
        });
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    // Slack for grids whose endpoints are rounded powers of ten.
    if decades < req.min_decades - 1e-9 {
        return Err(FitError::NarrowWindow {
            decades,
            need: req.min_decades,
        });
    }
    Ok((lo, hi))
}

/// Least-squares line through `(log₁₀ x, log₁₀ y)`.
pub fn fit_power_law(x: &[f64], y: &[f64], req: FitWindow) -> Result<PowerLawFit, FitError> {
    let window = check(x, y, req)?;
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        window,
        n_points: x.len(),
    })
}

/// Prefactor `c` of `y ≈ c·x^exponent` with the exponent held fixed
/// (geometric mean of `y / x^exponent`).
pub fn prefactor_fixed_exponent(x: &[f64], y: &[f64], exponent: f64) -> Result<f64, FitError> {
    check(x, y, FitWindow { min_points: 1, min_decades: 0.0 })?;
    let mean = x
        .iter()
        .zip(y)
        .map(|(a, b)| b.log10() - exponent * a.log10())
        .sum::<f64>()
        / x.len() as f64;
    Ok(10f64.powf(mean))
}

/// Logarithmically spaced grid from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (a, b) = (min.log10(), max.log10());
    (0..count)
        .map(|k| {
            if k == 0 {
                min
            } else if k + 1 == count {
                max
            } else {
                10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Linearly spaced grid from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|k| {
            if k + 1 == count {
                max
            } else {
                min + (max - min) * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOSE: FitWindow = FitWindow {
        min_points: 2,
        min_decades: 0.0,
    };

    #[test]
    fn exact_power_law() {
        let x = log_grid(1e-6, 1e-3, 10);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(1.5)).collect();
        let f = fit_power_law(&x, &y, LOOSE).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.prefactor() - 3.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.window, (1e-6, 1e-3));
        assert!((prefactor_fixed_exponent(&x, &y, 1.5).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn window_requirements() {
        let x = log_grid(1e-3, 1e-2, 10);
        let y = x.clone();
        let req = FitWindow {
            min_points: 8,
            min_decades: 2.0,
        };
        assert!(matches!(fit_power_law(&x, &y, req), Err(FitError::NarrowWindow { .. })));
        assert!(matches!(
            fit_power_law(&x[..3], &y[..3], req),
            Err(FitError::InsufficientPoints { got: 3, need: 8 })
        ));
        assert!(matches!(
            fit_power_law(&[1.0, 0.0], &[1.0, 1.0], LOOSE),
            Err(FitError::InvalidSample { .. })
        ));
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = log_grid(1e-12, 1e-4, 25);
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-12);
        assert_eq!(g[24], 1e-4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(linear_grid(0.0, 2.0, 5), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
