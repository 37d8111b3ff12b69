//! Shape diagnostics for regret curves.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// One point of a regret curve with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub horizon: u64,
    pub regret: f64,
    pub std_error: f64,
}

/// Least-squares fit `y = intercept + slope * f(T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn fit_against(points: &[CurvePoint], f: impl Fn(f64) -> f64) -> Fit {
    let xs: Vec<f64> = points.iter().map(|p| f(p.horizon as f64)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.regret).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Fit {
        intercept: my - slope * mx,
        slope,
        r_squared,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthDiagnostics {
    /// `R(T_{i+1}) - R(T_i)`.
    pub differences: Vec<f64>,
    pub difference_se: Vec<f64>,
    /// Second differences `d_{i+1} - d_i` with their standard errors.
    pub second_differences: Vec<f64>,
    pub second_difference_se: Vec<f64>,
    /// No difference exceeds its predecessor by more than `Z95` standard errors.
    pub non_increasing: bool,
    pub log_fit: Fit,
    pub sqrt_fit: Fit,
}

/// Differences of a regret curve on a geometric grid. Logarithmic growth
/// shows as roughly constant differences; `sqrt(T)` growth as differences
/// growing by `sqrt(2)` per doubling. Points are treated as independent.
pub fn logarithmic_growth_check(points: &[CurvePoint]) -> Result<GrowthDiagnostics> {
    if points.len() < 2 {
        return Err(invalid("growth check needs at least two checkpoints"));
    }
    if points.windows(2).any(|w| w[1].horizon <= w[0].horizon) {
        return Err(invalid("checkpoints must be strictly increasing"));
    }
    let var: Vec<f64> = points.iter().map(|p| p.std_error * p.std_error).collect();
    let differences: Vec<f64> = points.windows(2).map(|w| w[1].regret - w[0].regret).collect();
    let difference_se: Vec<f64> = var.windows(2).map(|w| (w[0] + w[1]).sqrt()).collect();
    let second_differences: Vec<f64> = differences.windows(2).map(|w| w[1] - w[0]).collect();
    let second_difference_se: Vec<f64> = var.windows(3).map(|w| (w[0] + 4.0 * w[1] + w[2]).sqrt()).collect();
    let non_increasing = second_differences
        .iter()
        .zip(&second_difference_se)
        .all(|(d, se)| *d <= Z95 * se);
    Ok(GrowthDiagnostics {
        differences,
        difference_se,
        second_differences,
        second_difference_se,
        non_increasing,
        log_fit: fit_against(points, f64::ln),
        sqrt_fit: fit_against(points, f64::sqrt),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeTest {
    pub slope: f64,
    pub slope_se: f64,
    pub z: f64,
    /// `|z| > Z95`.
    pub significant: bool,
}

impl SlopeTest {
    pub fn significant_growth(&self) -> bool {
        self.significant && self.slope > 0.0
    }
}

/// Weighted regression of regret on `T` with weights `1 / se^2`; the slope is
/// tested against zero at the two-sided 95% level.
pub fn linear_trend_test(points: &[CurvePoint]) -> Result<SlopeTest> {
    if points.len() < 2 {
        return Err(invalid("slope test needs at least two points"));
    }
    if points.iter().any(|p| !(p.std_error > 0.0)) {
        return Err(invalid("slope test needs positive standard errors"));
    }
    let w: Vec<f64> = points.iter().map(|p| 1.0 / (p.std_error * p.std_error)).collect();
    let sw: f64 = w.iter().sum();
    let mx = points.iter().zip(&w).map(|(p, w)| w * p.horizon as f64).sum::<f64>() / sw;
    let my = points.iter().zip(&w).map(|(p, w)| w * p.regret).sum::<f64>() / sw;
    let sxx: f64 = points.iter().zip(&w).map(|(p, w)| w * (p.horizon as f64 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(invalid("slope test needs distinct horizons"));
    }
    let sxy: f64 = points.iter().zip(&w).map(|(p, w)| w * (p.horizon as f64 - mx) * (p.regret - my)).sum();
    let slope = sxy / sxx;
    let slope_se = (1.0 / sxx).sqrt();
    let z = slope / slope_se;
    Ok(SlopeTest {
        slope,
        slope_se,
        z,
        significant: z.abs() > Z95,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64) -> Vec<CurvePoint> {
        [1000u64, 2000, 4000, 8000, 16000]
            .iter()
            .map(|&t| CurvePoint {
                horizon: t,
                regret: f(t as f64),
                std_error: 0.1,
            })
            .collect()
    }

    #[test]
    fn log_curve_has_equal_differences() {
        let d = logarithmic_growth_check(&curve(|t| 3.0 * t.ln())).unwrap();
        for x in &d.differences {
            assert!((x - 3.0 * 2f64.ln()).abs() < 1e-9);
        }
        assert!(d.non_increasing);
        assert!((d.log_fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_curve_differences_grow_by_root_two() {
        let d = logarithmic_growth_check(&curve(|t| 2.0 * t.sqrt())).unwrap();
        for w in d.differences.windows(2) {
            assert!((w[1] / w[0] - 2f64.sqrt()).abs() < 1e-9);
        }
        assert!(!d.non_increasing);
    }

    #[test]
    fn slope_test() {
        let flat = linear_trend_test(&curve(|_| 5.0)).unwrap();
        assert!(!flat.significant && flat.slope.abs() < 1e-12);
        let rising = linear_trend_test(&curve(|t| 1e-3 * t)).unwrap();
        assert!(rising.significant_growth());
    }
}
