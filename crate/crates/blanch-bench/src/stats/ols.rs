use super::special::f_survival;
use super::StatsError;
use serde::{Deserialize, Serialize};

/// Single-predictor least-squares fit with the regression F-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub f_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Conventional two-level significance bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    /// p < 0.05
    Significant,
    /// 0.05 <= p < 0.10
    Trend,
    NotSignificant,
}

impl Significance {
    pub fn classify(p_value: f64) -> Self {
        if p_value < 0.05 {
            Significance::Significant
        } else if p_value < 0.10 {
            Significance::Trend
        } else {
            Significance::NotSignificant
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Significance::Significant => "significant",
            Significance::Trend => "trend",
            Significance::NotSignificant => "not significant",
        }
    }
}

impl OlsResult {
    pub fn significance(&self) -> Significance {
        Significance::classify(self.p_value)
    }
}

/// Coefficient of determination 1 - SS_res/SS_tot, with SS_tot about the
/// mean of `y`.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64, StatsError> {
    if y.len() != y_hat.len() {
        return Err(StatsError::DimensionMismatch {
            context: "r_squared",
            expected: y.len(),
            actual: y_hat.len(),
        });
    }
    if y.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            actual: y.len(),
        });
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|&v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(StatsError::ConstantInput("y"));
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(&v, &w)| (v - w).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Fits y = slope * x + intercept and tests slope = 0 with
/// F = (n-2) R^2 / (1 - R^2) on (1, n-2) degrees of freedom.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<OlsResult, StatsError> {
    let n = x.len();
    if y.len() != n {
        return Err(StatsError::DimensionMismatch {
            context: "ols_fit",
            expected: n,
            actual: y.len(),
        });
    }
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, actual: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidParameter(
            "ols_fit inputs must be finite".into(),
        ));
    }
    let x_mean = x.iter().sum::<f64>() / n as f64;
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|&v| (v - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(StatsError::ConstantInput("x"));
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (a - x_mean) * (b - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let ss_tot: f64 = y.iter().map(|&v| (v - y_mean).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - slope * a - intercept).powi(2))
        .sum();
    // Constant y fits exactly with zero slope; report no evidence of trend.
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dof = (n - 2) as f64;
    let f_stat = if r2 >= 1.0 {
        f64::INFINITY
    } else {
        dof * r2 / (1.0 - r2)
    };
    let p_value = f_survival(f_stat, 1.0, dof)?;
    Ok(OlsResult {
        slope,
        intercept,
        r2,
        f_stat,
        p_value,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 3.0 * v + 1.0).collect();
        let fit = ols_fit(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_eq!(fit.r2, 1.0);
        assert_eq!(fit.p_value, 0.0);
        assert_eq!(fit.significance(), Significance::Significant);
    }

    #[test]
    fn r_squared_hand_computed_case() {
        let y = [1.0, 2.0, 3.0, 4.0];
        let y_hat = [1.1, 1.9, 3.2, 3.8];
        // SS_res = 0.1, SS_tot = 5.0.
        assert_relative_eq!(r_squared(&y, &y_hat).unwrap(), 0.98, epsilon = 1e-12);
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        let mean = [2.5; 4];
        assert_eq!(r_squared(&y, &mean).unwrap(), 0.0);
    }

    #[test]
    fn r_squared_rejects_bad_input() {
        assert!(matches!(
            r_squared(&[1.0, 1.0], &[1.0, 2.0]),
            Err(StatsError::ConstantInput("y"))
        ));
        assert!(r_squared(&[1.0], &[1.0]).is_err());
        assert!(r_squared(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn fit_rejects_constant_x_and_tiny_samples() {
        assert!(matches!(
            ols_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantInput("x"))
        ));
        assert!(matches!(
            ols_fit(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewSamples { needed: 3, actual: 2 })
        ));
    }

    #[test]
    fn least_squares_minimizes_residual_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..30).map(|i| 0.3 * i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 1.7 * v - 0.4 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fit = ols_fit(&x, &y).unwrap();
        let ss = |slope: f64, intercept: f64| -> f64 {
            x.iter()
                .zip(&y)
                .map(|(&a, &b)| (b - slope * a - intercept).powi(2))
                .sum()
        };
        let best = ss(fit.slope, fit.intercept);
        for (ds, di) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(ss(fit.slope + ds, fit.intercept + di) > best);
        }
    }

    #[test]
    fn null_data_p_value_matches_permutation_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let x: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..24).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let fit = ols_fit(&x, &y).unwrap();

        let mut permuted = y.clone();
        let mut hits = 0usize;
        const DRAWS: usize = 10_000;
        for _ in 0..DRAWS {
            permuted.shuffle(&mut rng);
            if ols_fit(&x, &permuted).unwrap().r2 >= fit.r2 {
                hits += 1;
            }
        }
        let permutation_p = hits as f64 / DRAWS as f64;
        assert!(
            (fit.p_value - permutation_p).abs() < 0.02,
            "parametric {} vs permutation {}",
            fit.p_value,
            permutation_p
        );
    }

    #[test]
    fn significance_thresholds() {
        assert_eq!(Significance::classify(0.049), Significance::Significant);
        assert_eq!(Significance::classify(0.05), Significance::Trend);
        assert_eq!(Significance::classify(0.099), Significance::Trend);
        assert_eq!(Significance::classify(0.10), Significance::NotSignificant);
        assert_eq!(Significance::Significant.label(), "significant");
    }

    #[test]
    fn constant_y_reports_no_trend() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [5.0; 4];
        let fit = ols_fit(&x, &y).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r2, 0.0);
        assert_eq!(fit.p_value, 1.0);
    }
}
