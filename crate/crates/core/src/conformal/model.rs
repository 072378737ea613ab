use crate::error::{Error, Result};
use crate::series::primes::primes_up_to;
use crate::series::{AnalyticFunctionHandle, GeneralDirichletSeries};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Circle nodes for the quadratic model fit.
const FIT_NODES: usize = 64;
/// Laurent indices `0..=FIT_DEGREE` belong to the analytic part of `h`.
const FIT_DEGREE: usize = 12;
/// Residual above which the quadratic model is considered broken.
pub const BREAKDOWN_RESIDUAL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFitRow {
    pub r: f64,
    /// Least-squares constant fit of `h = f / (s - s0)²` on the circle.
    pub h_fit: Complex64,
    /// Root-mean-square `|h|` on the circle; tends to `|h(s0)|` for a true
    /// double zero and diverges otherwise.
    pub h_abs: f64,
    /// Norm of the Laurent coefficients of `h` outside `0..=12`, relative to
    /// `|h_fit|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub center: Complex64,
    pub rows: Vec<ModelFitRow>,
    /// Largest tested radius at which the residual reaches
    /// [`BREAKDOWN_RESIDUAL`], if any.
    pub breakdown_radius: Option<f64>,
}

impl ModelFit {
    pub fn residual_at(&self, r: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|row| row.r == r)
            .map(|row| row.residual)
    }
}

/// Fits `f(s) = (s - s0)² h(s)` on circles of the given radii.
pub fn local_model_fit(
    f: &AnalyticFunctionHandle,
    s0: Complex64,
    radii: &[f64],
) -> Result<ModelFit> {
    let n = FIT_NODES;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fit radius {r} must be positive"
            )));
        }
        let h: Vec<Complex64> = (0..n)
            .map(|j| {
                let w = Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
                f.value(s0 + w).map(|v| v / (w * w))
            })
            .collect::<Result<_>>()?;
        // Laurent coefficient of index k (times r^k) by DFT
        let coeff = |k: i64| -> Complex64 {
            h.iter()
                .enumerate()
                .map(|(j, v)| {
                    v * Complex64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / n as f64)
                })
                .sum::<Complex64>()
                / n as f64
        };
        let half = (n / 2) as i64;
        let mut outside = 0.0;
        let mut total = 0.0;
        let mut c0 = Complex64::new(0.0, 0.0);
        for k in -half + 1..=half {
            let c = coeff(k);
            total += c.norm_sqr();
            if k == 0 {
                c0 = c;
            }
            if k < 0 || k > FIT_DEGREE as i64 {
                outside += c.norm_sqr();
            }
        }
        rows.push(ModelFitRow {
            r,
            h_fit: c0,
            h_abs: total.sqrt(),
            residual: outside.sqrt() / c0.norm(),
        });
    }
    let breakdown_radius = rows
        .iter()
        .filter(|row| !(row.residual < BREAKDOWN_RESIDUAL))
        .map(|row| row.r)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        });
    Ok(ModelFit {
        center: s0,
        rows,
        breakdown_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub max_log_abs: f64,
    pub last_log_abs: f64,
    /// Least-squares slope of `log |ratio|` against `log p`.
    pub slope: f64,
}

/// `f_p(s') / f_p(s)` along the primes, in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioDiagnostic {
    pub s: Complex64,
    pub s_image: Complex64,
    pub primes: Vec<u64>,
    pub log_abs: Vec<f64>,
    /// Continuous argument of the partial ratio.
    pub arg: Vec<f64>,
    pub stats: RatioStats,
}

/// `ln(1 + z)` without cancellation for small `z`.
fn ln_1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    Complex64::new(re, z.im.atan2(1.0 + z.re))
}

/// `ln (1 - a e^{-λ s})`; errors on a vanishing factor.
fn log_factor(a: Complex64, l: f64, s: Complex64, p: u64) -> Result<Complex64> {
    let x = a * (-s * l).exp();
    if (Complex64::new(1.0, 0.0) - x).norm() < 1e-14 {
        return Err(Error::FactorVanishes { p });
    }
    Ok(ln_1p(-x))
}

/// The sequence `f_n(s_image) / f_n(s)` over primes `n ≤ n_max`, where
/// `f_n(s) = ∏_{p ≤ n} (1 - a_p e^{-λ_p s})`.
pub fn ratio_divergence_diagnostic(
    series: &GeneralDirichletSeries,
    s: Complex64,
    s_image: Complex64,
    n_max: u64,
) -> Result<RatioDiagnostic> {
    if n_max < 2 {
        return Err(Error::InvalidInput("n_max must be at least 2".into()));
    }
    if (s - s_image).re < 0.0 {
        return Err(Error::InvalidInput(
            "Re(s - s_image) must not be negative".into(),
        ));
    }
    let primes = primes_up_to(n_max);
    if let (Some(&p), Some(len)) = (primes.last(), series.table_len()) {
        if p as usize > len {
            return Err(Error::CutoffExceedsTable {
                len,
                cutoff: p as usize,
            });
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut log_abs = Vec::with_capacity(primes.len());
    let mut arg = Vec::with_capacity(primes.len());
    for &p in &primes {
        let a = series.coefficient(p).unwrap_or_default();
        let l = series.exponent(p).unwrap_or_default();
        acc += log_factor(a, l, s_image, p)? - log_factor(a, l, s, p)?;
        log_abs.push(acc.re);
        arg.push(acc.im);
    }
    let stats = trend(&primes, &log_abs);
    Ok(RatioDiagnostic {
        s,
        s_image,
        primes,
        log_abs,
        arg,
        stats,
    })
}

fn trend(primes: &[u64], log_abs: &[f64]) -> RatioStats {
    let xs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = log_abs.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(log_abs)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    RatioStats {
        max_log_abs: log_abs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        last_log_abs: *log_abs.last().unwrap_or(&0.0),
        slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log1p_small_argument() {
        let z = Complex64::new(1e-17, 2e-17);
        let v = ln_1p(z);
        assert!((v.re - 1e-17).abs() < 1e-30);
        assert!((v.im - 2e-17).abs() < 1e-30);
        let w = Complex64::new(0.3, -0.4);
        assert!((ln_1p(w) - (w + 1.0).ln()).norm() < 1e-15);
    }

    #[test]
    fn identical_arguments_give_one() {
        let s = Complex64::new(2.0, 1.0);
        let d =
            ratio_divergence_diagnostic(&GeneralDirichletSeries::classical(), s, s, 100).unwrap();
        assert!(d.log_abs.iter().all(|&v| v == 0.0));
        assert_eq!(d.primes.len(), 25);
    }

    #[test]
    fn pure_square_has_no_residual() {
        let s0 = Complex64::new(0.2, 0.7);
        let f = AnalyticFunctionHandle::synthetic(crate::series::SyntheticRule::power(s0, 2));
        let fit = local_model_fit(&f, s0, &[0.1, 0.5]).unwrap();
        for row in &fit.rows {
            assert!(row.residual < 1e-12);
            assert!((row.h_fit - 1.0).norm() < 1e-12);
        }
        assert!(fit.breakdown_radius.is_none());
    }
}
