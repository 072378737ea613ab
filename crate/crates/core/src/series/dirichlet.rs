//! General Dirichlet series `sum a_n e^{-λ_n s}` with totally multiplicative
//! coefficients and additive exponents, their truncations and Euler partial
//! products.

use super::primes::{factorize, primes_up_to, smallest_factor_table};
use super::{DirichletCharacter, EvalResult};
use crate::error::{Error, Result};
use crate::jet::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientRule {
    Ones,
    Character(DirichletCharacter),
    /// `a_1, ..., a_len`.
    Custom(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExponentRule {
    Log,
    /// `λ_n = c ln n`.
    ScaledLog(f64),
    /// `λ_1, ..., λ_len`.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralDirichletSeries {
    pub name: String,
    pub coefficients: CoefficientRule,
    pub exponents: ExponentRule,
    /// Declared abscissa of convergence; never inferred.
    pub sigma_c: f64,
}

impl GeneralDirichletSeries {
    /// `a_n = 1`, `λ_n = ln n`: the series of `ζ`.
    pub fn classical() -> Self {
        GeneralDirichletSeries {
            name: "zeta".into(),
            coefficients: CoefficientRule::Ones,
            exponents: ExponentRule::Log,
            sigma_c: 1.0,
        }
    }

    pub fn character(chi: DirichletCharacter) -> Self {
        GeneralDirichletSeries {
            name: format!("L(s, chi mod {})", chi.modulus),
            coefficients: CoefficientRule::Character(chi),
            exponents: ExponentRule::Log,
            sigma_c: 0.0,
        }
    }

    pub fn coefficient(&self, n: u64) -> Option<Complex64> {
        if n == 0 {
            return None;
        }
        match &self.coefficients {
            CoefficientRule::Ones => Some(Complex64::new(1.0, 0.0)),
            CoefficientRule::Character(chi) => Some(chi.value(n)),
            CoefficientRule::Custom(v) => v.get(n as usize - 1).copied(),
        }
    }

    pub fn exponent(&self, n: u64) -> Option<f64> {
        if n == 0 {
            return None;
        }
        match &self.exponents {
            ExponentRule::Log => Some((n as f64).ln()),
            ExponentRule::ScaledLog(c) => Some(c * (n as f64).ln()),
            ExponentRule::Custom(v) => v.get(n as usize - 1).copied(),
        }
    }

    /// Largest index for which both rules are defined.
    pub fn table_len(&self) -> Option<usize> {
        let a = match &self.coefficients {
            CoefficientRule::Custom(v) => Some(v.len()),
            _ => None,
        };
        let l = match &self.exponents {
            ExponentRule::Custom(v) => Some(v.len()),
            _ => None,
        };
        match (a, l) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    fn check_cutoff(&self, cutoff: usize) -> Result<()> {
        if let Some(len) = self.table_len() {
            if cutoff > len {
                return Err(Error::CutoffExceedsTable { len, cutoff });
            }
        }
        Ok(())
    }

    fn max_abs_coefficient(&self) -> f64 {
        match &self.coefficients {
            CoefficientRule::Custom(v) => v.iter().map(|c| c.norm()).fold(0.0, f64::max),
            _ => 1.0,
        }
    }

    /// Bound on `|sum_{n > cutoff} a_n e^{-λ_n s}|`. Logarithmic exponents use
    /// the integral comparison, non-principal characters use partial
    /// summation; tabulated exponents fall back to a geometric estimate from
    /// the last spacing.
    fn tail_bound(&self, s: Complex64, cutoff: usize) -> f64 {
        let n = cutoff as f64;
        let scale = match self.exponents {
            ExponentRule::Log => Some(1.0),
            ExponentRule::ScaledLog(c) => Some(c),
            ExponentRule::Custom(_) => None,
        };
        if let (Some(c), CoefficientRule::Character(chi)) = (scale, &self.coefficients) {
            if !chi.is_principal() {
                let sigma = c * s.re;
                let partial = chi.modulus as f64;
                return partial * n.powf(-sigma) * (1.0 + c * s.norm() / sigma);
            }
        }
        if let Some(c) = scale {
            let sigma = c * s.re;
            return if sigma > 1.0 {
                self.max_abs_coefficient() * n.powf(1.0 - sigma) / (sigma - 1.0)
            } else {
                f64::INFINITY
            };
        }
        if cutoff < 2 {
            return f64::INFINITY;
        }
        let ln = self.exponent(cutoff as u64).unwrap_or_default();
        let lp = self.exponent(cutoff as u64 - 1).unwrap_or_default();
        let ratio = (-(ln - lp) * s.re).exp();
        let last = self.max_abs_coefficient() * (-ln * s.re).exp();
        if ratio < 1.0 {
            last * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        }
    }

    pub fn has_real_coefficients(&self, cutoff: usize) -> bool {
        match &self.coefficients {
            CoefficientRule::Ones => true,
            CoefficientRule::Character(chi) => chi.is_real(),
            CoefficientRule::Custom(v) => v.iter().take(cutoff).all(|c| c.im == 0.0),
        }
    }

    /// Jet of the finite sum `sum_{n <= cutoff} a_n e^{-λ_n s}`.
    pub(crate) fn truncated_jet(&self, s: Complex64, cutoff: usize) -> Result<Jet> {
        self.check_cutoff(cutoff)?;
        let mut acc = Jet::zero();
        for n in 1..=cutoff as u64 {
            let a = self.coefficient(n).unwrap_or_default();
            if a.norm() == 0.0 {
                continue;
            }
            let l = self.exponent(n).unwrap_or_default();
            acc += Jet::exp_neg_scaled(s, l) * a;
        }
        Ok(acc)
    }
}

/// Partial sum `sum_{n=1}^{N} a_n e^{-λ_n s}` inside the half-plane of
/// convergence, with a geometric-tail error estimate.
pub fn eval_series(
    series: &GeneralDirichletSeries,
    s: Complex64,
    cutoff: usize,
) -> Result<EvalResult> {
    if s.re <= series.sigma_c {
        return Err(Error::OutsideConvergence {
            re: s.re,
            sigma_c: series.sigma_c,
        });
    }
    if cutoff == 0 {
        return Err(Error::InvalidInput("cutoff must be at least 1".into()));
    }
    series.check_cutoff(cutoff)?;
    let mut acc = Complex64::new(0.0, 0.0);
    // pairwise-ish accumulation: sum blocks separately to limit drift
    let mut block = Complex64::new(0.0, 0.0);
    for n in 1..=cutoff as u64 {
        let a = series.coefficient(n).unwrap_or_default();
        if a.norm() != 0.0 {
            let l = series.exponent(n).unwrap_or_default();
            block += a * (-s * l).exp();
        }
        if n % 1024 == 0 {
            acc += block;
            block = Complex64::new(0.0, 0.0);
        }
    }
    acc += block;

    let error_bound = series.tail_bound(s, cutoff);
    Ok(EvalResult {
        value: acc,
        error_bound,
        terms_used: cutoff,
    })
}

/// `f_n(s) = prod_{p <= n} (1 - a_p e^{-λ_p s})`; `1 / f_n(s)` approximates
/// the series for `Re s > max(σ_c, 1)`.
pub fn euler_partial_product(
    series: &GeneralDirichletSeries,
    s: Complex64,
    n: u64,
) -> Result<Complex64> {
    let primes = primes_up_to(n);
    if let (Some(&p), Some(len)) = (primes.last(), series.table_len()) {
        if p as usize > len {
            return Err(Error::CutoffExceedsTable {
                len,
                cutoff: p as usize,
            });
        }
    }
    let mut prod = Complex64::new(1.0, 0.0);
    for p in primes {
        let a = series.coefficient(p).unwrap_or_default();
        let l = series.exponent(p).unwrap_or_default();
        prod *= Complex64::new(1.0, 0.0) - a * (-s * l).exp();
    }
    Ok(prod)
}

/// Indices `n <= n_max` where `λ_n` differs from `sum α_i λ_{p_i}` over the
/// prime factorization of `n`.
pub fn lambda_additivity_check(series: &GeneralDirichletSeries, n_max: u64) -> Vec<u64> {
    let limit = match series.table_len() {
        Some(len) => n_max.min(len as u64),
        None => n_max,
    };
    if limit < 1 {
        return Vec::new();
    }
    let spf = smallest_factor_table(limit as usize);
    let mut violations = Vec::new();
    if let Some(l1) = series.exponent(1) {
        if l1.abs() > 1e-12 {
            violations.push(1);
        }
    }
    for n in 2..=limit {
        let ln = series.exponent(n).unwrap_or_default();
        let expected: f64 = factorize(n as usize, &spf)
            .into_iter()
            .map(|(p, alpha)| alpha as f64 * series.exponent(p).unwrap_or_default())
            .sum();
        if (ln - expected).abs() > 1e-9 * (1.0 + ln.abs()) {
            violations.push(n);
        }
    }
    violations
}

/// Pairs `(m, n)` with `m <= n`, `mn <= n_max` where `a_{mn} != a_m a_n`;
/// `(1, 1)` is reported when `a_1 != 1`.
pub fn multiplicativity_check(series: &GeneralDirichletSeries, n_max: u64) -> Vec<(u64, u64)> {
    let limit = match series.table_len() {
        Some(len) => n_max.min(len as u64),
        None => n_max,
    };
    let mut out = Vec::new();
    let a1 = series.coefficient(1).unwrap_or_default();
    if (a1 - 1.0).norm() > 1e-12 {
        out.push((1, 1));
    }
    let mut m = 2;
    while m * m <= limit {
        let am = series.coefficient(m).unwrap_or_default();
        let mut n = m;
        while m * n <= limit {
            let an = series.coefficient(n).unwrap_or_default();
            let amn = series.coefficient(m * n).unwrap_or_default();
            if (amn - am * an).norm() > 1e-10 * (1.0 + amn.norm()) {
                out.push((m, n));
            }
            n += 1;
        }
        m += 1;
    }
    out
}
