//! Euler–Maclaurin summation for weighted sums of Hurwitz zeta functions,
//! `sum_r w_r ζ(s, a_r)`, evaluated as Taylor jets in `s`.
//!
//! All shifts share one cutoff `N`. When the weights sum to zero the pole
//! terms cancel analytically and the combination is evaluated through the
//! entire function `(x^{1-s} - 1)/(s - 1)`, so `s = 1` is a regular point.

use super::gamma::BERNOULLI_EVEN;
use crate::error::{Error, Result};
use crate::jet::Jet;
use num_complex::Complex64;

/// Number of Bernoulli correction terms.
pub const EM_CORRECTIONS: usize = 8;
const MIN_CUTOFF: usize = 20;
const MAX_CUTOFF: usize = 4_000_000;
/// Below this distance from `s = 1` a zero-sum combination switches to the
/// power-series form of its tail.
const NEAR_ONE: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub(crate) struct EmOutput {
    pub jet: Jet,
    pub error_bound: f64,
    pub terms_used: usize,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Heuristic bound on the remainder after `EM_CORRECTIONS` terms: the first
/// omitted term times `|s + 2K + 1| / (σ + 2K + 1)`.
fn remainder_bound(s: Complex64, parts: &[(f64, Complex64)], n: usize) -> Option<f64> {
    let k = EM_CORRECTIONS + 1;
    let m = 2 * k - 1;
    let denom = s.re + m as f64;
    if denom <= 0.0 {
        return None;
    }
    let poch: f64 = (0..m).map(|i| (s + i as f64).norm()).product();
    let coeff = BERNOULLI_EVEN[k - 1].abs() / factorial(2 * k);
    let ratio = (s + m as f64).norm() / denom;
    let mut total = 0.0;
    for &(a, w) in parts {
        let x = n as f64 + a;
        total += w.norm() * coeff * poch * x.powf(-s.re - m as f64) * ratio;
    }
    Some(total)
}

fn choose_cutoff(s: Complex64, parts: &[(f64, Complex64)], target: f64) -> Result<(usize, f64)> {
    let mut n = MIN_CUTOFF.max((s.im.abs() / 2.0).ceil() as usize);
    let mut best = f64::INFINITY;
    loop {
        match remainder_bound(s, parts, n) {
            Some(b) => {
                best = best.min(b);
                if b <= target {
                    return Ok((n, b));
                }
            }
            None => {
                return Err(Error::PrecisionUnreachable { target, best });
            }
        }
        if n >= MAX_CUTOFF {
            return Err(Error::PrecisionUnreachable { target, best });
        }
        n = ((n as f64) * 1.25).ceil() as usize;
        n = n.min(MAX_CUTOFF);
    }
}

/// Jet of `(x^{-u} - 1)/u` in `s` where `u = s - 1`, from its power series.
fn tail_zero_sum_jet(u: Complex64, l: f64) -> Jet {
    // F(u) = sum_{k>=1} (-L)^k u^{k-1} / k!
    // F^{(j)}(u)/j! = sum_{k>=j+1} (-L)^k C(k-1, j) u^{k-1-j} / k!
    let mut out = Jet::zero();
    let terms = 48;
    let mut upow_cache = vec![Complex64::new(1.0, 0.0); terms + 1];
    for i in 1..=terms {
        upow_cache[i] = upow_cache[i - 1] * u;
    }
    for j in 0..out.c.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut coef = 1.0; // (-L)^k / k!
        for k in 1..=terms {
            coef *= -l / k as f64;
            if k < j + 1 {
                continue;
            }
            let binom = binomial(k - 1, j);
            acc += upow_cache[k - 1 - j] * (coef * binom);
        }
        out.c[j] = acc;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Jet of `x^{-s}` (value only when `derivs` is false).
#[inline]
fn power_jet(s: Complex64, l: f64, derivs: bool) -> Jet {
    if derivs {
        Jet::exp_neg_scaled(s, l)
    } else {
        Jet::constant((-s * l).exp())
    }
}

/// `sum_r w_r ζ(s, a_r)` with every `a_r ∈ (0, 1]`.
pub(crate) fn em_combination(
    s: Complex64,
    parts: &[(f64, Complex64)],
    target: f64,
    derivs: bool,
) -> Result<EmOutput> {
    if !(target > 0.0) {
        return Err(Error::InvalidInput(
            "target precision must be positive".into(),
        ));
    }
    let weight_sum: Complex64 = parts.iter().map(|p| p.1).sum();
    let weight_scale: f64 = parts.iter().map(|p| p.1.norm()).sum::<f64>().max(1e-300);
    let zero_sum = weight_sum.norm() <= 1e-14 * weight_scale;
    let u = s - 1.0;
    if !zero_sum && u.norm() == 0.0 {
        return Err(Error::PoleAtOne);
    }
    let (n, bound) = choose_cutoff(s, parts, target)?;

    let var = Jet::variable(s);
    let one = Jet::constant(Complex64::new(1.0, 0.0));
    let mut total = Jet::zero();
    for &(a, w) in parts {
        if w.norm() == 0.0 {
            continue;
        }
        let mut acc = Jet::zero();
        for k in 0..n {
            acc += power_jet(s, (k as f64 + a).ln(), derivs);
        }
        let x = n as f64 + a;
        let lx = x.ln();
        let xs = power_jet(s, lx, derivs);
        // x^{1-s}/(s-1); the -1/(s-1) part is dropped for zero-sum weights,
        // where it cancels across residues.
        let tail = if zero_sum && u.norm() < NEAR_ONE {
            tail_zero_sum_jet(u, lx)
        } else if zero_sum {
            (xs * x - one) / (var - one)
        } else {
            (xs * x) / (var - one)
        };
        acc += tail;
        acc += xs * 0.5;
        // Bernoulli corrections: B_2k/(2k)! (s)_{2k-1} x^{-s-2k+1}
        let mut poch = var;
        let mut xpow = xs * (1.0 / x);
        for k in 1..=EM_CORRECTIONS {
            if k > 1 {
                let i = (2 * k - 3) as f64;
                poch = poch
                    * (var + Jet::constant(Complex64::new(i, 0.0)))
                    * (var + Jet::constant(Complex64::new(i + 1.0, 0.0)));
                xpow = xpow * (1.0 / (x * x));
            }
            let coeff = BERNOULLI_EVEN[k - 1] / factorial(2 * k);
            acc += poch * xpow * coeff;
        }
        total += acc * w;
    }
    if !derivs {
        for c in total.c.iter_mut().skip(1) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    Ok(EmOutput {
        jet: total,
        error_bound: bound,
        terms_used: n * parts.len(),
    })
}
