//! Evaluation of Dirichlet series, Hurwitz/Riemann zeta, Dirichlet L-functions
//! and the Davenport–Heilbronn function.

pub mod config;
pub mod dirichlet;
pub mod gamma;
pub mod handle;
pub(crate) mod hurwitz;
pub mod primes;

pub use dirichlet::{
    euler_partial_product, eval_series, lambda_additivity_check, multiplicativity_check,
    CoefficientRule, ExponentRule, GeneralDirichletSeries,
};
pub use handle::{derivative, AnalyticFunctionHandle, CauchyOptions, FunctionKind, SyntheticRule};

use crate::error::{Error, Result};
use crate::jet::Jet;
use hurwitz::em_combination;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_PRECISION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: Complex64,
    pub error_bound: f64,
    pub terms_used: usize,
}

/// A Dirichlet character given by its table `χ(0), ..., χ(q-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub table: Vec<Complex64>,
}

impl DirichletCharacter {
    pub fn new(modulus: u64, table: Vec<Complex64>) -> Result<Self> {
        let chi = DirichletCharacter { modulus, table };
        chi.validate()?;
        Ok(chi)
    }

    /// The character mod 5 with `χ(2) = i`.
    pub fn mod5_i() -> Self {
        let i = Complex64::i();
        DirichletCharacter {
            modulus: 5,
            table: vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                i,
                -i,
                Complex64::new(-1.0, 0.0),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.modulus;
        if q == 0 || self.table.len() as u64 != q {
            return Err(Error::ConfigInvalid(format!(
                "character table must have {} entries, found {}",
                q,
                self.table.len()
            )));
        }
        let tol = 1e-12;
        for r in 0..q {
            let v = self.table[r as usize];
            let unit = primes::gcd(r, q) == 1;
            if unit && (v.norm() - 1.0).abs() > tol {
                return Err(Error::ConfigInvalid(format!("χ({r}) must have modulus 1")));
            }
            if !unit && v.norm() > tol {
                return Err(Error::ConfigInvalid(format!(
                    "χ({r}) must vanish on non-units"
                )));
            }
        }
        for a in 0..q {
            for b in 0..q {
                let lhs = self.table[((a * b) % q) as usize];
                let rhs = self.table[a as usize] * self.table[b as usize];
                if (lhs - rhs).norm() > 1e-10 {
                    return Err(Error::MultiplicativityViolation { m: a, n: b });
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, n: u64) -> Complex64 {
        self.table[(n % self.modulus) as usize]
    }

    pub fn conj(&self) -> Self {
        DirichletCharacter {
            modulus: self.modulus,
            table: self.table.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn is_principal(&self) -> bool {
        self.table
            .iter()
            .all(|c| c.norm() < 1e-12 || (c - 1.0).norm() < 1e-12)
    }

    pub fn is_real(&self) -> bool {
        self.table.iter().all(|c| c.im.abs() < 1e-14)
    }
}

fn check_shift(a: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "Hurwitz shift {a} outside (0, 1]"
        )));
    }
    Ok(())
}

fn to_result(jet: Jet, bound: f64, terms: usize) -> EvalResult {
    EvalResult {
        value: jet.value(),
        error_bound: bound,
        terms_used: terms.max(1),
    }
}

/// `ζ(s, a)` by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: Complex64, a: f64, target_precision: f64) -> Result<EvalResult> {
    check_shift(a)?;
    let out = em_combination(s, &[(a, Complex64::new(1.0, 0.0))], target_precision, false)?;
    Ok(to_result(out.jet, out.error_bound, out.terms_used))
}

pub(crate) fn hurwitz_jet(s: Complex64, a: f64, target: f64) -> Result<(Jet, f64, usize)> {
    check_shift(a)?;
    let out = em_combination(s, &[(a, Complex64::new(1.0, 0.0))], target, true)?;
    Ok((out.jet, out.error_bound, out.terms_used))
}

pub fn riemann_zeta(s: Complex64, target_precision: f64) -> Result<EvalResult> {
    hurwitz_zeta(s, 1.0, target_precision)
}

/// `q^{-s} sum_{r=1}^{q} w_r ζ(s, r/q)` as a jet (derivatives included when
/// `derivs` is set).
pub(crate) fn residue_combination(
    s: Complex64,
    modulus: u64,
    weights: &[Complex64],
    target: f64,
    derivs: bool,
) -> Result<(Jet, f64, usize)> {
    let q = modulus as f64;
    let scale = (-s * q.ln()).exp();
    // keep the overall bound at `target` after scaling by |q^{-s}|
    let inner_target = target / scale.norm().max(1e-300);
    let parts: Vec<(f64, Complex64)> = (1..=modulus)
        .map(|r| (r as f64 / q, weights[(r % modulus) as usize]))
        .filter(|p| p.1.norm() > 0.0)
        .collect();
    let out = em_combination(s, &parts, inner_target, derivs)?;
    let scale_jet = if derivs {
        Jet::exp_neg_scaled(s, q.ln())
    } else {
        Jet::constant(scale)
    };
    let mut jet = out.jet * scale_jet;
    if !derivs {
        for c in jet.c.iter_mut().skip(1) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    Ok((jet, out.error_bound * scale.norm(), out.terms_used))
}

/// `L(s, χ)` through the Hurwitz decomposition. Only the principal character
/// has a pole at `s = 1`.
pub fn dirichlet_l(
    s: Complex64,
    chi: &DirichletCharacter,
    target_precision: f64,
) -> Result<EvalResult> {
    let (jet, bound, terms) =
        residue_combination(s, chi.modulus, &chi.table, target_precision, false)?;
    Ok(to_result(jet, bound, terms))
}

/// `κ = (sqrt(10 - 2 sqrt 5) - 2) / (sqrt 5 - 1)`.
pub fn davenport_heilbronn_kappa() -> f64 {
    let r5 = 5f64.sqrt();
    ((10.0 - 2.0 * r5).sqrt() - 2.0) / (r5 - 1.0)
}

/// Residue weights of `D(s) = ((1 - iκ)/2) L(s, χ) + ((1 + iκ)/2) L(s, χ̄)`.
pub(crate) fn davenport_heilbronn_weights() -> Vec<Complex64> {
    let kappa = davenport_heilbronn_kappa();
    let chi = DirichletCharacter::mod5_i();
    let c1 = Complex64::new(1.0, -kappa) * 0.5;
    let c2 = Complex64::new(1.0, kappa) * 0.5;
    chi.table.iter().map(|&x| c1 * x + c2 * x.conj()).collect()
}

pub fn davenport_heilbronn(s: Complex64, target_precision: f64) -> Result<EvalResult> {
    let w = davenport_heilbronn_weights();
    let (jet, bound, terms) = residue_combination(s, 5, &w, target_precision, false)?;
    Ok(to_result(jet, bound, terms))
}

/// `ln` of the gamma factor `(5/π)^{(s+1)/2} Γ((s+1)/2)` of the odd
/// characters mod 5.
fn dh_gamma_factor_ln(s: Complex64) -> Complex64 {
    let h = (s + 1.0) * 0.5;
    h * (5.0 / PI).ln() + gamma::ln_gamma(h)
}

/// Completed function `Λ(s) = (5/π)^{(s+1)/2} Γ((s+1)/2) D(s)`.
pub fn davenport_heilbronn_completed(s: Complex64, target_precision: f64) -> Result<Complex64> {
    let d = davenport_heilbronn(s, target_precision)?;
    Ok(dh_gamma_factor_ln(s).exp() * d.value)
}

/// `|D(s) - X(s) D(1-s)|` with `X(s) = G(1-s)/G(s)` the gamma-factor ratio;
/// vanishes exactly when `Λ(s) = Λ(1-s)`.
pub fn davenport_heilbronn_functional_residual(s: Complex64, target_precision: f64) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let d = davenport_heilbronn(s, target_precision)?.value;
    let d_refl = davenport_heilbronn(one - s, target_precision)?.value;
    let x = (dh_gamma_factor_ln(one - s) - dh_gamma_factor_ln(s)).exp();
    Ok((d - x * d_refl).norm())
}

/// `|ζ(s) - 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)|`.
pub fn zeta_functional_residual(s: Complex64, target_precision: f64) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let z = riemann_zeta(s, target_precision)?.value;
    let z_refl = riemann_zeta(one - s, target_precision)?.value;
    let factor = (s * 2f64.ln() + (s - 1.0) * PI.ln() + gamma::ln_gamma(one - s)).exp()
        * (s * (PI / 2.0)).sin();
    Ok((z - factor * z_refl).norm())
}
