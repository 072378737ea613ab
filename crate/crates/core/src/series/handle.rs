use super::{
    davenport_heilbronn_weights, hurwitz_jet, residue_combination, DirichletCharacter, EvalResult,
    GeneralDirichletSeries, DEFAULT_PRECISION,
};
use crate::error::{Error, Result};
use crate::jet::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Closed-form test function `p(s) · exp(rate · s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRule {
    /// Polynomial coefficients in ascending order.
    pub poly: Vec<Complex64>,
    /// Roots of `poly` when known; evaluation then uses the product form,
    /// which keeps relative accuracy next to the roots.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roots: Vec<Complex64>,
    pub exp_rate: Complex64,
}

impl SyntheticRule {
    pub fn polynomial(poly: Vec<Complex64>) -> Self {
        SyntheticRule {
            poly,
            roots: Vec::new(),
            exp_rate: Complex64::new(0.0, 0.0),
        }
    }

    /// `prod (s - root)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            poly = next;
        }
        let mut rule = SyntheticRule::polynomial(poly);
        rule.roots = roots.to_vec();
        rule
    }

    /// `(s - s0)^m`.
    pub fn power(s0: Complex64, m: usize) -> Self {
        SyntheticRule::from_roots(&vec![s0; m])
    }

    pub fn with_exp(mut self, rate: Complex64) -> Self {
        self.exp_rate = rate;
        self
    }

    /// `(s - s0)^2 e^s`, the model double zero.
    pub fn double_zero(s0: Complex64) -> Self {
        SyntheticRule::power(s0, 2).with_exp(Complex64::new(1.0, 0.0))
    }

    pub fn jet(&self, s: Complex64) -> Jet {
        let x = Jet::variable(s);
        let mut p = Jet::zero();
        if self.roots.is_empty() {
            for &c in self.poly.iter().rev() {
                p = p * x + Jet::constant(c);
            }
        } else {
            p = Jet::constant(Complex64::new(1.0, 0.0));
            for &r in &self.roots {
                p = p * (x - Jet::constant(r));
            }
        }
        if self.exp_rate.norm() == 0.0 {
            p
        } else {
            p * (x * self.exp_rate).exp()
        }
    }

    fn real_coefficients(&self) -> bool {
        self.exp_rate.im == 0.0 && self.poly.iter().all(|c| c.im == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FunctionKind {
    RiemannZeta,
    HurwitzZeta {
        shift: f64,
    },
    DirichletL(DirichletCharacter),
    DavenportHeilbronn,
    TruncatedSeries {
        series: Arc<GeneralDirichletSeries>,
        cutoff: usize,
    },
    Synthetic(SyntheticRule),
    /// `f'` of the wrapped function, as a function in its own right.
    Derivative(Box<FunctionKind>),
}

/// An analytic function together with its evaluation precision target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFunctionHandle {
    pub kind: FunctionKind,
    pub precision: f64,
}

impl AnalyticFunctionHandle {
    pub fn new(kind: FunctionKind) -> Self {
        AnalyticFunctionHandle {
            kind,
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn zeta() -> Self {
        Self::new(FunctionKind::RiemannZeta)
    }

    pub fn davenport_heilbronn() -> Self {
        Self::new(FunctionKind::DavenportHeilbronn)
    }

    pub fn synthetic(rule: SyntheticRule) -> Self {
        Self::new(FunctionKind::Synthetic(rule))
    }

    pub fn with_precision(mut self, precision: f64) -> Self {
        self.precision = precision;
        self
    }

    /// Handle for `f'`.
    pub fn derivative_handle(&self) -> Self {
        AnalyticFunctionHandle {
            kind: FunctionKind::Derivative(Box::new(self.kind.clone())),
            precision: self.precision,
        }
    }

    pub fn is_derivative(&self) -> bool {
        matches!(self.kind, FunctionKind::Derivative(_))
    }

    pub fn name(&self) -> String {
        kind_name(&self.kind)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        kind_poles(&self.kind)
    }

    /// `f(conj s) = conj f(s)` holds for this handle.
    pub fn has_real_coefficients(&self) -> bool {
        kind_real(&self.kind)
    }

    /// Left end of the slit `(ℓ, +∞)` that strip images omit: `1` for
    /// Dirichlet series (which tend to 1 as `Re s → +∞`), `0` otherwise.
    pub fn slit_origin(&self) -> f64 {
        match &self.kind {
            FunctionKind::Synthetic(_) | FunctionKind::Derivative(_) => 0.0,
            _ => 1.0,
        }
    }

    /// Abscissa of convergence of the underlying Dirichlet series, if any.
    pub fn abscissa(&self) -> Option<f64> {
        kind_abscissa(&self.kind)
    }

    /// Value of `f(s)`.
    pub fn eval(&self, s: Complex64) -> Result<EvalResult> {
        let (jet, bound, terms) = kind_jet(&self.kind, s, self.precision, false)?;
        Ok(EvalResult {
            value: jet.value(),
            error_bound: bound,
            terms_used: terms.max(1),
        })
    }

    pub fn value(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.eval(s)?.value)
    }

    /// Taylor jet at `s`; for derivative handles the top coefficient is zero.
    pub fn jet(&self, s: Complex64) -> Result<Jet> {
        Ok(kind_jet(&self.kind, s, self.precision, true)?.0)
    }

    /// `(f(s), f'(s))`.
    pub fn value_and_derivative(&self, s: Complex64) -> Result<(Complex64, Complex64)> {
        let j = self.jet(s)?;
        Ok((j.value(), j.derivative(1)))
    }

    /// Evaluation error bound at `s`.
    pub fn error_bound(&self, s: Complex64) -> Result<f64> {
        Ok(self.eval(s)?.error_bound)
    }
}

fn kind_name(kind: &FunctionKind) -> String {
    match kind {
        FunctionKind::RiemannZeta => "zeta".into(),
        FunctionKind::HurwitzZeta { shift } => format!("hurwitz({shift})"),
        FunctionKind::DirichletL(chi) => format!("dirichlet-l(mod {})", chi.modulus),
        FunctionKind::DavenportHeilbronn => "dh".into(),
        FunctionKind::TruncatedSeries { series, cutoff } => {
            format!("{}[N={}]", series.name, cutoff)
        }
        FunctionKind::Synthetic(_) => "synthetic".into(),
        FunctionKind::Derivative(inner) => format!("d/ds {}", kind_name(inner)),
    }
}

fn kind_poles(kind: &FunctionKind) -> Vec<Complex64> {
    match kind {
        FunctionKind::RiemannZeta | FunctionKind::HurwitzZeta { .. } => {
            vec![Complex64::new(1.0, 0.0)]
        }
        FunctionKind::DirichletL(chi) if chi.is_principal() => vec![Complex64::new(1.0, 0.0)],
        FunctionKind::Derivative(inner) => kind_poles(inner),
        _ => Vec::new(),
    }
}

fn kind_real(kind: &FunctionKind) -> bool {
    match kind {
        FunctionKind::RiemannZeta
        | FunctionKind::HurwitzZeta { .. }
        | FunctionKind::DavenportHeilbronn => true,
        FunctionKind::DirichletL(chi) => chi.is_real(),
        FunctionKind::TruncatedSeries { series, cutoff } => series.has_real_coefficients(*cutoff),
        FunctionKind::Synthetic(rule) => rule.real_coefficients(),
        FunctionKind::Derivative(inner) => kind_real(inner),
    }
}

fn kind_jet(
    kind: &FunctionKind,
    s: Complex64,
    precision: f64,
    derivs: bool,
) -> Result<(Jet, f64, usize)> {
    match kind {
        FunctionKind::RiemannZeta => hurwitz_jet_opt(s, 1.0, precision, derivs),
        FunctionKind::HurwitzZeta { shift } => hurwitz_jet_opt(s, *shift, precision, derivs),
        FunctionKind::DirichletL(chi) => {
            residue_combination(s, chi.modulus, &chi.table, precision, derivs)
        }
        FunctionKind::DavenportHeilbronn => {
            residue_combination(s, 5, &davenport_heilbronn_weights(), precision, derivs)
        }
        FunctionKind::TruncatedSeries { series, cutoff } => {
            let jet = series.truncated_jet(s, *cutoff)?;
            Ok((jet, 0.0, *cutoff))
        }
        FunctionKind::Synthetic(rule) => Ok((rule.jet(s), 0.0, 1)),
        FunctionKind::Derivative(inner) => {
            let (jet, bound, terms) = kind_jet(inner, s, precision, true)?;
            Ok((jet.differentiate(), bound, terms))
        }
    }
}

fn hurwitz_jet_opt(
    s: Complex64,
    a: f64,
    precision: f64,
    derivs: bool,
) -> Result<(Jet, f64, usize)> {
    if derivs {
        hurwitz_jet(s, a, precision)
    } else {
        let r = super::hurwitz_zeta(s, a, precision)?;
        Ok((Jet::constant(r.value), r.error_bound, r.terms_used))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyOptions {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        CauchyOptions {
            radius: 0.05,
            nodes: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub value: Complex64,
    /// Same quadrature on the circle of half radius.
    pub half_radius_value: Complex64,
    pub discrepancy: f64,
}

/// Trapezoidal Cauchy quadrature for `f^{(order)}(s)` on a circle.
pub(crate) fn cauchy_derivative<F>(
    f: F,
    s: Complex64,
    order: usize,
    radius: f64,
    nodes: usize,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = 2.0 * PI * j as f64 / nodes as f64;
        let e = Complex64::from_polar(1.0, theta);
        let v = f(s + e * radius)?;
        acc += v * Complex64::from_polar(1.0, -(order as f64) * theta);
    }
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    Ok(acc * (fact / (nodes as f64 * radius.powi(order as i32))))
}

/// `f^{(order)}(s)` for `order ∈ {1, 2}` by Cauchy-integral quadrature,
/// cross-checked against the half-radius circle.
pub fn derivative(
    f: &AnalyticFunctionHandle,
    s: Complex64,
    order: usize,
    options: CauchyOptions,
) -> Result<DerivativeEstimate> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "derivative order {order} not in {{1, 2}}"
        )));
    }
    if !(options.radius > 0.0) || options.nodes < 4 {
        return Err(Error::InvalidInput(
            "Cauchy radius must be positive and nodes >= 4".into(),
        ));
    }
    for p in f.poles() {
        if (p - s).norm() <= options.radius {
            return Err(Error::PoleInDisc {
                center: s,
                radius: options.radius,
            });
        }
    }
    let eval = |w: Complex64| f.value(w);
    let value = cauchy_derivative(eval, s, order, options.radius, options.nodes)?;
    let half = cauchy_derivative(eval, s, order, options.radius * 0.5, options.nodes)?;
    Ok(DerivativeEstimate {
        value,
        half_radius_value: half,
        discrepancy: (value - half).norm(),
    })
}

fn kind_abscissa(kind: &FunctionKind) -> Option<f64> {
    match kind {
        FunctionKind::RiemannZeta | FunctionKind::HurwitzZeta { .. } => Some(1.0),
        FunctionKind::DirichletL(chi) => Some(if chi.is_principal() { 1.0 } else { 0.0 }),
        FunctionKind::DavenportHeilbronn => Some(0.0),
        FunctionKind::TruncatedSeries { series, .. } => Some(series.sigma_c),
        FunctionKind::Synthetic(_) => None,
        FunctionKind::Derivative(inner) => kind_abscissa(inner),
    }
}
