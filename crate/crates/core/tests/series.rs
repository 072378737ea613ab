use proptest::prelude::*;
use zeromult::series::gamma::ln_gamma;
use zeromult::series::{
    davenport_heilbronn, davenport_heilbronn_functional_residual, derivative,
    euler_partial_product, eval_series, hurwitz_zeta, riemann_zeta, zeta_functional_residual,
    AnalyticFunctionHandle, CauchyOptions, DirichletCharacter, FunctionKind,
    GeneralDirichletSeries, SyntheticRule,
};
use zeromult::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Direct summation of `sum_{n<=N} g(n)` with a monotone integral tail
/// bracket `[lo, hi]`.
fn bracketed_sum(g: impl Fn(f64) -> f64, tail_lo: f64, tail_hi: f64, n: usize) -> (f64, f64) {
    // sum small terms last to keep rounding low
    let s: f64 = (1..=n).rev().map(|k| g(k as f64)).sum();
    (s + tail_lo, s + tail_hi)
}

#[test]
fn zeta_two_against_direct_sum() {
    let n = 1_000_000usize;
    let nf = n as f64;
    let (lo, hi) = bracketed_sum(|k| 1.0 / (k * k), 1.0 / (nf + 1.0), 1.0 / nf, n);
    let z = riemann_zeta(c(2.0, 0.0), 1e-14).unwrap();
    assert!(
        z.value.re >= lo - 1e-12 && z.value.re <= hi + 1e-12,
        "{} not in [{lo}, {hi}]",
        z.value.re
    );
    assert!((z.value.re - 1.6449340668482264).abs() < 1e-13);
    let h = hurwitz_zeta(c(2.0, 0.0), 1.0, 1e-14).unwrap();
    assert!((h.value - z.value).norm() < 1e-14);
}

#[test]
fn zeta_prime_two_against_differentiated_series() {
    // -sum ln n / n^2, tail ∫_N^∞ ln x / x^2 dx = (ln N + 1)/N
    let n = 1_000_000usize;
    let tail = |x: f64| (x.ln() + 1.0) / x;
    let (lo, hi) = bracketed_sum(
        |k| k.ln() / (k * k),
        tail(n as f64 + 1.0),
        tail(n as f64),
        n,
    );
    let f = AnalyticFunctionHandle::zeta();
    let d = derivative(&f, c(2.0, 0.0), 1, CauchyOptions::default()).unwrap();
    assert!(
        -d.value.re >= lo - 1e-9 && -d.value.re <= hi + 1e-9,
        "{}",
        d.value
    );
    assert!((d.value.re + 0.9375482543158437).abs() < 1e-9);
    let j = f.jet(c(2.0, 0.0)).unwrap();
    assert!((j.derivative(1) - d.value).norm() < 1e-10);
}

fn hardy_z(t: f64) -> f64 {
    let theta = ln_gamma(c(0.25, t / 2.0)).im - t / 2.0 * std::f64::consts::PI.ln();
    let z = riemann_zeta(c(0.5, t), 1e-13).unwrap().value;
    (Complex64::from_polar(1.0, theta) * z).re
}

#[test]
fn first_zeta_zero_from_hardy_sign_change() {
    // dense sampling then bisection on the real rotation of ζ
    let mut a = 14.0;
    let mut fa = hardy_z(a);
    let mut bracket = None;
    for k in 1..=300 {
        let b = 14.0 + k as f64 * 1e-3;
        let fb = hardy_z(b);
        if fa.signum() != fb.signum() {
            bracket = Some((a, b));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut lo, mut hi) = bracket.expect("sign change near 14.13");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if hardy_z(mid).signum() == hardy_z(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 14.134725141734693).abs() < 1e-9);
    let v = riemann_zeta(c(0.5, 14.134725), 1e-13).unwrap().value;
    assert!(v.norm() < 1e-6);
}

#[test]
fn hurwitz_high_point_stable_under_cutoff_change() {
    let s = c(0.5, 100.0);
    let a = 0.4;
    let coarse = hurwitz_zeta(s, a, 1e-10).unwrap();
    let fine = hurwitz_zeta(s, a, 1e-15).unwrap();
    assert!(fine.terms_used > coarse.terms_used);
    assert!(coarse.error_bound < 1e-9);
    assert!(coarse.value.norm().is_finite());
    assert!((coarse.value - fine.value).norm() <= coarse.error_bound + fine.error_bound + 1e-12);
}

#[test]
fn zeta_functional_equation_point() {
    assert!(zeta_functional_residual(c(0.3, 5.0), 1e-13).unwrap() < 1e-8);
}

#[test]
fn functional_equation_grid() {
    for &sigma in &[0.2, 0.35, 0.5, 0.65, 0.8] {
        for &t in &[1.0, 50.0 / 3.0, 100.0 / 3.0, 50.0] {
            let s = c(sigma, t);
            let rz = zeta_functional_residual(s, 1e-13).unwrap();
            let rd = davenport_heilbronn_functional_residual(s, 1e-13).unwrap();
            assert!(rz < 1e-8, "zeta residual {rz:e} at {s}");
            assert!(rd < 1e-8, "dh residual {rd:e} at {s}");
        }
    }
}

#[test]
fn davenport_heilbronn_examples() {
    assert!(davenport_heilbronn_functional_residual(c(0.3, 10.0), 1e-13).unwrap() < 1e-8);
    let s = c(0.7, 50.0);
    let a = davenport_heilbronn(s.conj(), 1e-13).unwrap().value;
    let b = davenport_heilbronn(s, 1e-13).unwrap().value;
    assert!((a - b.conj()).norm() < 1e-10);
    let near_zero = davenport_heilbronn(c(0.51591, 520.9438), 1e-12)
        .unwrap()
        .value;
    assert!(near_zero.norm() < 1e-3, "|D| = {}", near_zero.norm());
}

#[test]
fn classical_series_matches_zeta() {
    let r = eval_series(&GeneralDirichletSeries::classical(), c(2.0, 0.0), 1_000_000).unwrap();
    let z = riemann_zeta(c(2.0, 0.0), 1e-14).unwrap().value;
    assert!((r.value - z).norm() < 1e-6);
    assert!(r.error_bound >= (r.value - z).norm());
}

#[test]
fn character_series_matches_hurwitz_combination() {
    let chi = DirichletCharacter::mod5_i();
    let series = GeneralDirichletSeries::character(chi.clone());
    let s = c(2.0, 0.0);
    let direct = eval_series(&series, s, 100_000).unwrap().value;
    let mut comb = c(0.0, 0.0);
    for r in 1..=4u64 {
        comb += chi.value(r) * hurwitz_zeta(s, r as f64 / 5.0, 1e-14).unwrap().value;
    }
    comb *= (-s * 5f64.ln()).exp();
    assert!((direct - comb).norm() < 1e-6);
    let handle = AnalyticFunctionHandle::new(FunctionKind::DirichletL(chi));
    assert!((handle.value(s).unwrap() - comb).norm() < 1e-12);
}

#[test]
fn euler_products_converge_on_ladder() {
    let series = GeneralDirichletSeries::classical();
    let z = riemann_zeta(c(2.0, 0.0), 1e-14).unwrap().value;
    let mut prev = f64::INFINITY;
    for n in [100u64, 1_000, 10_000, 100_000] {
        let f = euler_partial_product(&series, c(2.0, 0.0), n).unwrap();
        let err = (f.inv() - z).norm();
        assert!(err <= prev, "n = {n}");
        prev = err;
    }
    assert!(prev < 1e-4);
}

#[test]
fn evaluation_is_deterministic() {
    let f = AnalyticFunctionHandle::davenport_heilbronn();
    let s = c(0.41, 233.3);
    let a = f.eval(s).unwrap();
    let b = f.eval(s).unwrap();
    assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
    assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
}

fn handles() -> Vec<AnalyticFunctionHandle> {
    vec![
        AnalyticFunctionHandle::zeta(),
        AnalyticFunctionHandle::new(FunctionKind::HurwitzZeta { shift: 0.3 }),
        AnalyticFunctionHandle::davenport_heilbronn(),
        AnalyticFunctionHandle::synthetic(SyntheticRule::double_zero(c(0.5, 1.0))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hurwitz_identity_at_one(sigma in -1.5f64..4.0, t in -60.0f64..60.0) {
        prop_assume!((sigma - 1.0).abs() + t.abs() > 0.1);
        let s = c(sigma, t);
        let h = hurwitz_zeta(s, 1.0, 1e-13).unwrap().value;
        let z = riemann_zeta(s, 1e-13).unwrap().value;
        prop_assert!((h - z).norm() <= 1e-10 * z.norm().max(1e-3));
    }

    #[test]
    fn reflection_symmetry(sigma in -1.0f64..3.0, t in 0.5f64..80.0, a in 0.05f64..1.0) {
        let s = c(sigma, t);
        let z = riemann_zeta(s, 1e-13).unwrap().value;
        let zc = riemann_zeta(s.conj(), 1e-13).unwrap().value;
        prop_assert!((zc - z.conj()).norm() <= 1e-10 * z.norm().max(1e-3));
        let h = hurwitz_zeta(s, a, 1e-13).unwrap().value;
        let hc = hurwitz_zeta(s.conj(), a, 1e-13).unwrap().value;
        prop_assert!((hc - h.conj()).norm() <= 1e-10 * h.norm().max(1e-3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn cauchy_derivative_matches_central_difference(sigma in -0.5f64..2.5, t in 2.0f64..60.0) {
        let s = c(sigma, t);
        let h = 1e-5;
        for f in handles() {
            let d = derivative(&f, s, 1, CauchyOptions::default()).unwrap().value;
            let fd = (f.value(s + h).unwrap() - f.value(s - h).unwrap()) / (2.0 * h);
            prop_assert!((d - fd).norm() < 1e-6, "{}: {} vs {}", f.name(), d, fd);
        }
    }
}

#[test]
fn derivative_examples() {
    let sq = AnalyticFunctionHandle::synthetic(SyntheticRule::power(c(0.0, 0.0), 2));
    let d = derivative(&sq, c(3.0, 0.0), 1, CauchyOptions::default()).unwrap();
    assert!((d.value - c(6.0, 0.0)).norm() < 1e-10);
    let d2 = derivative(&sq, c(3.0, 0.0), 2, CauchyOptions::default()).unwrap();
    assert!((d2.value - c(2.0, 0.0)).norm() < 1e-10);
    // ζ' decays like -ln 2 · 2^{-σ}
    let far = derivative(
        &AnalyticFunctionHandle::zeta(),
        c(30.0, 0.0),
        1,
        CauchyOptions::default(),
    )
    .unwrap();
    assert!(far.value.norm() < 1e-8, "{}", far.value);
    let lead = -std::f64::consts::LN_2 * 2f64.powi(-30);
    assert!((far.value.re / lead - 1.0).abs() < 1e-4);
}
