//! Complex log-gamma via Stirling's series with upward shift and reflection.

use num_complex::Complex64;
use std::f64::consts::PI;

/// B_2, B_4, ..., B_24.
pub(crate) const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const STIRLING_MIN_ABS: f64 = 15.0;

/// `ln Γ(z)` up to an additive multiple of `2πi`; only `exp` of the result is
/// meaningful. Poles at non-positive integers give non-finite output.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_gamma(z.conj()).conj();
    }
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz), with ln sin evaluated without overflow.
        let iz = Complex64::i() * PI * z;
        let ln_sin = -iz + (((iz * 2.0).exp() - 1.0) / Complex64::new(0.0, 2.0)).ln();
        return Complex64::new(PI.ln(), 0.0) - ln_sin - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < STIRLING_MIN_ABS {
        shift += w.ln();
        w += 1.0;
    }
    let mut acc = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln();
    let w_inv = w.inv();
    let w_inv2 = w_inv * w_inv;
    let mut pow = w_inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(10) {
        let n = 2 * (k + 1);
        acc += pow * (b / (n * (n - 1)) as f64);
        pow *= w_inv2;
    }
    acc - shift
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}
