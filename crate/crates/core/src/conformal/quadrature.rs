//! Gauss rules on segments and triangles, and signed fan decomposition of
//! polygons.

use crate::error::Result;
use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `∫_a^b g(s) |ds|` along the straight segment with an `n`-point rule.
pub fn segment_integral<G>(a: Complex64, b: Complex64, rule: &[(f64, f64)], g: &G) -> Result<f64>
where
    G: Fn(Complex64) -> Result<f64>,
{
    let half = (b - a) * 0.5;
    let mid = (a + b) * 0.5;
    let mut acc = 0.0;
    for &(x, w) in rule {
        acc += w * g(mid + half * x)?;
    }
    Ok(acc * half.norm())
}

/// `∫ g |ds|` along an open polyline.
pub fn polyline_integral<G>(points: &[Complex64], rule: &[(f64, f64)], g: &G) -> Result<f64>
where
    G: Fn(Complex64) -> Result<f64>,
{
    let mut acc = 0.0;
    for w in points.windows(2) {
        acc += segment_integral(w[0], w[1], rule, g)?;
    }
    Ok(acc)
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Signed `∬ g` over triangle `abc` (positive when counter-clockwise), using
/// the collapsed square map `a + u(b - a) + uv(c - b)`.
pub fn triangle_integral<G>(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    rule: &[(f64, f64)],
    g: &G,
) -> Result<f64>
where
    G: Fn(Complex64) -> Result<f64>,
{
    let jac = cross(b - a, c - a);
    if jac == 0.0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for &(xu, wu) in rule {
        let u = 0.5 * (xu + 1.0);
        for &(xv, wv) in rule {
            let v = 0.5 * (xv + 1.0);
            let p = a + (b - a) * u + (c - b) * (u * v);
            acc += wu * wv * u * g(p)?;
        }
    }
    Ok(acc * jac * 0.25)
}

/// Signed `∬ g` over the closed polygon `poly` as a sum of signed triangles
/// fanned from `origin`. Exact for any `g` defined on the fan, whether or not
/// the polygon is star-shaped with respect to `origin`.
pub fn polygon_integral<G>(
    poly: &[Complex64],
    origin: Complex64,
    rule: &[(f64, f64)],
    g: &G,
) -> Result<f64>
where
    G: Fn(Complex64) -> Result<f64>,
{
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += triangle_integral(origin, poly[i], poly[(i + 1) % n], rule, g)?;
    }
    Ok(acc)
}

/// Shoelace area, positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Complex64]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| cross(poly[i], poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}
