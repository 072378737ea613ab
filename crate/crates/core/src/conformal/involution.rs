use super::{Anchor, DomainPatch, ReportRow, Side, VerificationReport};
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const NEWTON_ITERS: usize = 60;
const CAUCHY_NODES: usize = 32;
const RESTARTS: usize = 8;
/// Radial continuation step relative to the patch extent.
const RADIAL_STEP: f64 = 0.0125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvolutionNode {
    pub s: Complex64,
    pub side: Side,
    /// Within `1e-6 · extent` of the dividing curve.
    pub on_boundary: bool,
    pub phi: Complex64,
    /// `φ'` by Cauchy quadrature.
    pub dphi: Complex64,
    /// `φ'` by a fourth-order central difference.
    pub dphi_fd: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutionMap {
    pub fixed_point: Complex64,
    pub extent: f64,
    pub grid_n: usize,
    /// Nodes closer than this to the fixed point are left out.
    pub exclusion: f64,
    /// `|f|` scale of the patch, used for value tolerances.
    pub local_scale: f64,
    pub nodes: Vec<InvolutionNode>,
    /// `φ'(s0)` for a double zero.
    pub fixed_point_derivative: Option<Complex64>,
    /// Largest `|φ(φ(s)) - s|` over the nodes.
    pub max_involution_error: f64,
    /// Largest `|f(φ(s)) - f(s)|` over the nodes.
    pub max_value_error: f64,
    /// Largest relative gap between the two `φ'` estimates.
    pub max_derivative_gap: f64,
}

struct Solver<'a> {
    f: &'a AnalyticFunctionHandle,
    center: Complex64,
    extent: f64,
    scale: f64,
    /// Radius where radial continuation starts from the reflected point.
    start: f64,
}

impl Solver<'_> {
    /// Newton for `f(w) = z` from `w0`.
    fn newton(&self, z: Complex64, w0: Complex64) -> Option<Complex64> {
        let mut w = w0;
        let mut prev = f64::INFINITY;
        for _ in 0..NEWTON_ITERS {
            let (v, d) = self.f.value_and_derivative(w).ok()?;
            if d.norm() == 0.0 {
                return None;
            }
            let dw = (v - z) / d;
            w -= dw;
            if !(w.re.is_finite() && w.im.is_finite()) || (w - w0).norm() > 4.0 * self.extent {
                return None;
            }
            let step = dw.norm();
            if step <= 4.0 * f64::EPSILON * (1.0 + w.norm())
                || (step < 1e-9 * self.extent && step > 0.5 * prev)
            {
                break;
            }
            prev = step;
        }
        let v = self.f.value(w).ok()?;
        ((v - z).norm() <= 1e-9 * self.scale).then_some(w)
    }

    /// The pre-image of `f(s)` other than `s`, starting from `guess`.
    fn other_preimage(&self, s: Complex64, z: Complex64, guess: Complex64) -> Result<Complex64> {
        let d = (s - self.center).norm();
        let accept = |w: Complex64| (w - s).norm() > 0.1 * d;
        if let Some(w) = self.newton(z, guess).filter(|&w| accept(w)) {
            return Ok(w);
        }
        let rho = 0.25 * d.max(1e-3 * self.extent);
        for k in 0..RESTARTS {
            let g = guess + Complex64::from_polar(rho, 2.0 * PI * k as f64 / RESTARTS as f64);
            if let Some(w) = self.newton(z, g).filter(|&w| accept(w)) {
                return Ok(w);
            }
        }
        Err(Error::InverseNotFound { target: z })
    }

    fn phi(&self, s: Complex64, guess: Complex64) -> Result<Complex64> {
        let z = self.f.value(s)?;
        self.other_preimage(s, z, guess)
    }

    /// `φ'(s)` from `φ` on the circle of radius `rho` around `s`.
    fn cauchy(
        &self,
        s: Complex64,
        phi_s: Complex64,
        rho: f64,
        slope: Complex64,
    ) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut last: Option<(Complex64, Complex64)> = None;
        for k in 0..CAUCHY_NODES {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / CAUCHY_NODES as f64);
            let p = s + e * rho;
            // continue around the circle from the previous node
            let guess = match last {
                Some((q, wq)) => wq + slope * (p - q),
                None => phi_s + slope * e * rho,
            };
            let w = self.phi(p, guess)?;
            last = Some((p, w));
            acc += (w - phi_s) * e.conj();
        }
        Ok(acc / (CAUCHY_NODES as f64 * rho))
    }

    fn finite_difference(
        &self,
        s: Complex64,
        phi_s: Complex64,
        eta: f64,
        slope: Complex64,
    ) -> Result<Complex64> {
        let at = |k: f64| self.phi(s + eta * k, phi_s + slope * (eta * k));
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        Ok((-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * eta))
    }

    /// `φ(s)` continued along the ray from the center through `s`, by
    /// secant extrapolation between steps of `RADIAL_STEP · extent`.
    fn continue_radially(&self, s: Complex64) -> Result<Complex64> {
        let d = (s - self.center).norm();
        if d <= self.start {
            return self.phi(s, 2.0 * self.center - s);
        }
        let e = (s - self.center) / d;
        let n = ((d - self.start) / (RADIAL_STEP * self.extent))
            .ceil()
            .max(1.0) as usize;
        let p0 = self.center + e * self.start;
        let mut cur = self.phi(p0, 2.0 * self.center - p0)?;
        let mut prev: Option<Complex64> = None;
        for k in 1..=n {
            let p = self.center + e * (self.start + (d - self.start) * k as f64 / n as f64);
            let guess = match prev {
                Some(q) => cur * 2.0 - q,
                None => cur - e * ((d - self.start) / n as f64),
            };
            let w = self.phi(p, guess)?;
            prev = Some(cur);
            cur = w;
        }
        Ok(cur)
    }

    /// Cauchy radius: a quarter of the distance to the center but at least
    /// the exclusion radius, capped so that the image circle stays within a
    /// tenth of the extent.
    fn radius_for(&self, s: Complex64, slope: Complex64) -> f64 {
        (0.25 * (s - self.center).norm())
            .max(self.start)
            .min(0.1 * self.extent)
            .min(0.1 * self.extent / slope.norm().max(1.0))
    }
}

/// Samples `φ` on a `grid_n × grid_n` grid over the patch.
pub fn build_involution(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    grid_n: usize,
) -> Result<InvolutionMap> {
    if patch.is_simple() {
        return Err(Error::InvalidInput(
            "a simple-zero patch carries no involution".into(),
        ));
    }
    if grid_n < 2 {
        return Err(Error::InvalidInput(
            "involution grid needs at least 2 nodes per side".into(),
        ));
    }
    let exclusion = (2.0 * patch.anchor.separation()).max(1e-3 * patch.extent);
    let solver = Solver {
        f,
        center: patch.center,
        extent: patch.extent,
        scale: patch.local_scale,
        start: exclusion,
    };
    let r = patch.extent;
    let candidates: Vec<(Complex64, Side)> = (0..grid_n * grid_n)
        .filter_map(|k| {
            let (i, j) = (k % grid_n, k / grid_n);
            let s = patch.center
                + Complex64::new(
                    -r + 2.0 * r * i as f64 / (grid_n - 1) as f64,
                    -r + 2.0 * r * j as f64 / (grid_n - 1) as f64,
                );
            let d = (s - patch.center).norm();
            if d > 0.9 * r || d < exclusion {
                return None;
            }
            patch.side_of(s).map(|side| (s, side))
        })
        .collect();

    let nodes: Vec<InvolutionNode> = candidates
        .par_iter()
        .map(|&(s, side)| {
            let phi = solver.continue_radially(s)?;
            let eta = 1e-2 * solver.radius_for(s, Complex64::new(1.0, 0.0));
            let dphi_fd = solver.finite_difference(s, phi, eta, Complex64::new(-1.0, 0.0))?;
            let dphi = solver.cauchy(s, phi, solver.radius_for(s, dphi_fd), dphi_fd)?;
            Ok(InvolutionNode {
                s,
                side,
                on_boundary: patch.boundary_distance(s) < 1e-6 * r,
                phi,
                dphi,
                dphi_fd,
            })
        })
        .collect::<Result<_>>()?;

    check_injective(f, patch, &nodes)?;

    let checks: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|n| {
            let back = solver.phi(n.phi, n.s + (n.s - patch.center) * 0.05)?;
            let fv = (f.value(n.phi)? - f.value(n.s)?).norm();
            Ok(((back - n.s).norm(), fv))
        })
        .collect::<Result<_>>()?;
    let max_involution_error = checks.iter().map(|c| c.0).fold(0.0, f64::max);
    let max_value_error = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    let max_derivative_gap = nodes
        .iter()
        .map(|n| (n.dphi - n.dphi_fd).norm() / n.dphi.norm())
        .fold(0.0, f64::max);

    let fixed_point_derivative = match patch.anchor {
        Anchor::DoubleZero(s0) => {
            let rho = 0.1 * r;
            Some(solver.cauchy(s0, s0, rho, Complex64::new(-1.0, 0.0))?)
        }
        _ => None,
    };

    Ok(InvolutionMap {
        fixed_point: patch.center,
        extent: r,
        grid_n,
        exclusion,
        local_scale: patch.local_scale,
        nodes,
        fixed_point_derivative,
        max_involution_error,
        max_value_error,
        max_derivative_gap,
    })
}

/// `φ(s)` lands on the opposite side, and `f` takes no value twice among the
/// nodes of one side.
fn check_injective(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    nodes: &[InvolutionNode],
) -> Result<()> {
    let margin = 0.02 * patch.extent;
    for n in nodes {
        if patch.side_of(n.phi) == Some(n.side)
            && patch.boundary_distance(n.phi) > margin
            && !n.on_boundary
        {
            return Err(Error::NotInjective);
        }
    }
    let values: Vec<Complex64> = nodes
        .par_iter()
        .map(|n| f.value(n.s))
        .collect::<Result<_>>()?;
    let spacing = 2.0 * patch.extent / 64.0;
    let tol = 1e-9 * patch.local_scale;
    // boundary nodes pair up across the dividing curve by convention
    let clash = (0..nodes.len()).into_par_iter().any(|i| {
        (i + 1..nodes.len()).any(|j| {
            nodes[i].side == nodes[j].side
                && !nodes[i].on_boundary
                && !nodes[j].on_boundary
                && (values[i] - values[j]).norm() < tol
                && (nodes[i].s - nodes[j].s).norm() > spacing
        })
    });
    if clash {
        Err(Error::NotInjective)
    } else {
        Ok(())
    }
}

impl InvolutionMap {
    fn solver<'a>(&self, f: &'a AnalyticFunctionHandle) -> Solver<'a> {
        Solver {
            f,
            center: self.fixed_point,
            extent: self.extent,
            scale: self.local_scale,
            start: self.exclusion,
        }
    }

    fn nearest(&self, s: Complex64) -> Option<&InvolutionNode> {
        self.nodes
            .iter()
            .min_by(|a, b| (a.s - s).norm().total_cmp(&(b.s - s).norm()))
    }

    /// `φ(s)` by Newton from the nearest node's first-order Taylor guess,
    /// falling back to radial continuation when the result strays from it.
    pub fn phi(&self, f: &AnalyticFunctionHandle, s: Complex64) -> Result<Complex64> {
        let solver = self.solver(f);
        if let Some(n) = self.nearest(s) {
            let guess = n.phi + n.dphi * (s - n.s);
            let reach = 0.25 * (s - n.s).norm() * (1.0 + n.dphi.norm()) + 1e-9 * self.extent;
            if let Ok(w) = solver.phi(s, guess) {
                if (w - guess).norm() <= reach {
                    return Ok(w);
                }
            }
        }
        solver.continue_radially(s)
    }

    /// `φ'(s)` by Cauchy quadrature of `φ`.
    pub fn phi_prime(&self, f: &AnalyticFunctionHandle, s: Complex64) -> Result<Complex64> {
        let solver = self.solver(f);
        let p = self.phi(f, s)?;
        let slope = self
            .nearest(s)
            .map_or(Complex64::new(-1.0, 0.0), |n| n.dphi);
        solver.cauchy(s, p, solver.radius_for(s, slope), slope)
    }

    /// `φ'(s)` by a fourth-order central difference; four inversions instead
    /// of the Cauchy circle.
    pub fn phi_prime_fd(&self, f: &AnalyticFunctionHandle, s: Complex64) -> Result<Complex64> {
        let solver = self.solver(f);
        let p = self.phi(f, s)?;
        let slope = self
            .nearest(s)
            .map_or(Complex64::new(-1.0, 0.0), |n| n.dphi);
        solver.finite_difference(s, p, 1e-2 * solver.radius_for(s, slope), slope)
    }

    pub fn max_fixed_point_error(&self) -> Option<f64> {
        self.fixed_point_derivative.map(|d| (d * d - 1.0).norm())
    }
}

/// Relative residual of `f'(φ(s)) φ'(s) = f'(s)` at each sample, plus the
/// ratio `|f'(s)| / |f'(φ(s))|` along rays into the fixed point.
pub fn check_chain_rule(
    f: &AnalyticFunctionHandle,
    map: &InvolutionMap,
    samples: &[Complex64],
    tolerance: f64,
) -> VerificationReport {
    let mut rep = VerificationReport::new(
        "chain_rule",
        samples
            .iter()
            .map(|s| (s - map.fixed_point).norm())
            .collect(),
    );
    let rows: Vec<std::result::Result<ReportRow, String>> = samples
        .par_iter()
        .map(|&s| {
            let d = (s - map.fixed_point).norm();
            let run = || -> Result<f64> {
                let p = map.phi(f, s)?;
                let dp = map.phi_prime(f, s)?;
                let (_, d_s) = f.value_and_derivative(s)?;
                let (_, d_p) = f.value_and_derivative(p)?;
                Ok((d_p * dp - d_s).norm() / d_s.norm())
            };
            run()
                .map(|res| ReportRow::new("chain_rule", d, res, 0.0, tolerance))
                .map_err(|e| format!("sample {s}: {e}"))
        })
        .collect();
    for row in rows {
        match row {
            Ok(r) => rep.push(r),
            Err(msg) => {
                rep.passed = false;
                rep.notes.push(msg);
            }
        }
    }

    // |f'(s)| / |f'(φ(s))| = |φ'(s)| tends to |φ'(s0)| = 1 for a double zero
    let floor = map.exclusion.max(1e-3 * map.extent);
    let dists: Vec<f64> = (0..6)
        .map(|k| 0.5 * map.extent * 0.5f64.powi(k))
        .filter(|&d| d >= 2.0 * floor)
        .collect();
    let mut devs = Vec::new();
    for &d in &dists {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            let s = map.fixed_point + Complex64::from_polar(d, PI / 4.0 + k as f64 * PI / 2.0);
            let ratio = map.phi(f, s).and_then(|p| {
                let (_, a) = f.value_and_derivative(s)?;
                let (_, b) = f.value_and_derivative(p)?;
                Ok(a.norm() / b.norm())
            });
            match ratio {
                Ok(q) => worst = worst.max((q - 1.0).abs()),
                Err(e) => rep.notes.push(format!("ray sample at distance {d:e}: {e}")),
            }
        }
        devs.push(worst);
        // informational only when there is no true double zero
        let tol = if map.fixed_point_derivative.is_some() {
            1.0
        } else {
            f64::MAX
        };
        rep.push(ReportRow::new("ray_rate", d, 1.0 + worst, 1.0, tol));
    }
    if let (Some(&first), Some(&last)) = (devs.first(), devs.last()) {
        if devs.len() > 1 && first > 0.0 {
            rep.notes.push(format!(
                "ray rate deviation shrinks from {first:e} to {last:e} as the distance falls from {:e} to {:e}",
                dists[0],
                dists[dists.len() - 1]
            ));
        }
    }
    rep
}
