//! Argument-principle winding numbers by adaptive phase continuation.

use super::SearchRectangle;
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Contour {
    Rectangle(SearchRectangle),
    Circle { center: Complex64, radius: f64 },
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    /// Counterclockwise parametrization over `u ∈ [0, 1)`.
    fn point(&self, u: f64) -> Complex64 {
        match self {
            Contour::Circle { center, radius } => {
                center + Complex64::from_polar(*radius, 2.0 * PI * u)
            }
            Contour::Rectangle(r) => {
                let q = (u * 4.0).clamp(0.0, 4.0);
                let side = (q.floor() as usize).min(3);
                let x = q - side as f64;
                let (a, b) = match side {
                    0 => (r.corner(0), r.corner(1)),
                    1 => (r.corner(1), r.corner(2)),
                    2 => (r.corner(2), r.corner(3)),
                    _ => (r.corner(3), r.corner(0)),
                };
                a + (b - a) * x
            }
        }
    }

    /// Distance from `p` to the contour curve.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match self {
            Contour::Circle { center, radius } => ((p - center).norm() - radius).abs(),
            Contour::Rectangle(r) => r.boundary_distance(p),
        }
    }

    /// Initial sampling parameters: at least `per_edge` per side and spacing
    /// at most `spacing` in arc length.
    fn initial_nodes(&self, per_edge: usize, spacing: f64) -> Vec<f64> {
        match self {
            Contour::Circle { radius, .. } => {
                let n = (4 * per_edge).max((2.0 * PI * radius / spacing).ceil() as usize);
                (0..n).map(|k| k as f64 / n as f64).collect()
            }
            Contour::Rectangle(r) => {
                let mut out = Vec::new();
                for (side, len) in [r.width(), r.height(), r.width(), r.height()]
                    .into_iter()
                    .enumerate()
                {
                    let n = per_edge.max((len / spacing).ceil() as usize);
                    out.extend((0..n).map(|j| (side as f64 + j as f64 / n as f64) / 4.0));
                }
                out
            }
        }
    }

    pub fn encloses(&self, p: Complex64) -> bool {
        match self {
            Contour::Circle { center, radius } => (p - center).norm() < *radius,
            Contour::Rectangle(r) => r.contains_open(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// Initial samples per rectangle edge (a circle gets four times this).
    pub nodes_per_edge: usize,
    /// Largest accepted phase change between neighbouring samples.
    pub max_phase_step: f64,
    /// Largest initial distance between samples.
    pub max_spacing: f64,
    /// Maximum bisection depth of a single sampling interval.
    pub max_refinement: u32,
    /// `|f|` below this fraction of the contour maximum counts as a zero on
    /// the contour.
    pub zero_threshold: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            nodes_per_edge: 64,
            max_phase_step: FRAC_PI_2,
            max_spacing: 0.05,
            max_refinement: 32,
            zero_threshold: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub winding: i64,
    /// Total phase change divided by 2π, before rounding.
    pub raw: f64,
    pub max_abs: f64,
    pub min_abs: f64,
    pub evaluations: usize,
}

struct Walk<'a, F> {
    f: &'a F,
    contour: &'a Contour,
    opts: WindingOptions,
    floor: f64,
    min_abs: f64,
    max_abs: f64,
    evaluations: usize,
}

impl<F: Fn(Complex64) -> Result<Complex64>> Walk<'_, F> {
    fn eval(&mut self, u: f64) -> Result<Complex64> {
        let s = self.contour.point(u);
        let v = (self.f)(s)?;
        self.evaluations += 1;
        let a = v.norm();
        if !a.is_finite() {
            return Err(Error::ZeroOnContour { near: s });
        }
        self.min_abs = self.min_abs.min(a);
        self.max_abs = self.max_abs.max(a);
        if a <= self.floor {
            return Err(Error::ZeroOnContour { near: s });
        }
        Ok(v)
    }

    fn segment(
        &mut self,
        u0: f64,
        v0: Complex64,
        u1: f64,
        v1: Complex64,
        depth: u32,
    ) -> Result<f64> {
        let d = (v1 / v0).arg();
        if d.abs() < self.opts.max_phase_step {
            return Ok(d);
        }
        if depth >= self.opts.max_refinement {
            return Err(Error::PhaseStepTooLarge {
                near: self.contour.point(0.5 * (u0 + u1)),
            });
        }
        let um = 0.5 * (u0 + u1);
        let vm = self.eval(um)?;
        Ok(self.segment(u0, v0, um, vm, depth + 1)? + self.segment(um, vm, u1, v1, depth + 1)?)
    }
}

/// Winding number of an arbitrary evaluator along `contour`.
pub fn winding_of<F>(f: &F, contour: &Contour, opts: WindingOptions) -> Result<WindingResult>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let nodes = contour.initial_nodes(opts.nodes_per_edge.max(2), opts.max_spacing);
    let n = nodes.len();
    let mut walk = Walk {
        f,
        contour,
        opts,
        floor: 0.0,
        min_abs: f64::INFINITY,
        max_abs: 0.0,
        evaluations: 0,
    };
    let mut values = Vec::with_capacity(n);
    for &u in &nodes {
        values.push(walk.eval(u)?);
    }
    walk.floor = opts.zero_threshold * walk.max_abs;
    if let Some((k, _)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| v.norm() <= walk.floor)
    {
        return Err(Error::ZeroOnContour {
            near: contour.point(nodes[k]),
        });
    }
    let mut total = 0.0;
    for k in 0..n {
        let (u0, u1) = (nodes[k], if k + 1 == n { 1.0 } else { nodes[k + 1] });
        let v1 = values[(k + 1) % n];
        total += walk.segment(u0, values[k], u1, v1, 0)?;
    }
    let raw = total / (2.0 * PI);
    Ok(WindingResult {
        winding: raw.round() as i64,
        raw,
        max_abs: walk.max_abs,
        min_abs: walk.min_abs,
        evaluations: walk.evaluations,
    })
}

/// Moves rectangle edges by at most `jitter` so that no pole of `f` lies on
/// or within `jitter` of the boundary; poles end up outside.
pub(crate) fn avoid_poles(
    f: &AnalyticFunctionHandle,
    r: SearchRectangle,
    jitter: f64,
) -> SearchRectangle {
    let mut out = r;
    for p in f.poles() {
        if out.boundary_distance(p) > jitter {
            continue;
        }
        let margin = 2.0 * jitter;
        if (p.re - out.sigma_min).abs() <= jitter {
            out.sigma_min = p.re + margin;
        } else if (p.re - out.sigma_max).abs() <= jitter {
            out.sigma_max = p.re - margin;
        } else if (p.im - out.t_min).abs() <= jitter {
            out.t_min = p.im + margin;
        } else if (p.im - out.t_max).abs() <= jitter {
            out.t_max = p.im - margin;
        }
    }
    out
}

/// Winding number of `f` along a rectangle or circle.
///
/// Poles touching a rectangle boundary are pushed outside by a 1e-6 shift;
/// poles enclosed by the contour make the count `zeros - poles`.
pub fn winding_number(f: &AnalyticFunctionHandle, contour: &Contour) -> Result<i64> {
    Ok(winding_with(f, contour, WindingOptions::default())?.winding)
}

pub fn winding_with(
    f: &AnalyticFunctionHandle,
    contour: &Contour,
    opts: WindingOptions,
) -> Result<WindingResult> {
    let contour = match contour {
        Contour::Rectangle(r) => Contour::Rectangle(avoid_poles(f, *r, super::JITTER)),
        Contour::Circle { center, radius } => {
            if let Some(p) = f
                .poles()
                .into_iter()
                .find(|p| ((p - center).norm() - radius).abs() < 1e-12 * (1.0 + radius))
            {
                return Err(Error::PoleInDisc {
                    center: p,
                    radius: *radius,
                });
            }
            Contour::Circle {
                center: *center,
                radius: *radius,
            }
        }
    };
    let eval = |s: Complex64| f.value(s);
    winding_of(&eval, &contour, opts)
}
