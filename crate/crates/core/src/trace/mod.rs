//! Pre-images of the real axis, rays and circles: seeding, predictor-corrector
//! tracing, taxonomy of real-axis components, strips and the intertwining of
//! `f`-curves with `f'`-curves.

mod strips;
mod tracer;

pub use strips::{
    classify_component, intertwining_check, partition_strips, partition_strips_with, Intersection,
    IntertwiningReport, StripOptions, StripPartition, StripRecord, UpsilonReport,
    HORIZONTAL_TOLERANCE_DEG, MIN_CLASSIFY_POINTS,
};
pub use tracer::{
    seed_points, trace_all, trace_branches_at_zero, trace_level_curve, trace_level_curve_with,
    TraceFailure, TraceOptions, TraceSet,
};

use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use crate::zeros::SearchRectangle;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `Im f = 0`.
    RealAxisPreimage,
    /// `arg f = theta`.
    RayPreimage { theta: f64 },
    /// `|f| = radius`.
    CirclePreimage { radius: f64 },
}

/// `G(s)` with `Im G = 0` on the pre-image, and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Local {
    pub f: Complex64,
    pub g: Complex64,
    pub dg: Complex64,
    pub d2g: Complex64,
}

impl Constraint {
    pub(crate) fn local(&self, f: &AnalyticFunctionHandle, s: Complex64) -> Result<Local> {
        let j = f.jet(s)?;
        let (v, d1, d2) = (j.value(), j.derivative(1), j.derivative(2));
        if !(v.norm().is_finite() && d1.norm().is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at {s}")));
        }
        Ok(match *self {
            Constraint::RealAxisPreimage => Local {
                f: v,
                g: v,
                dg: d1,
                d2g: d2,
            },
            Constraint::RayPreimage { theta } => {
                let r = Complex64::from_polar(1.0, -theta);
                Local {
                    f: v,
                    g: v * r,
                    dg: d1 * r,
                    d2g: d2 * r,
                }
            }
            Constraint::CirclePreimage { radius } => {
                let i = Complex64::i();
                let l = d1 / v;
                Local {
                    f: v,
                    g: i * (v.ln() - radius.ln()),
                    dg: i * l,
                    d2g: i * (d2 / v - l * l),
                }
            }
        })
    }

    /// `Im G` from a function value alone.
    pub(crate) fn level(&self, v: Complex64) -> f64 {
        match *self {
            Constraint::RealAxisPreimage => v.im,
            Constraint::RayPreimage { theta } => (v * Complex64::from_polar(1.0, -theta)).im,
            Constraint::CirclePreimage { radius } => v.norm().ln() - radius.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Strip boundary; image inside `(slit, +∞)`.
    GammaPrime,
    /// Injective image inside `(-∞, slit)`.
    GammaZero,
    /// Injective image spanning the real axis.
    GammaJ,
    /// Real-axis pre-image of a derivative.
    Upsilon,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ExitedWindow(Edge),
    ClosedLoop,
    /// Ran into a zero of `G'`.
    CriticalPoint,
    /// A ray pre-image reached a zero of `f`.
    ReachedZero,
    /// Pole or overflow.
    Singularity,
    StepLimit,
}

impl Termination {
    pub fn truncated(&self) -> bool {
        matches!(self, Termination::ExitedWindow(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveComponent {
    pub points: Vec<Complex64>,
    /// `f` at every point.
    pub values: Vec<Complex64>,
    pub constraint: Constraint,
    pub classification: Classification,
    pub strip_index: Option<i64>,
    /// How the polyline ends at its first and last point.
    pub ends: [Termination; 2],
    pub window_truncated: [bool; 2],
    pub closed: bool,
    /// Sign of `Im G` on the left of each segment, in travel direction.
    pub side_signs: Vec<i8>,
    /// Nominal step.
    pub step: f64,
    pub max_residual: f64,
}

impl CurveComponent {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        polyline_distance(&self.points, p)
    }

    pub fn endpoints(&self) -> Option<(Complex64, Complex64)> {
        Some((*self.points.first()?, *self.points.last()?))
    }

    pub fn exit_edges(&self) -> Vec<Edge> {
        self.ends
            .iter()
            .filter_map(|e| match e {
                Termination::ExitedWindow(edge) => Some(*edge),
                _ => None,
            })
            .collect()
    }
}

pub(crate) fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let u = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + d * u)).norm()
}

pub(crate) fn polyline_distance(points: &[Complex64], p: Complex64) -> f64 {
    match points.len() {
        0 => f64::INFINITY,
        1 => (points[0] - p).norm(),
        _ => points
            .windows(2)
            .map(|w| segment_distance(w[0], w[1], p))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Intersection parameters `(u, v)` of segments `a0a1` and `b0b1`.
pub(crate) fn segment_intersection(
    a0: Complex64,
    a1: Complex64,
    b0: Complex64,
    b1: Complex64,
) -> Option<(f64, f64)> {
    let da = a1 - a0;
    let db = b1 - b0;
    let cross = |x: Complex64, y: Complex64| x.re * y.im - x.im * y.re;
    let den = cross(da, db);
    // parallel up to rounding
    if den.abs() <= 1e-12 * da.norm() * db.norm() {
        return None;
    }
    let w = b0 - a0;
    let u = cross(w, db) / den;
    let v = cross(w, da) / den;
    if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
        Some((u, v))
    } else {
        None
    }
}

/// Even-odd rule.
pub(crate) fn point_in_polygon(poly: &[Complex64], p: Complex64) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn write_component_csv<W: Write>(c: &CurveComponent, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re", "im", "f_re", "f_im"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for (p, v) in c.points.iter().zip(c.values.iter()) {
        w.write_record([
            p.re.to_string(),
            p.im.to_string(),
            v.re.to_string(),
            v.im.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Manifest entry for one component; the polyline itself goes to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub id: usize,
    pub file: String,
    pub constraint: Constraint,
    pub classification: Classification,
    pub strip_index: Option<i64>,
    pub endpoints: [Complex64; 2],
    pub ends: [Termination; 2],
    pub window_truncated: [bool; 2],
    pub closed: bool,
    pub points: usize,
    pub max_residual: f64,
}

impl ComponentSummary {
    pub fn new(id: usize, file: String, c: &CurveComponent) -> Self {
        let (a, b) = c.endpoints().unwrap_or_default();
        ComponentSummary {
            id,
            file,
            constraint: c.constraint,
            classification: c.classification,
            strip_index: c.strip_index,
            endpoints: [a, b],
            ends: c.ends,
            window_truncated: c.window_truncated,
            closed: c.closed,
            points: c.len(),
            max_residual: c.max_residual,
        }
    }
}

pub(crate) fn window_edge_point(w: &SearchRectangle, p: Complex64) -> Option<Edge> {
    let tol = 1e-9 * (1.0 + w.diagonal());
    if (p.re - w.sigma_min).abs() <= tol {
        Some(Edge::Left)
    } else if (p.re - w.sigma_max).abs() <= tol {
        Some(Edge::Right)
    } else if (p.im - w.t_min).abs() <= tol {
        Some(Edge::Bottom)
    } else if (p.im - w.t_max).abs() <= tol {
        Some(Edge::Top)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polygon_membership() {
        let sq = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        assert!(point_in_polygon(&sq, c(0.5, 0.5)));
        assert!(!point_in_polygon(&sq, c(1.5, 0.5)));
    }

    #[test]
    fn crossing_segments() {
        let (u, v) =
            segment_intersection(c(0.0, 0.0), c(2.0, 2.0), c(0.0, 2.0), c(2.0, 0.0)).unwrap();
        assert!((u - 0.5).abs() < 1e-15 && (v - 0.5).abs() < 1e-15);
        assert!(segment_intersection(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)).is_none());
    }

    #[test]
    fn circle_level_uses_modulus() {
        let k = Constraint::CirclePreimage { radius: 2.0 };
        assert!(k.level(c(0.0, 2.0)).abs() < 1e-15);
        assert!(k.level(c(3.0, 0.0)) > 0.0);
    }
}
