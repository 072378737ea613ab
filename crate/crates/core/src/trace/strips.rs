use super::tracer::{trace_all, TraceFailure, TraceOptions};
use super::{
    point_in_polygon, polyline_distance, segment_intersection, Classification, Constraint,
    CurveComponent, Edge, Termination,
};
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use crate::zeros::{locate_zeros_with, LocateOptions, SearchRectangle, ZeroRecord};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Fewest samples a component needs before its image is judged.
pub const MIN_CLASSIFY_POINTS: usize = 5;
/// Largest accepted angle, in degrees, between a curve tangent and the
/// horizontal at an intertwining point.
pub const HORIZONTAL_TOLERANCE_DEG: f64 = 2.0;

fn monotone(xs: &[f64]) -> bool {
    let scale = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let mut dir = 0.0;
    for w in xs.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol {
            continue;
        }
        if dir == 0.0 {
            dir = d.signum();
        } else if d.signum() != dir {
            return false;
        }
    }
    true
}

/// Taxonomy of a real-axis pre-image component by the range and
/// monotonicity of its image.
pub fn classify_component(
    f: &AnalyticFunctionHandle,
    c: &CurveComponent,
) -> Result<Classification> {
    if c.len() < MIN_CLASSIFY_POINTS {
        return Err(Error::InsufficientArc { points: c.len() });
    }
    if c.constraint != Constraint::RealAxisPreimage {
        return Ok(Classification::Unclassified);
    }
    if f.is_derivative() {
        return Ok(Classification::Upsilon);
    }
    let slit = f.slit_origin();
    let re: Vec<f64> = c.values.iter().map(|v| v.re).collect();
    let lo = re.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9 * (1.0 + slit.abs());
    if lo > slit - slack {
        return Ok(Classification::GammaPrime);
    }
    if !monotone(&re) {
        return Ok(Classification::Unclassified);
    }
    if hi < slit {
        Ok(Classification::GammaZero)
    } else if lo < 0.0 && hi > slit {
        Ok(Classification::GammaJ)
    } else {
        Ok(Classification::Unclassified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripRecord {
    /// Strip `k` lies above boundary `k`; `-1` is the part below the first
    /// boundary.
    pub index: i64,
    pub lower: Option<CurveComponent>,
    pub upper: Option<CurveComponent>,
    /// Both boundaries present and crossing the window from side to side.
    pub complete: bool,
    pub contained_zeros: Vec<ZeroRecord>,
    /// Zeros in the strip counted with multiplicity.
    pub j_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripPartition {
    pub window: SearchRectangle,
    pub strips: Vec<StripRecord>,
    /// Every traced real-axis component, classified, with strip indices.
    pub components: Vec<CurveComponent>,
    pub zeros: Vec<ZeroRecord>,
    /// Zeros in the window counted with multiplicity.
    pub window_zero_count: u32,
    pub issues: Vec<String>,
}

impl StripPartition {
    pub fn complete_j_total(&self) -> u32 {
        self.strips
            .iter()
            .filter(|s| s.complete)
            .map(|s| s.j_count)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripOptions {
    pub grid_density: usize,
    pub trace: TraceOptions,
    pub locate: LocateOptions,
}

impl Default for StripOptions {
    fn default() -> Self {
        StripOptions {
            grid_density: 64,
            trace: TraceOptions::default(),
            locate: LocateOptions::default(),
        }
    }
}

fn spans_window(c: &CurveComponent) -> bool {
    let e = c.exit_edges();
    e.contains(&Edge::Left) && e.contains(&Edge::Right)
}

/// Boundary polyline oriented from its left end to its right end.
fn left_to_right(c: &CurveComponent) -> Vec<Complex64> {
    let mut p = c.points.clone();
    if p.first().map(|a| a.re) > p.last().map(|b| b.re) {
        p.reverse();
    }
    p
}

/// True when `p` lies above a side-to-side boundary curve.
fn above(boundary: &[Complex64], window: &SearchRectangle, p: Complex64) -> bool {
    let top = window.t_max + window.height() + 1.0;
    let mut poly = boundary.to_vec();
    let (a, b) = (boundary[0], boundary[boundary.len() - 1]);
    poly.push(Complex64::new(b.re, top));
    poly.push(Complex64::new(a.re, top));
    point_in_polygon(&poly, p)
}

fn polylines_cross(a: &[Complex64], b: &[Complex64]) -> bool {
    a.windows(2).any(|x| {
        b.windows(2)
            .any(|y| segment_intersection(x[0], x[1], y[0], y[1]).is_some())
    })
}

pub fn partition_strips(
    f: &AnalyticFunctionHandle,
    window: SearchRectangle,
) -> Result<StripPartition> {
    partition_strips_with(f, window, StripOptions::default())
}

/// Traces the real-axis pre-image in `window`, orders the side-to-side
/// boundary curves by height and attaches the located zeros to the strips
/// between them. Strips touching the window's top or bottom are partial.
pub fn partition_strips_with(
    f: &AnalyticFunctionHandle,
    window: SearchRectangle,
    opts: StripOptions,
) -> Result<StripPartition> {
    window.validate()?;
    let set = trace_all(
        f,
        window,
        Constraint::RealAxisPreimage,
        opts.grid_density,
        opts.trace,
    )?;
    let mut components = set.components;
    let mut issues: Vec<String> = set
        .failures
        .iter()
        .map(|x| format!("{}: seed {} not traced: {}", x.code, x.seed, x.message))
        .collect();
    for c in components.iter_mut() {
        c.classification = classify_component(f, c).unwrap_or(Classification::Unclassified);
    }

    let mut boundaries: Vec<(f64, usize)> = Vec::new();
    for (i, c) in components.iter().enumerate() {
        if c.classification != Classification::GammaPrime {
            continue;
        }
        if spans_window(c) {
            let mean = c.points.iter().map(|p| p.im).sum::<f64>() / c.len() as f64;
            boundaries.push((mean, i));
        } else {
            let (a, b) = c.endpoints().unwrap_or_default();
            issues.push(format!(
                "{}: boundary candidate from {a} to {b} does not cross the window side to side",
                Error::IncompleteBoundary.code()
            ));
        }
    }
    boundaries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lines: Vec<Vec<Complex64>> = boundaries
        .iter()
        .map(|&(_, i)| left_to_right(&components[i]))
        .collect();
    let mut crossing = vec![false; lines.len()];
    for k in 1..lines.len() {
        if polylines_cross(&lines[k - 1], &lines[k]) {
            crossing[k - 1] = true;
            crossing[k] = true;
            issues.push(format!(
                "boundaries {} and {} intersect in the window",
                k - 1,
                k
            ));
        }
    }

    // strip of a point: number of boundaries below it, minus one
    let strip_of =
        |p: Complex64| -> i64 { lines.iter().filter(|l| above(l, &window, p)).count() as i64 - 1 };
    for (k, &(_, i)) in boundaries.iter().enumerate() {
        components[i].strip_index = Some(k as i64);
    }
    let boundary_ids: Vec<usize> = boundaries.iter().map(|&(_, i)| i).collect();
    for (i, c) in components.iter_mut().enumerate() {
        if !boundary_ids.contains(&i) {
            let mid = c.points[c.len() / 2];
            c.strip_index = Some(strip_of(mid));
        }
    }

    let zeros = locate_zeros_with(f, window, opts.locate)?;
    let window_zero_count = zeros.iter().map(|z| z.multiplicity).sum();
    let b = boundaries.len() as i64;
    if b < 2 {
        issues.push("fewer than two side-to-side boundaries: no complete strip".into());
    }
    let mut strips = Vec::new();
    for k in -1..b {
        let lower = (k >= 0).then(|| components[boundaries[k as usize].1].clone());
        let upper = (k + 1 < b).then(|| components[boundaries[(k + 1) as usize].1].clone());
        let complete = lower.is_some()
            && upper.is_some()
            && !crossing[k as usize]
            && !crossing[(k + 1) as usize];
        let contained: Vec<ZeroRecord> = zeros
            .iter()
            .filter(|z| strip_of(z.location) == k)
            .cloned()
            .collect();
        strips.push(StripRecord {
            index: k,
            lower,
            upper,
            complete,
            j_count: contained.iter().map(|z| z.multiplicity).sum(),
            contained_zeros: contained,
        });
    }
    Ok(StripPartition {
        window,
        strips,
        components,
        zeros,
        window_zero_count,
        issues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub upsilon: usize,
    pub gamma: usize,
    pub point: Complex64,
    pub f_value: Complex64,
    pub derivative: Complex64,
    /// Angle of the curve tangent `conj f'` to the horizontal, in degrees.
    pub tangent_angle_deg: f64,
    /// Same angle read off the traced polyline around the point.
    pub polyline_angle_deg: f64,
    pub horizontal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpsilonReport {
    pub upsilon: usize,
    /// Distinct `f`-curves met.
    pub gammas: Vec<usize>,
    pub window_truncated: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    pub window: SearchRectangle,
    pub gamma: Vec<CurveComponent>,
    pub upsilon: Vec<CurveComponent>,
    pub intersections: Vec<Intersection>,
    pub per_upsilon: Vec<UpsilonReport>,
    /// Every `f'`-curve meets exactly one `f`-curve.
    pub unique: bool,
    pub all_horizontal: bool,
    pub failures: Vec<TraceFailure>,
}

fn angle_to_horizontal(d: Complex64) -> f64 {
    let a = d.im.atan2(d.re).abs().to_degrees();
    a.min(180.0 - a)
}

/// Newton on `(Im f, Im f') = 0` from `p`.
fn refine_crossing(f: &AnalyticFunctionHandle, p: Complex64) -> Result<Complex64> {
    let mut s = p;
    for _ in 0..30 {
        let j = f.jet(s)?;
        let (v, d1, d2) = (j.value(), j.derivative(1), j.derivative(2));
        let (a, b) = (v.im, d1.im);
        // d/dσ Im g = Im g', d/dt Im g = Re g'
        let (j11, j12, j21, j22) = (d1.im, d1.re, d2.im, d2.re);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (a * j22 - b * j12) / det;
        let dy = (j11 * b - j21 * a) / det;
        let step = Complex64::new(dx, dy);
        s -= step;
        if step.norm() <= 1e-15 * (1.0 + s.norm()) {
            break;
        }
    }
    Ok(s)
}

fn polyline_angle(points: &[Complex64], p: Complex64) -> f64 {
    let mut best = (f64::INFINITY, 90.0);
    for w in points.windows(2) {
        let d = super::segment_distance(w[0], w[1], p);
        if d < best.0 {
            best = (d, angle_to_horizontal(w[1] - w[0]));
        }
    }
    best.1
}

/// Intersections of the `f'`-curves with the `f`-curves of the real-axis
/// pre-image, each refined and checked for a horizontal `f`-tangent.
pub fn intertwining_check(
    f: &AnalyticFunctionHandle,
    window: SearchRectangle,
    grid_density: usize,
    opts: TraceOptions,
) -> Result<IntertwiningReport> {
    let df = f.derivative_handle();
    let gamma_set = trace_all(f, window, Constraint::RealAxisPreimage, grid_density, opts)?;
    let mut gamma = gamma_set.components;
    for c in gamma.iter_mut() {
        c.classification = classify_component(f, c).unwrap_or(Classification::Unclassified);
    }
    let upsilon_set = trace_all(
        &df,
        window,
        Constraint::RealAxisPreimage,
        grid_density,
        opts,
    )?;
    let mut upsilon = upsilon_set.components;
    let failures: Vec<TraceFailure> = gamma_set
        .failures
        .into_iter()
        .chain(upsilon_set.failures)
        .collect();
    for c in upsilon.iter_mut() {
        c.classification = Classification::Upsilon;
    }

    let mut raw: Vec<(usize, usize, Complex64)> = Vec::new();
    for (u, up) in upsilon.iter().enumerate() {
        for (g, gc) in gamma.iter().enumerate() {
            for a in up.points.windows(2) {
                for b in gc.points.windows(2) {
                    if let Some((x, _)) = segment_intersection(a[0], a[1], b[0], b[1]) {
                        raw.push((u, g, a[0] + (a[1] - a[0]) * x));
                    }
                }
            }
            // f-curves stop at critical points, which can lie on an f'-curve
            for (k, end) in gc.ends.iter().enumerate() {
                if *end == Termination::CriticalPoint {
                    let p = if k == 0 {
                        gc.points[0]
                    } else {
                        gc.points[gc.len() - 1]
                    };
                    if polyline_distance(&up.points, p) < 2.0 * gc.step {
                        raw.push((u, g, p));
                    }
                }
            }
        }
    }

    let mut intersections: Vec<Intersection> = Vec::new();
    for (u, g, p) in raw {
        let s = refine_crossing(f, p)?;
        let s = if (s - p).norm() < 4.0 * gamma[g].step {
            s
        } else {
            p
        };
        let (v, d) = f.value_and_derivative(s)?;
        let scale = 1.0 + v.norm().max(d.norm());
        if d.norm() <= 1e-8 * scale && v.norm() <= 1e-8 * scale {
            return Err(Error::TangentUndefined { at: s });
        }
        let dup = intersections
            .iter()
            .any(|x| x.upsilon == u && x.gamma == g && (x.point - s).norm() < 2.0 * gamma[g].step);
        if dup {
            continue;
        }
        let tangent = angle_to_horizontal(d.conj());
        intersections.push(Intersection {
            upsilon: u,
            gamma: g,
            point: s,
            f_value: v,
            derivative: d,
            tangent_angle_deg: tangent,
            polyline_angle_deg: polyline_angle(&gamma[g].points, s),
            horizontal: tangent <= HORIZONTAL_TOLERANCE_DEG,
        });
    }
    intersections.sort_by(|a, b| {
        a.point
            .im
            .total_cmp(&b.point.im)
            .then(a.point.re.total_cmp(&b.point.re))
    });

    let per_upsilon: Vec<UpsilonReport> = upsilon
        .iter()
        .enumerate()
        .map(|(u, c)| {
            let mut gammas: Vec<usize> = intersections
                .iter()
                .filter(|x| x.upsilon == u)
                .map(|x| x.gamma)
                .collect();
            gammas.sort_unstable();
            gammas.dedup();
            UpsilonReport {
                upsilon: u,
                gammas,
                window_truncated: c.window_truncated,
            }
        })
        .collect();
    let unique = per_upsilon.iter().all(|r| r.gammas.len() == 1);
    let all_horizontal = intersections.iter().all(|x| x.horizontal);
    Ok(IntertwiningReport {
        window,
        gamma,
        upsilon,
        intersections,
        per_upsilon,
        unique,
        all_horizontal,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_detects_turns() {
        assert!(monotone(&[1.0, 2.0, 2.0, 3.0]));
        assert!(monotone(&[3.0, 1.0, -4.0]));
        assert!(!monotone(&[1.0, 2.0, 1.5]));
    }

    #[test]
    fn horizontal_angle_is_symmetric() {
        assert!(angle_to_horizontal(Complex64::new(-1.0, 0.0)) < 1e-12);
        assert!((angle_to_horizontal(Complex64::new(0.0, 1.0)) - 90.0).abs() < 1e-12);
        assert!((angle_to_horizontal(Complex64::new(1.0, -1.0)) - 45.0).abs() < 1e-12);
    }

    #[test]
    fn above_uses_curve_shape() {
        let w = SearchRectangle::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let line = [
            Complex64::new(0.0, 0.5),
            Complex64::new(1.0, 1.5),
            Complex64::new(2.0, 0.5),
        ];
        assert!(above(&line, &w, Complex64::new(1.0, 1.7)));
        assert!(!above(&line, &w, Complex64::new(1.0, 1.3)));
        assert!(above(&line, &w, Complex64::new(0.1, 1.0)));
    }
}
