use super::quadrature::{gauss_legendre, polygon_integral, polyline_integral};
use super::{Anchor, DomainPatch, InvolutionMap, ReportRow, Side, VerificationReport};
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use crate::trace::{
    segment_intersection, trace_branches_at_zero, trace_level_curve_with, Constraint, TraceOptions,
};
use crate::zeros::SearchRectangle;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralOptions {
    /// Relative tolerance against `πr²`, `2πr` and `r`.
    pub tolerance: f64,
    /// Relative tolerance between the `Ω` and `Ω'` integrals.
    pub agreement: f64,
    /// Gauss points per direction on each fan triangle.
    pub area_order: usize,
    /// Gauss points per polyline segment.
    pub length_order: usize,
    /// Tracing step as a fraction of the loop radius.
    pub step_fraction: f64,
    /// Number of rays in the fan.
    pub rays: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            tolerance: 5e-3,
            agreement: 2e-3,
            area_order: 4,
            length_order: 8,
            step_fraction: 1.0 / 400.0,
            rays: 8,
        }
    }
}

/// A piece of one `|f| = r` loop between consecutive crossings of the
/// dividing curve, closed off along that curve.
struct Piece {
    side: Side,
    loop_index: usize,
    arc: Vec<Complex64>,
    polygon: Vec<Complex64>,
    origin: Complex64,
}

struct Resolved {
    /// One loop enclosing every anchor zero.
    merged: bool,
    loops: Vec<(Vec<Complex64>, Complex64)>,
    pieces: Vec<Piece>,
    window: SearchRectangle,
    step: f64,
    loop_radius: f64,
}

fn err(r: f64, reason: impl Into<String>) -> Error {
    Error::RegionUnresolved {
        r,
        reason: reason.into(),
    }
}

/// Smallest `ρ ≤ max` with `|f(a + ρ dir)| ≥ r`.
fn crossing_radius(
    f: &AnalyticFunctionHandle,
    a: Complex64,
    dir: Complex64,
    r: f64,
    max: f64,
) -> Result<f64> {
    const MARCH: usize = 64;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=MARCH {
        let rho = max * k as f64 / MARCH as f64;
        if f.value(a + dir * rho)?.norm() >= r {
            hi = Some(rho);
            break;
        }
        lo = rho;
    }
    let mut hi =
        hi.ok_or_else(|| err(r, format!("|f| stays below r within the patch from {a}")))?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f.value(a + dir * mid)?.norm() >= r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn square(center: Complex64, half: f64) -> Result<SearchRectangle> {
    SearchRectangle::new(
        center.re - half,
        center.re + half,
        center.im - half,
        center.im + half,
    )
}

fn cross_params(path: &[Complex64], closed: bool, cut: &[Complex64]) -> Vec<(f64, f64, Complex64)> {
    let n = path.len();
    let segs = if closed { n } else { n - 1 };
    let mut out = Vec::new();
    for i in 0..segs {
        let (a0, a1) = (path[i], path[(i + 1) % n]);
        for j in 0..cut.len().saturating_sub(1) {
            if let Some((u, v)) = segment_intersection(a0, a1, cut[j], cut[j + 1]) {
                out.push((i as f64 + u, j as f64 + v, a0 + (a1 - a0) * u));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    // a crossing through a shared vertex is reported by both segments
    out.dedup_by(|x, y| (x.2 - y.2).norm() <= 1e-12 * (1.0 + x.2.norm()));
    out
}

/// Vertices of `path` strictly between parameters `from` and `to` (loop
/// direction, wrapping for closed paths).
fn between(path: &[Complex64], from: f64, to: f64) -> Vec<Complex64> {
    let n = path.len();
    let start = from.floor() as usize + 1;
    let mut end = to.floor() as usize;
    if to < from {
        end += n;
    }
    (start..=end).map(|k| path[k % n]).collect()
}

fn resolve(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    r: f64,
    opts: &IntegralOptions,
) -> Result<Resolved> {
    let center = patch.center;
    let zeros = patch.anchor.zeros();
    let dirs: Vec<Complex64> = (0..8)
        .map(|k| Complex64::from_polar(1.0, PI / 8.0 + k as f64 * PI / 4.0))
        .collect();
    let merged = zeros.len() == 1 || f.value(center)?.norm() < r;
    let anchors: Vec<Complex64> = if merged { vec![center] } else { zeros.clone() };

    let mut seeds = Vec::new();
    let mut loop_radius: f64 = 0.0;
    for &a in &anchors {
        let radii: Vec<f64> = dirs
            .iter()
            .map(|&d| crossing_radius(f, a, d, r, patch.extent))
            .collect::<Result<_>>()?;
        let rmax = radii.iter().copied().fold(0.0, f64::max);
        loop_radius = loop_radius.max(rmax);
        seeds.push((a, a + dirs[0] * radii[0], rmax));
    }
    let step = opts.step_fraction * seeds.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let trace_opts = TraceOptions {
        step: Some(step),
        ..TraceOptions::default()
    };

    let mut loops = Vec::new();
    for &(a, seed, rmax) in &seeds {
        let w = square(a, 1.6 * rmax)?;
        let c = trace_level_curve_with(
            f,
            seed,
            Constraint::CirclePreimage { radius: r },
            w,
            trace_opts,
        )
        .map_err(|e| err(r, format!("loop around {a}: {e}")))?;
        if !c.closed {
            return Err(err(
                r,
                format!("loop around {a} did not close: {:?}", c.ends),
            ));
        }
        let mut pts = c.points;
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.iter().any(|p| (p - center).norm() >= patch.extent) {
            return Err(err(r, "loop leaves the patch"));
        }
        loops.push((pts, a));
    }

    let half = seeds
        .iter()
        .map(|&(a, _, rmax)| (a - center).norm() + 1.6 * rmax)
        .fold(0.0, f64::max);
    let window = square(center, half)?;

    let mut pieces = Vec::new();
    if patch.is_simple() {
        let (pts, a) = &loops[0];
        let mut arc = pts.clone();
        arc.push(pts[0]);
        pieces.push(Piece {
            side: Side::Omega,
            loop_index: 0,
            arc,
            polygon: pts.clone(),
            origin: *a,
        });
    } else {
        let cut = local_cut(f, patch, window, trace_opts)?;
        for (li, (pts, a)) in loops.iter().enumerate() {
            let xs = cross_params(pts, true, &cut);
            if xs.len() < 2 || xs.len() % 2 == 1 {
                return Err(err(
                    r,
                    format!("loop crosses the dividing curve {} times", xs.len()),
                ));
            }
            for k in 0..xs.len() {
                let (p0, c0, x0) = xs[k];
                let (p1, c1, x1) = xs[(k + 1) % xs.len()];
                let mut arc = vec![x0];
                arc.extend(between(pts, p0, p1));
                arc.push(x1);
                let mid = arc[arc.len() / 2];
                let side = patch
                    .side_of(mid)
                    .ok_or_else(|| err(r, "loop piece outside the patch"))?;
                let mut polygon = arc.clone();
                if c1 > c0 {
                    polygon.extend(
                        (c0.floor() as usize + 1..=c1.floor() as usize)
                            .rev()
                            .map(|j| cut[j]),
                    );
                } else {
                    polygon.extend((c1.floor() as usize + 1..=c0.floor() as usize).map(|j| cut[j]));
                }
                pieces.push(Piece {
                    side,
                    loop_index: li,
                    arc,
                    polygon,
                    origin: *a,
                });
            }
        }
    }
    Ok(Resolved {
        merged,
        loops,
        pieces,
        window,
        step,
        loop_radius,
    })
}

/// Negative-axis pre-image arcs through the anchor zeros, traced at the
/// resolution of the loops.
fn local_cut(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    window: SearchRectangle,
    opts: TraceOptions,
) -> Result<Vec<Complex64>> {
    let ray = Constraint::RayPreimage { theta: PI };
    let mut cut = Vec::new();
    match patch.anchor {
        Anchor::DoubleZero(s0) => {
            let arcs = trace_branches_at_zero(f, s0, 2, ray, window, opts)?;
            cut.extend(arcs[0].points.iter().rev());
            cut.extend(arcs[1].points.iter().skip(1));
        }
        Anchor::Pair(a, b) => {
            let arc_a = trace_branches_at_zero(f, a, 1, ray, window, opts)?;
            let arc_b = trace_branches_at_zero(f, b, 1, ray, window, opts)?;
            cut.extend(arc_a[0].points.iter().rev());
            cut.extend(arc_b[0].points.iter());
        }
        Anchor::Simple(s0) => {
            cut = trace_branches_at_zero(f, s0, 1, ray, window, opts)?
                .remove(0)
                .points;
        }
    }
    Ok(cut)
}

fn abs_derivative(f: &AnalyticFunctionHandle, s: Complex64) -> Result<f64> {
    Ok(f.value_and_derivative(s)?.1.norm())
}

fn side_label(side: Side) -> &'static str {
    match side {
        Side::Omega => "omega",
        Side::OmegaPrime => "omega_prime",
    }
}

/// Per-side sums of a per-piece quantity, or per-loop sums when the loops
/// have not merged.
fn report_pieces(
    rep: &mut VerificationReport,
    kind: &str,
    r: f64,
    target: f64,
    res: &Resolved,
    values: &[f64],
    patch: &DomainPatch,
    opts: &IntegralOptions,
) {
    if res.merged {
        let total = |side| {
            res.pieces
                .iter()
                .zip(values)
                .filter(|(p, _)| p.side == side)
                .map(|(_, v)| *v)
                .sum::<f64>()
        };
        let a = total(Side::Omega);
        rep.push(ReportRow::new(
            format!("{kind}_omega"),
            r,
            a,
            target,
            opts.tolerance,
        ));
        if !patch.is_simple() {
            let b = total(Side::OmegaPrime);
            rep.push(ReportRow::new(
                format!("{kind}_omega_prime"),
                r,
                b,
                target,
                opts.tolerance,
            ));
            rep.push(ReportRow::new(
                format!("{kind}_agreement"),
                r,
                b,
                a,
                opts.agreement,
            ));
        }
    } else {
        for li in 0..res.loops.len() {
            let of_loop: Vec<(&Piece, f64)> = res
                .pieces
                .iter()
                .zip(values)
                .filter(|(p, _)| p.loop_index == li)
                .map(|(p, v)| (p, *v))
                .collect();
            let total: f64 = of_loop.iter().map(|x| x.1).sum();
            rep.push(ReportRow::new(
                format!("{kind}_loop_{li}"),
                r,
                total,
                target,
                opts.tolerance,
            ));
            for side in [Side::Omega, Side::OmegaPrime] {
                let part: f64 = of_loop
                    .iter()
                    .filter(|x| x.0.side == side)
                    .map(|x| x.1)
                    .sum();
                // the split of one disc between the two sides is reported, not judged
                rep.push(ReportRow::new(
                    format!("{kind}_loop_{li}_{}", side_label(side)),
                    r,
                    part,
                    target,
                    1.0,
                ));
            }
        }
    }
}

fn regime_note(rep: &mut VerificationReport, patch: &DomainPatch, r: f64, res: &Resolved) {
    if let Anchor::Pair(..) = patch.anchor {
        let merge = patch.anchor.merge_scale();
        let note = if !res.merged {
            format!("r = {r:e}: two separate loops, one per zero; component split reported")
        } else if res.loop_radius < merge {
            format!(
                "r = {r:e}: single loop of radius {:e} below the merge scale {merge:e}",
                res.loop_radius
            )
        } else {
            format!(
                "r = {r:e}: single loop of radius {:e} above the merge scale {merge:e}",
                res.loop_radius
            )
        };
        rep.notes.push(note);
    }
}

/// `∬ |f'|²` over the parts of the pre-image of `|w| < r` on each side,
/// against `πr²`.
pub fn area_integral_check(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    radii: &[f64],
) -> Result<VerificationReport> {
    area_integral_check_with(f, patch, radii, IntegralOptions::default())
}

pub fn area_integral_check_with(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    radii: &[f64],
    opts: IntegralOptions,
) -> Result<VerificationReport> {
    let rule = gauss_legendre(opts.area_order);
    let per_r: Vec<Result<(f64, Resolved, Vec<f64>)>> = radii
        .par_iter()
        .map(|&r| {
            let res = resolve(f, patch, r, &opts)?;
            let g = |s: Complex64| abs_derivative(f, s).map(|d| d * d);
            let vals = res
                .pieces
                .iter()
                .map(|p| polygon_integral(&p.polygon, p.origin, &rule, &g).map(f64::abs))
                .collect::<Result<Vec<f64>>>()?;
            Ok((r, res, vals))
        })
        .collect();
    let mut rep = VerificationReport::new("area", radii.to_vec());
    for item in per_r {
        let (r, res, vals) = item?;
        regime_note(&mut rep, patch, r, &res);
        report_pieces(&mut rep, "area", r, PI * r * r, &res, &vals, patch, &opts);
    }
    Ok(rep)
}

/// `∫ |f'| |ds|` along the pieces of `|f| = r` on each side, against `2πr`,
/// and along a fan of ray pre-images up to `|f| = r`, against `r`.
pub fn length_integral_check(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    radii: &[f64],
) -> Result<VerificationReport> {
    length_integral_check_with(f, patch, radii, IntegralOptions::default())
}

pub fn length_integral_check_with(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    radii: &[f64],
    opts: IntegralOptions,
) -> Result<VerificationReport> {
    let rule = gauss_legendre(opts.length_order);
    let g = |s: Complex64| abs_derivative(f, s);
    let per_r: Vec<Result<(f64, Resolved, Vec<f64>, Vec<(Side, f64)>)>> = radii
        .par_iter()
        .map(|&r| {
            let res = resolve(f, patch, r, &opts)?;
            let vals = res
                .pieces
                .iter()
                .map(|p| polyline_integral(&p.arc, &rule, &g))
                .collect::<Result<Vec<f64>>>()?;
            let fan = if res.merged && !matches!(patch.anchor, Anchor::Pair(..)) {
                ray_fan(f, patch, r, &res, &rule, &opts)?
            } else {
                Vec::new()
            };
            Ok((r, res, vals, fan))
        })
        .collect();
    let mut rep = VerificationReport::new("length", radii.to_vec());
    for item in per_r {
        let (r, res, vals, fan) = item?;
        regime_note(&mut rep, patch, r, &res);
        report_pieces(
            &mut rep,
            "length",
            r,
            2.0 * PI * r,
            &res,
            &vals,
            patch,
            &opts,
        );
        for (k, (side, v)) in fan.into_iter().enumerate() {
            let label = format!("ray_{}_{}", k / 2, side_label(side));
            rep.push(ReportRow::new(label, r, v, r, opts.tolerance));
        }
    }
    Ok(rep)
}

/// `∫ |f'| |ds|` from the zero along each pre-image of the rays
/// `arg w = π/n + 2πk/n` until `|f| = r`.
fn ray_fan(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    r: f64,
    res: &Resolved,
    rule: &[(f64, f64)],
    opts: &IntegralOptions,
) -> Result<Vec<(Side, f64)>> {
    let (s0, m) = match patch.anchor {
        Anchor::DoubleZero(s0) => (s0, 2),
        Anchor::Simple(s0) => (s0, 1),
        Anchor::Pair(..) => return Ok(Vec::new()),
    };
    let trace_opts = TraceOptions {
        step: Some(res.step),
        ..TraceOptions::default()
    };
    let g = |s: Complex64| abs_derivative(f, s);
    let mut out = Vec::new();
    for k in 0..opts.rays {
        let theta = PI / opts.rays as f64 + 2.0 * PI * k as f64 / opts.rays as f64;
        let arcs = trace_branches_at_zero(
            f,
            s0,
            m,
            Constraint::RayPreimage { theta },
            res.window,
            trace_opts,
        )?;
        let mut found = Vec::new();
        for arc in arcs {
            let pts = truncate_at_level(f, &arc.points, r)?;
            let side = patch
                .side_of(pts[pts.len() / 2])
                .ok_or_else(|| err(r, "ray pre-image outside the patch"))?;
            found.push((side, polyline_integral(&pts, rule, &g)?));
        }
        found.sort_by_key(|x| x.0 != Side::Omega);
        out.extend(found);
    }
    Ok(out)
}

/// Cuts a polyline starting at a zero where `|f|` first reaches `r`.
fn truncate_at_level(
    f: &AnalyticFunctionHandle,
    points: &[Complex64],
    r: f64,
) -> Result<Vec<Complex64>> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        if f.value(w[1])?.norm() >= r {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f.value(w[0] + (w[1] - w[0]) * mid)?.norm() >= r {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(w[0] + (w[1] - w[0]) * (0.5 * (lo + hi)));
            return Ok(out);
        }
        out.push(w[1]);
    }
    Err(err(r, "ray pre-image leaves the window before |f| = r"))
}

/// `∬_{Δ_r} |f'(φ(s))|² |φ'(s)|²` with the numerical `φ`, against the
/// directly computed `∬_{Δ'_r} |f'|²`.
/// Vertex budget per piece for the transported check.
const TRANSPORT_VERTICES: usize = 240;

/// Every `k`-th vertex, plus the corners (turns above 5°), so that about
/// `budget` vertices remain.
fn decimate(poly: &[Complex64], budget: usize) -> Vec<Complex64> {
    let n = poly.len();
    if n <= budget {
        return poly.to_vec();
    }
    let k = n.div_ceil(budget);
    let corner = 5f64.to_radians();
    (0..n)
        .filter(|&i| {
            let (a, b, c) = (poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]);
            i % k == 0 || ((c - b) * (b - a).conj()).arg().abs() > corner
        })
        .map(|i| poly[i])
        .collect()
}

pub fn transported_area_check(
    f: &AnalyticFunctionHandle,
    patch: &DomainPatch,
    map: &InvolutionMap,
    radii: &[f64],
    tolerance: f64,
) -> Result<VerificationReport> {
    let opts = IntegralOptions::default();
    let rule = gauss_legendre(3);
    let direct = |s: Complex64| abs_derivative(f, s).map(|d| d * d);
    let moved = |s: Complex64| -> Result<f64> {
        let p = map.phi(f, s)?;
        let dp = map.phi_prime_fd(f, s)?;
        Ok((f.value_and_derivative(p)?.1 * dp).norm_sqr())
    };
    let mut rep = VerificationReport::new("area_transported", radii.to_vec());
    for &r in radii {
        let res = resolve(f, patch, r, &opts)?;
        if !res.merged {
            rep.notes
                .push(format!("r = {r:e}: loops not merged, skipped"));
            continue;
        }
        let mut omega = 0.0;
        let mut omega_prime = 0.0;
        for p in &res.pieces {
            let poly = decimate(&p.polygon, TRANSPORT_VERTICES);
            match p.side {
                Side::Omega => omega += polygon_integral(&poly, p.origin, &rule, &moved)?.abs(),
                Side::OmegaPrime => {
                    omega_prime += polygon_integral(&poly, p.origin, &rule, &direct)?.abs()
                }
            }
        }
        rep.push(ReportRow::new(
            "area_transported",
            r,
            omega,
            omega_prime,
            tolerance,
        ));
    }
    Ok(rep)
}
