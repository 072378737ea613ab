use super::{
    polyline_distance, segment_distance, window_edge_point, Classification, Constraint,
    CurveComponent, Edge, Local, Termination,
};
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use crate::zeros::SearchRectangle;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Initial step; window diagonal / 1000 when absent.
    pub step: Option<f64>,
    pub max_steps: usize,
    /// Corrector stops when `|Im G| <= tolerance * (1 + |G|)`.
    pub tolerance: f64,
    /// `|G'|` below this (relative to `1 + |G|`) makes a seed degenerate.
    pub degeneracy: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            step: None,
            max_steps: 200_000,
            tolerance: 1e-10,
            degeneracy: 1e-9,
        }
    }
}

const CORRECTOR_ITERS: usize = 8;
/// Cosine of the largest accepted turn between consecutive tangents.
const TURN_COS: f64 = 0.866;
/// Tracing stops at a critical point whose `|Im G|` is below this multiple
/// of the corrector tolerance.
const CRITICAL_SLACK: f64 = 1e3;
/// Residual accepted from a corrector that has stopped improving.
const STALL_TOLERANCE: f64 = 5e-9;

struct Tracer<'a> {
    f: &'a AnalyticFunctionHandle,
    constraint: Constraint,
    window: SearchRectangle,
    h0: f64,
    hmin: f64,
    hmax: f64,
    opts: TraceOptions,
    poles: Vec<Complex64>,
}

struct Branch {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
    end: Termination,
}

fn unit_tangent(l: &Local) -> Complex64 {
    l.dg.conj() / l.dg.norm()
}

impl<'a> Tracer<'a> {
    fn new(
        f: &'a AnalyticFunctionHandle,
        constraint: Constraint,
        window: SearchRectangle,
        opts: TraceOptions,
    ) -> Self {
        let h0 = opts.step.unwrap_or(window.diagonal() / 1000.0);
        Tracer {
            f,
            constraint,
            window,
            h0,
            hmin: h0 / 64.0,
            hmax: 4.0 * h0,
            opts,
            poles: f.poles(),
        }
    }

    fn local(&self, s: Complex64) -> Result<Local> {
        self.constraint.local(self.f, s)
    }

    fn tol(&self, l: &Local) -> f64 {
        self.opts.tolerance * (1.0 + l.g.norm())
    }

    /// Newton along the gradient of `Im G`. When evaluation noise stalls
    /// the iteration, a residual within `STALL_TOLERANCE` is accepted.
    fn correct(&self, p: Complex64) -> Option<(Complex64, Local, usize)> {
        let mut s = p;
        let mut prev = f64::INFINITY;
        for it in 0..=CORRECTOR_ITERS {
            let l = self.local(s).ok()?;
            let r = l.g.im.abs();
            if r <= self.tol(&l) {
                return Some((s, l, it));
            }
            if r > 0.5 * prev && r <= STALL_TOLERANCE * (1.0 + l.g.norm()) {
                return Some((s, l, it.max(CORRECTOR_ITERS / 2)));
            }
            let a = l.dg.norm();
            if a == 0.0 || it == CORRECTOR_ITERS {
                return None;
            }
            prev = r;
            let n = Complex64::i() * l.dg.conj() / a;
            s -= n * (l.g.im / a);
        }
        None
    }

    /// Newton for `Im G = 0` along a window edge starting at `e`.
    fn edge_newton(&self, mut e: Complex64, edge: Edge) -> Option<(Complex64, Local)> {
        let dir = match edge {
            Edge::Left | Edge::Right => Complex64::i(),
            _ => Complex64::new(1.0, 0.0),
        };
        let mut prev = f64::INFINITY;
        for _ in 0..12 {
            let l = self.local(e).ok()?;
            let r = l.g.im.abs();
            if r <= self.tol(&l) || (r > 0.5 * prev && r <= STALL_TOLERANCE * (1.0 + l.g.norm())) {
                return Some((e, l));
            }
            let slope = (l.dg * dir).im;
            if slope == 0.0 {
                return None;
            }
            prev = r;
            e -= dir * (l.g.im / slope);
        }
        None
    }

    /// Critical point of `G` near `s` lying on the level set, if any.
    fn critical_on_curve(&self, s: Complex64, l: &Local, reach: f64) -> Option<(Complex64, Local)> {
        let mut c = s - l.dg / l.d2g;
        for _ in 0..6 {
            let lc = self.local(c).ok()?;
            if lc.d2g.norm() == 0.0 {
                break;
            }
            c -= lc.dg / lc.d2g;
        }
        if (c - s).norm() > reach {
            return None;
        }
        let lc = self.local(c).ok()?;
        (lc.g.im.abs() <= CRITICAL_SLACK * self.tol(&lc)).then_some((c, lc))
    }

    /// Point where the segment `s -> p` leaves the window, moved onto the
    /// level set along that edge.
    fn exit_point(&self, s: Complex64, p: Complex64) -> Option<(Complex64, Local, Edge)> {
        let w = &self.window;
        let d = p - s;
        let mut best: Option<(f64, Edge)> = None;
        let mut consider = |lam: f64, e: Edge| {
            if (0.0..=1.0).contains(&lam) && best.is_none_or(|(b, _)| lam < b) {
                best = Some((lam, e));
            }
        };
        if d.re < 0.0 {
            consider((w.sigma_min - s.re) / d.re, Edge::Left);
        }
        if d.re > 0.0 {
            consider((w.sigma_max - s.re) / d.re, Edge::Right);
        }
        if d.im < 0.0 {
            consider((w.t_min - s.im) / d.im, Edge::Bottom);
        }
        if d.im > 0.0 {
            consider((w.t_max - s.im) / d.im, Edge::Top);
        }
        let (lam, edge) = best?;
        let (e, l) = self.edge_newton(s + d * lam, edge)?;
        if !self.window.contains(e) || (e - s).norm() > self.hmax {
            return None;
        }
        Some((e, l, edge))
    }

    fn near_pole(&self, s: Complex64, h: f64) -> bool {
        self.poles.iter().any(|p| (p - s).norm() < 2.0 * h)
    }

    /// Marches from `start` along `dir0`. A loop closes on `close_at`;
    /// critical points within half a step of `origin` are passed over.
    fn march(
        &self,
        start: Complex64,
        l0: Local,
        dir0: Complex64,
        close_at: Option<Complex64>,
        origin: Option<Complex64>,
    ) -> Result<Branch> {
        let mut points = vec![start];
        let mut values = vec![l0.f];
        let (mut s, mut l) = (start, l0);
        let mut heading = dir0;
        let mut h = self.h0;
        let mut travelled = 0.0;
        let done = |points: Vec<Complex64>, values: Vec<Complex64>, end| {
            Ok(Branch {
                points,
                values,
                end,
            })
        };
        let foreign = |c: Complex64| origin.is_none_or(|o| (c - o).norm() > 0.5 * self.h0);
        for _ in 0..self.opts.max_steps {
            if self.near_pole(s, h) || l.f.norm() > 1e12 {
                return done(points, values, Termination::Singularity);
            }
            if let Constraint::RayPreimage { .. } = self.constraint {
                if l.g.re <= 0.0 && points.len() > 1 {
                    return done(points, values, Termination::ReachedZero);
                }
            }
            let mut tan = unit_tangent(&l);
            if (tan * heading.conj()).re < 0.0 {
                tan = -tan;
            }
            if l.d2g.norm() > 0.0 {
                let dist = (l.dg / l.d2g).norm();
                if dist < 3.0 * h {
                    if let Some((c, lc)) = self.critical_on_curve(s, &l, 3.0 * h) {
                        if foreign(c) && (c - s).norm() <= self.hmax {
                            if (c - s).norm() > 1e-14 {
                                points.push(c);
                                values.push(lc.f);
                            }
                            return done(points, values, Termination::CriticalPoint);
                        }
                    }
                    if foreign(s - l.dg / l.d2g) {
                        h = h.min((0.5 * dist).max(self.hmin));
                    }
                }
            }
            let accepted = loop {
                let p = s + tan * h;
                if !self.window.contains(p) {
                    if let Some((e, le, edge)) = self.exit_point(s, p) {
                        if (e - s).norm() > 1e-14 {
                            points.push(e);
                            values.push(le.f);
                        }
                        return done(points, values, Termination::ExitedWindow(edge));
                    }
                }
                if let Some((sc, lc, iters)) = self.correct(p) {
                    let step = (sc - s).norm();
                    let t_new = unit_tangent(&lc);
                    let turn = (t_new * tan.conj()).re.abs();
                    if step > 0.3 * h
                        && step < 2.0 * h
                        && step <= self.hmax
                        && turn > TURN_COS
                        && self.window.contains(sc)
                    {
                        break Some((sc, lc, iters));
                    }
                }
                if h <= self.hmin {
                    break None;
                }
                h = (0.5 * h).max(self.hmin);
            };
            let Some((sc, lc, iters)) = accepted else {
                if let Some((c, lc)) = self.critical_on_curve(s, &l, self.hmax) {
                    if foreign(c) {
                        points.push(c);
                        values.push(lc.f);
                        return done(points, values, Termination::CriticalPoint);
                    }
                }
                return Err(Error::StepCollapse { at: s });
            };
            if let Some(target) = close_at {
                if travelled > 4.0 * self.h0
                    && segment_distance(s, sc, target) < 0.5 * h.max(self.h0)
                {
                    // keep sc only if the loop has not yet passed the target
                    let d = sc - s;
                    if ((target - s) * d.conj()).re > d.norm_sqr() {
                        points.push(sc);
                        values.push(lc.f);
                    }
                    points.push(target);
                    values.push(values[0]);
                    return done(points, values, Termination::ClosedLoop);
                }
            }
            travelled += (sc - s).norm();
            heading = sc - s;
            s = sc;
            l = lc;
            points.push(s);
            values.push(l.f);
            h = match iters {
                0..=2 => (1.5 * h).min(self.hmax),
                3..=4 => h,
                _ => (0.7 * h).max(self.hmin),
            };
        }
        done(points, values, Termination::StepLimit)
    }

    fn assemble(&self, back: Option<Branch>, fwd: Branch) -> CurveComponent {
        let mut points = Vec::new();
        let mut values = Vec::new();
        let start_end;
        match back {
            Some(b) => {
                start_end = b.end;
                points.extend(b.points.iter().skip(1).rev());
                values.extend(b.values.iter().skip(1).rev());
            }
            None => start_end = fwd.end,
        }
        points.extend(fwd.points.iter());
        values.extend(fwd.values.iter());
        let closed = fwd.end == Termination::ClosedLoop;
        self.finish(points, values, [start_end, fwd.end], closed)
    }

    fn finish(
        &self,
        points: Vec<Complex64>,
        values: Vec<Complex64>,
        ends: [Termination; 2],
        closed: bool,
    ) -> CurveComponent {
        let mut side_signs = Vec::with_capacity(points.len().saturating_sub(1));
        for w in points.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let sign = match self.local(mid) {
                Ok(l) => {
                    let t = w[1] - w[0];
                    if (l.dg * t).re >= 0.0 {
                        1
                    } else {
                        -1
                    }
                }
                Err(_) => 0,
            };
            side_signs.push(sign);
        }
        let max_residual = values
            .iter()
            .map(|v| self.constraint.level(*v).abs())
            .fold(0.0, f64::max);
        CurveComponent {
            window_truncated: [ends[0].truncated(), ends[1].truncated()],
            points,
            values,
            constraint: self.constraint,
            classification: if self.f.is_derivative()
                && self.constraint == Constraint::RealAxisPreimage
            {
                Classification::Upsilon
            } else {
                Classification::Unclassified
            },
            strip_index: None,
            ends,
            closed,
            side_signs,
            step: self.h0,
            max_residual,
        }
    }

    fn trace(&self, seed: Complex64) -> Result<CurveComponent> {
        let l = self.local(seed)?;
        let (s, l) = match self.correct(seed) {
            Some((s, l, _)) => (s, l),
            None => {
                return Err(Error::DegenerateSeed {
                    at: seed,
                    gradient: l.dg.norm(),
                })
            }
        };
        if l.dg.norm() <= self.opts.degeneracy * (1.0 + l.g.norm()) {
            return Err(Error::DegenerateSeed {
                at: s,
                gradient: l.dg.norm(),
            });
        }
        let (s, l) = if self.window.contains(s) {
            (s, l)
        } else {
            // boundary seeds can be corrected slightly outside
            let c = Complex64::new(
                s.re.clamp(self.window.sigma_min, self.window.sigma_max),
                s.im.clamp(self.window.t_min, self.window.t_max),
            );
            let edge = window_edge_point(&self.window, c).ok_or(Error::DegenerateSeed {
                at: seed,
                gradient: l.dg.norm(),
            })?;
            self.edge_newton(c, edge)
                .filter(|(e, _)| self.window.contains(*e))
                .ok_or(Error::DegenerateSeed {
                    at: seed,
                    gradient: l.dg.norm(),
                })?
        };
        let t = unit_tangent(&l);
        let fwd = self.march(s, l, t, Some(s), None)?;
        if fwd.end == Termination::ClosedLoop {
            return Ok(self.assemble(None, fwd));
        }
        let back = self.march(s, l, -t, None, None)?;
        Ok(self.assemble(Some(back), fwd))
    }
}

pub fn trace_level_curve(
    f: &AnalyticFunctionHandle,
    seed: Complex64,
    constraint: Constraint,
    window: SearchRectangle,
) -> Result<CurveComponent> {
    trace_level_curve_with(f, seed, constraint, window, TraceOptions::default())
}

/// Predictor-corrector continuation of `Im G = 0` from `seed` in both
/// directions until the curve leaves the window, closes, or runs into a
/// critical point.
pub fn trace_level_curve_with(
    f: &AnalyticFunctionHandle,
    seed: Complex64,
    constraint: Constraint,
    window: SearchRectangle,
    opts: TraceOptions,
) -> Result<CurveComponent> {
    window.validate()?;
    Tracer::new(f, constraint, window, opts).trace(seed)
}

/// Branches of the level set leaving an `m`-fold zero `s0`. For the
/// real-axis pre-image the `2m` rays are paired with their neighbours into
/// `m` components whose images run through zero; ray pre-images give `m`
/// separate arcs starting at `s0`.
pub fn trace_branches_at_zero(
    f: &AnalyticFunctionHandle,
    s0: Complex64,
    multiplicity: usize,
    constraint: Constraint,
    window: SearchRectangle,
    opts: TraceOptions,
) -> Result<Vec<CurveComponent>> {
    if !(1..=3).contains(&multiplicity) {
        return Err(Error::InvalidInput(format!(
            "multiplicity {multiplicity} not in 1..=3"
        )));
    }
    let m = multiplicity;
    let jet = f.jet(s0)?;
    let lead = jet.c[m];
    if lead.norm() == 0.0 {
        return Err(Error::BranchAssemblyFailed(format!(
            "vanishing order-{m} coefficient at {s0}"
        )));
    }
    let (count, phase) = match constraint {
        Constraint::RealAxisPreimage => (2 * m, 0.0),
        Constraint::RayPreimage { theta } => (m, theta),
        Constraint::CirclePreimage { .. } => {
            return Err(Error::InvalidInput("circle pre-images avoid zeros".into()));
        }
    };
    let step = match constraint {
        Constraint::RealAxisPreimage => PI,
        _ => 2.0 * PI,
    };
    let tracer = Tracer::new(f, constraint, window, opts);
    let delta = tracer.h0;
    let origin = Local {
        f: Complex64::new(0.0, 0.0),
        g: Complex64::new(0.0, 0.0),
        dg: Complex64::new(0.0, 0.0),
        d2g: Complex64::new(0.0, 0.0),
    };
    let rays: Vec<Result<Branch>> = (0..count)
        .into_par_iter()
        .map(|j| {
            let theta = (phase + j as f64 * step - lead.arg()) / m as f64;
            let dir = Complex64::from_polar(1.0, theta);
            let (s, l, _) = tracer.correct(s0 + dir * delta).ok_or_else(|| {
                Error::BranchAssemblyFailed(format!("ray {j} at {s0} did not settle"))
            })?;
            let mut b = tracer.march(s, l, dir, None, Some(s0))?;
            b.points.insert(0, s0);
            b.values.insert(0, origin.f);
            Ok(b)
        })
        .collect();
    let rays: Vec<Branch> = rays.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::new();
    match constraint {
        Constraint::RealAxisPreimage => {
            let mut it = rays.into_iter();
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                let mut points: Vec<Complex64> = a.points.iter().rev().copied().collect();
                let mut values: Vec<Complex64> = a.values.iter().rev().copied().collect();
                points.extend(b.points.iter().skip(1));
                values.extend(b.values.iter().skip(1));
                out.push(tracer.finish(points, values, [a.end, b.end], false));
            }
        }
        _ => {
            for b in rays {
                out.push(tracer.finish(
                    b.points,
                    b.values,
                    [Termination::ReachedZero, b.end],
                    false,
                ));
            }
        }
    }
    Ok(out)
}

/// Grid crossings of the level set grouped so that crossings joined through
/// a grid cell share one seed; returns one representative per group.
pub fn seed_points(
    f: &AnalyticFunctionHandle,
    window: SearchRectangle,
    grid_density: usize,
    constraint: Constraint,
) -> Result<Vec<Complex64>> {
    Ok(seed_groups(f, window, grid_density, constraint)?
        .into_iter()
        .map(|g| g[0])
        .collect())
}

fn find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

pub(crate) fn seed_groups(
    f: &AnalyticFunctionHandle,
    window: SearchRectangle,
    grid_density: usize,
    constraint: Constraint,
) -> Result<Vec<Vec<Complex64>>> {
    if grid_density < 8 {
        return Err(Error::InvalidInput(
            "grid density must be at least 8".into(),
        ));
    }
    window.validate()?;
    let n = grid_density;
    let node = |i: usize, j: usize| {
        Complex64::new(
            window.sigma_min + window.width() * i as f64 / n as f64,
            window.t_min + window.height() * j as f64 / n as f64,
        )
    };
    let level = |s: Complex64| -> f64 {
        match f.value(s) {
            Ok(v) if v.norm().is_finite() => constraint.level(v),
            _ => f64::NAN,
        }
    };
    let grid: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|j| (0..=n).map(|i| level(node(i, j))).collect())
        .collect();

    // crossings: exact zeros at nodes, then sign changes on edges
    let mut points: Vec<Complex64> = Vec::new();
    let mut node_id = vec![usize::MAX; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            if grid[j][i] == 0.0 {
                node_id[j * (n + 1) + i] = points.len();
                points.push(node(i, j));
            }
        }
    }
    let bisect = |a: Complex64, fa: f64, b: Complex64| -> Complex64 {
        let (mut lo, mut hi, mut flo) = (a, b, fa);
        for _ in 0..40 {
            let m = 0.5 * (lo + hi);
            let fm = level(m);
            if fm == 0.0 || !fm.is_finite() {
                return m;
            }
            if fm.signum() == flo.signum() {
                lo = m;
                flo = fm;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    // horizontal edge (i,j)-(i+1,j) and vertical edge (i,j)-(i,j+1)
    let mut h_id = vec![usize::MAX; n * (n + 1)];
    let mut v_id = vec![usize::MAX; (n + 1) * n];
    for j in 0..=n {
        for i in 0..=n {
            let a = grid[j][i];
            if i < n {
                let b = grid[j][i + 1];
                if a * b < 0.0 {
                    h_id[j * n + i] = points.len();
                    points.push(bisect(node(i, j), a, node(i + 1, j)));
                }
            }
            if j < n {
                let b = grid[j + 1][i];
                if a * b < 0.0 {
                    v_id[j * (n + 1) + i] = points.len();
                    points.push(bisect(node(i, j), a, node(i, j + 1)));
                }
            }
        }
    }
    let mut parent: Vec<usize> = (0..points.len()).collect();
    for j in 0..n {
        for i in 0..n {
            let ids = [
                h_id[j * n + i],
                h_id[(j + 1) * n + i],
                v_id[j * (n + 1) + i],
                v_id[j * (n + 1) + i + 1],
                node_id[j * (n + 1) + i],
                node_id[j * (n + 1) + i + 1],
                node_id[(j + 1) * (n + 1) + i],
                node_id[(j + 1) * (n + 1) + i + 1],
            ];
            let present: Vec<usize> = ids.into_iter().filter(|&k| k != usize::MAX).collect();
            if present.len() == 2 {
                let (a, b) = (
                    find_root(&mut parent, present[0]),
                    find_root(&mut parent, present[1]),
                );
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut slot = vec![usize::MAX; points.len()];
    for (k, &p) in points.iter().enumerate() {
        let r = find_root(&mut parent, k);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(p);
    }
    Ok(groups)
}

/// A seed group whose every attempt failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFailure {
    pub seed: Complex64,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub components: Vec<CurveComponent>,
    /// Failures whose seed is not covered by a traced component.
    pub failures: Vec<TraceFailure>,
}

/// Seeds the window, traces every seed group in parallel, and keeps the
/// components whose seed is not already covered by an earlier component.
/// A group is retried from its next crossing when tracing fails.
pub fn trace_all(
    f: &AnalyticFunctionHandle,
    window: SearchRectangle,
    constraint: Constraint,
    grid_density: usize,
    opts: TraceOptions,
) -> Result<TraceSet> {
    let groups = seed_groups(f, window, grid_density, constraint)?;
    let tracer = Tracer::new(f, constraint, window, opts);
    let traced: Vec<std::result::Result<(Complex64, CurveComponent), (Complex64, Error)>> = groups
        .par_iter()
        .map(|g| {
            let mut last = None;
            for &seed in g.iter().take(4) {
                match tracer.trace(seed) {
                    Ok(c) => return Ok((seed, c)),
                    Err(e) => last = Some((seed, e)),
                }
            }
            Err(last.expect("seed groups are never empty"))
        })
        .collect();
    let tol = 2.0 * tracer.h0;
    let mut components: Vec<CurveComponent> = Vec::new();
    let mut pending = Vec::new();
    for t in traced {
        match t {
            Ok((seed, c)) => {
                if !components
                    .iter()
                    .any(|k| polyline_distance(&k.points, seed) < tol)
                {
                    components.push(c);
                }
            }
            Err(x) => pending.push(x),
        }
    }
    let failures = pending
        .into_iter()
        .filter(|(seed, _)| {
            !components
                .iter()
                .any(|k| polyline_distance(&k.points, *seed) < tol)
        })
        .map(|(seed, e)| TraceFailure {
            seed,
            code: e.code().to_string(),
            message: e.to_string(),
        })
        .collect();
    Ok(TraceSet {
        components,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SyntheticRule;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_real_axis_trace() {
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(c(0.0, 0.0), 2));
        let w = SearchRectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let comp = trace_level_curve(&f, c(0.5, 0.0), Constraint::RealAxisPreimage, w).unwrap();
        assert!(comp.points.iter().all(|p| p.im.abs() < 1e-9));
        assert!(comp.max_residual < 1e-9);
    }

    #[test]
    fn circle_preimage_closes() {
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::from_roots(&[c(0.0, 0.0)]));
        let w = SearchRectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let comp = trace_level_curve(
            &f,
            c(0.5, 0.0),
            Constraint::CirclePreimage { radius: 0.5 },
            w,
        )
        .unwrap();
        assert!(comp.closed);
        assert!((comp.arc_length() - PI).abs() < 1e-3);
        assert!(comp.points.iter().all(|p| (p.norm() - 0.5).abs() < 1e-9));
    }

    #[test]
    fn branches_at_double_zero() {
        let s0 = c(0.2, 0.1);
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::double_zero(s0));
        let w = SearchRectangle::new(-0.8, 1.2, -0.9, 1.1).unwrap();
        let comps = trace_branches_at_zero(
            &f,
            s0,
            2,
            Constraint::RealAxisPreimage,
            w,
            TraceOptions::default(),
        )
        .unwrap();
        assert_eq!(comps.len(), 2);
        for comp in &comps {
            let re: Vec<f64> = comp.values.iter().map(|v| v.re).collect();
            assert!(re.iter().any(|&x| x > 0.0) && re.iter().any(|&x| x < 0.0));
        }
    }

    #[test]
    fn seeds_on_axes_for_square() {
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(c(0.0, 0.0), 2));
        let w = SearchRectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let seeds = seed_points(&f, w, 32, Constraint::RealAxisPreimage).unwrap();
        assert!(seeds.iter().any(|s| s.im.abs() < 1e-12 && s.re.abs() > 0.1));
        assert!(seeds.iter().any(|s| s.re.abs() < 1e-12 && s.im.abs() > 0.1));
        assert!(seeds
            .iter()
            .all(|s| s.re.abs() < 1e-12 || s.im.abs() < 1e-12));
    }
}
