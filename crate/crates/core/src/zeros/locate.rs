use super::winding::{avoid_poles, winding_of, Contour, WindingOptions};
use super::{SearchRectangle, ZeroRecord, ZeroStatus, JITTER};
use crate::error::{Error, Result};
use crate::series::handle::cauchy_derivative;
use crate::series::AnalyticFunctionHandle;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SPLIT_ATTEMPTS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocateOptions {
    pub max_depth: u32,
    pub nodes_per_edge: usize,
    /// Upper bound for certification circle radii.
    pub certify_radius: f64,
    pub newton_max_iter: usize,
    /// Offsets the deterministic jitter sequence.
    pub seed: u64,
}

impl Default for LocateOptions {
    fn default() -> Self {
        LocateOptions {
            max_depth: 24,
            nodes_per_edge: 64,
            certify_radius: 0.01,
            newton_max_iter: 80,
            seed: 0,
        }
    }
}

impl LocateOptions {
    fn winding(&self) -> WindingOptions {
        WindingOptions {
            nodes_per_edge: self.nodes_per_edge,
            ..WindingOptions::default()
        }
    }
}

/// `k`-th element of the jitter sequence, in `[0, 1)`.
fn jitter_unit(seed: u64, k: u64) -> f64 {
    ((seed.wrapping_add(k) + 1) as f64 * GOLDEN).fract()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub root: Complex64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `|f|` after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

/// Newton's method with step halving (at most 20 halvings per step); only
/// steps that decrease `|f|` are accepted. Steps are capped at unit length.
pub fn damped_newton(
    f: &AnalyticFunctionHandle,
    start: Complex64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    damped_newton_within(f, start, max_iter, 1.0)
}

/// [`damped_newton`] with steps capped at `trust`.
pub(crate) fn damped_newton_within(
    f: &AnalyticFunctionHandle,
    start: Complex64,
    max_iter: usize,
    trust: f64,
) -> Result<NewtonOutcome> {
    let (mut v, mut d) = f.value_and_derivative(start)?;
    let mut s = start;
    let mut history = vec![v.norm()];
    let mut converged = v.norm() == 0.0;
    let mut iterations = 0;
    while !converged && iterations < max_iter {
        iterations += 1;
        if d.norm() == 0.0 || !d.norm().is_finite() {
            break;
        }
        let full = -v / d;
        let tiny = 1e-9 * (1.0 + s.norm());
        let mut step = if full.norm() > trust {
            full * (trust / full.norm())
        } else {
            full
        };
        let mut accepted = None;
        for _ in 0..=20 {
            let w = s + step;
            if let Ok((vw, dw)) = f.value_and_derivative(w) {
                if vw.norm() < v.norm() {
                    accepted = Some((w, vw, dw));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((w, vw, dw)) => {
                let moved = (w - s).norm();
                s = w;
                v = vw;
                d = dw;
                history.push(v.norm());
                if moved < 1e-15 * (1.0 + s.norm()) || v.norm() == 0.0 {
                    converged = true;
                }
            }
            None => {
                // no decrease possible: at the evaluation noise floor
                converged = full.norm() < tiny;
                break;
            }
        }
    }
    Ok(NewtonOutcome {
        root: s,
        residual: v.norm(),
        converged,
        iterations,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityCertificate {
    pub winding: i64,
    pub derivative_abs: f64,
    pub noise_floor: f64,
    /// `|f'(s0)|` exceeds the derivative noise floor.
    pub simple: bool,
    /// Largest `|f|` on the circle.
    pub local_scale: f64,
}

/// Winding number on `|s - s0| = radius` together with the simple-zero
/// certificate `|f'(s0)| > noise floor`.
pub fn certify_multiplicity(
    f: &AnalyticFunctionHandle,
    s0: Complex64,
    radius: f64,
) -> Result<MultiplicityCertificate> {
    certify_with(f, s0, radius, WindingOptions::default())
}

fn certify_with(
    f: &AnalyticFunctionHandle,
    s0: Complex64,
    radius: f64,
    opts: WindingOptions,
) -> Result<MultiplicityCertificate> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(
            "certification radius must be positive".into(),
        ));
    }
    if let Some(p) = f.poles().into_iter().find(|p| (p - s0).norm() <= radius) {
        return Err(Error::PoleInDisc { center: p, radius });
    }
    let eval = |s: Complex64| f.value(s);
    let w = winding_of(&eval, &Contour::circle(s0, radius), opts)?;
    let jet = f.jet(s0)?;
    let d_jet = jet.derivative(1);
    let d_quad = cauchy_derivative(eval, s0, 1, radius, 32)?;
    let eps = f.error_bound(s0)?;
    let noise_floor = 10.0 * ((d_jet - d_quad).norm() + eps / radius);
    Ok(MultiplicityCertificate {
        winding: w.winding,
        derivative_abs: d_jet.norm(),
        noise_floor,
        simple: d_jet.norm() > noise_floor,
        local_scale: w.max_abs,
    })
}

enum Found {
    Refined(NewtonOutcome),
    Cluster {
        region: SearchRectangle,
        winding: i64,
    },
    Diverged {
        region: SearchRectangle,
    },
}

struct Search<'a> {
    f: &'a AnalyticFunctionHandle,
    opts: LocateOptions,
}

impl Search<'_> {
    fn winding(&self, r: &SearchRectangle) -> Result<i64> {
        let eval = |s: Complex64| self.f.value(s);
        Ok(winding_of(&eval, &Contour::Rectangle(*r), self.opts.winding())?.winding)
    }

    fn children(&self, r: &SearchRectangle, depth: u32, attempt: u64) -> Vec<SearchRectangle> {
        let u = jitter_unit(
            self.opts.seed.wrapping_mul(31).wrapping_add(depth as u64),
            attempt,
        );
        // off-centre split keeps symmetric zeros (critical line, real axis) off the cut
        let frac = 0.5 + 0.08 * (u - 0.5) + 0.013;
        if r.height() > 2.0 * r.width() {
            let ym = r.t_min + frac * r.height();
            vec![
                SearchRectangle { t_max: ym, ..*r },
                SearchRectangle { t_min: ym, ..*r },
            ]
        } else if r.width() > 2.0 * r.height() {
            let xm = r.sigma_min + frac * r.width();
            vec![
                SearchRectangle {
                    sigma_max: xm,
                    ..*r
                },
                SearchRectangle {
                    sigma_min: xm,
                    ..*r
                },
            ]
        } else {
            let v = jitter_unit(
                self.opts
                    .seed
                    .wrapping_mul(17)
                    .wrapping_add(depth as u64 + 7),
                attempt,
            );
            r.split(frac, 0.5 + 0.08 * (v - 0.5) + 0.009).to_vec()
        }
    }

    fn split(
        &self,
        r: &SearchRectangle,
        winding: i64,
        depth: u32,
    ) -> Option<Vec<(SearchRectangle, i64)>> {
        for attempt in 0..SPLIT_ATTEMPTS {
            let kids = self.children(r, depth, attempt);
            let windings: Vec<Result<i64>> = kids.par_iter().map(|k| self.winding(k)).collect();
            if windings.iter().any(|w| w.is_err()) {
                continue;
            }
            let ws: Vec<i64> = windings.into_iter().map(|w| w.unwrap()).collect();
            if ws.iter().sum::<i64>() == winding {
                return Some(kids.into_iter().zip(ws).collect());
            }
        }
        None
    }

    fn resolve(&self, r: SearchRectangle, winding: i64, depth: u32) -> Vec<Found> {
        if winding == 0 {
            return Vec::new();
        }
        if winding == 1 {
            if let Ok(n) = damped_newton_within(
                self.f,
                r.center(),
                self.opts.newton_max_iter,
                0.5 * r.diagonal(),
            ) {
                if n.converged && r.contains(n.root) {
                    return vec![Found::Refined(n)];
                }
            }
        }
        if depth >= self.opts.max_depth || winding < 0 {
            return vec![if winding == 1 {
                Found::Diverged { region: r }
            } else {
                Found::Cluster { region: r, winding }
            }];
        }
        match self.split(&r, winding, depth) {
            Some(kids) => kids
                .into_par_iter()
                .map(|(k, w)| self.resolve(k, w, depth + 1))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect(),
            None => vec![Found::Cluster { region: r, winding }],
        }
    }
}

/// Region winding after the deterministic outward jitter; returns the
/// rectangle actually used.
fn region_winding(search: &Search, region: SearchRectangle) -> Result<(SearchRectangle, i64)> {
    let base = avoid_poles(search.f, region, JITTER);
    let mut last = None;
    for k in 0..SPLIT_ATTEMPTS {
        let r = if k == 0 {
            base
        } else {
            base.expand(JITTER * jitter_unit(search.opts.seed, k))
        };
        match search.winding(&r) {
            Ok(w) => return Ok((r, w)),
            Err(e @ (Error::ZeroOnContour { .. } | Error::PhaseStepTooLarge { .. })) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::IncompleteBoundary))
}

pub fn locate_zeros(
    f: &AnalyticFunctionHandle,
    region: SearchRectangle,
    max_depth: u32,
) -> Result<Vec<ZeroRecord>> {
    locate_zeros_with(
        f,
        region,
        LocateOptions {
            max_depth,
            ..LocateOptions::default()
        },
    )
}

/// All zeros in `region` with multiplicities summing to the region winding.
/// Boxes whose winding stays above one at `max_depth` come back as
/// [`ZeroStatus::UnresolvedCluster`] records. Sorted by `(t, σ)`.
pub fn locate_zeros_with(
    f: &AnalyticFunctionHandle,
    region: SearchRectangle,
    opts: LocateOptions,
) -> Result<Vec<ZeroRecord>> {
    region.validate()?;
    let search = Search { f, opts };
    let (r, winding) = region_winding(&search, region)?;
    if winding < 0 {
        return Err(Error::InvalidInput(format!(
            "region encloses poles (winding {winding}); zeros are not separable"
        )));
    }
    let found = search.resolve(r, winding, 0);

    let centers: Vec<Complex64> = found
        .iter()
        .map(|x| match x {
            Found::Refined(n) => n.root,
            Found::Cluster { region, .. } | Found::Diverged { region } => region.center(),
        })
        .collect();
    let nearest = |i: usize| {
        centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| (c - centers[i]).norm())
            .fold(f64::INFINITY, f64::min)
    };

    let mut out: Vec<ZeroRecord> = found
        .into_par_iter()
        .enumerate()
        .map(|(i, x)| match x {
            Found::Refined(n) => {
                certify_refined(f, &n, opts.certify_radius.min(0.3 * nearest(i)), opts)
            }
            Found::Cluster { region, winding } => {
                box_record(f, region, winding, ZeroStatus::UnresolvedCluster, opts)
            }
            Found::Diverged { region } => {
                box_record(f, region, 1, ZeroStatus::NewtonDiverged, opts)
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.location
            .im
            .total_cmp(&b.location.im)
            .then(a.location.re.total_cmp(&b.location.re))
    });
    Ok(out)
}

fn certify_refined(
    f: &AnalyticFunctionHandle,
    n: &NewtonOutcome,
    max_radius: f64,
    opts: LocateOptions,
) -> ZeroRecord {
    let mut radius = max_radius;
    let mut last = None;
    for _ in 0..6 {
        match certify_with(f, n.root, radius, opts.winding()) {
            Ok(c) if c.winding == 1 => {
                return ZeroRecord {
                    location: n.root,
                    multiplicity: 1,
                    winding_number: 1,
                    residual: n.residual,
                    certified_radius: radius,
                    local_scale: c.local_scale,
                    status: ZeroStatus::Certified,
                };
            }
            Ok(c) => last = Some(c),
            Err(_) => {}
        }
        radius *= 0.5;
    }
    // the box winding was one; the circle never confirmed it
    let c = last.unwrap_or(MultiplicityCertificate {
        winding: 0,
        derivative_abs: 0.0,
        noise_floor: 0.0,
        simple: false,
        local_scale: 0.0,
    });
    ZeroRecord {
        location: n.root,
        multiplicity: 1,
        winding_number: c.winding,
        residual: n.residual,
        certified_radius: radius * 2.0,
        local_scale: c.local_scale,
        status: ZeroStatus::NewtonDiverged,
    }
}

fn box_record(
    f: &AnalyticFunctionHandle,
    region: SearchRectangle,
    winding: i64,
    status: ZeroStatus,
    opts: LocateOptions,
) -> ZeroRecord {
    let mut location = region.center();
    if let Ok(n) = damped_newton_within(f, location, opts.newton_max_iter, 0.5 * region.diagonal())
    {
        if region.contains_open(n.root) {
            location = n.root;
        }
    }
    let radius = region.boundary_distance(location);
    let eval = |s: Complex64| f.value(s);
    let circle = winding_of(&eval, &Contour::circle(location, radius), opts.winding()).ok();
    ZeroRecord {
        location,
        multiplicity: winding.max(1) as u32,
        winding_number: circle.map(|c| c.winding).unwrap_or(winding),
        residual: f.value(location).map(|v| v.norm()).unwrap_or(f64::MAX),
        certified_radius: radius,
        local_scale: circle.map(|c| c.max_abs).unwrap_or(0.0),
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SyntheticRule;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_quadratic() {
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::polynomial(vec![
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
        ]));
        let r = SearchRectangle::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let z = locate_zeros(&f, r, 12).unwrap();
        assert_eq!(z.len(), 2);
        assert!((z[0].location - c(0.0, -1.0)).norm() < 1e-12);
        assert!((z[1].location - c(0.0, 1.0)).norm() < 1e-12);
        assert!(z
            .iter()
            .all(|x| x.multiplicity == 1 && x.status == ZeroStatus::Certified));
    }

    #[test]
    fn double_zero_is_a_cluster() {
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::double_zero(c(0.2, 0.1)));
        let r = SearchRectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let z = locate_zeros(&f, r, 6).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].status, ZeroStatus::UnresolvedCluster);
        assert_eq!(z[0].multiplicity, 2);
    }

    #[test]
    fn triple_zero_certificate() {
        let f = AnalyticFunctionHandle::synthetic(
            SyntheticRule::power(c(1.0, 0.0), 3).with_exp(c(1.0, 0.0)),
        );
        let cert = certify_multiplicity(&f, c(1.0, 0.0), 0.1).unwrap();
        assert_eq!(cert.winding, 3);
        assert!(!cert.simple);
    }

    #[test]
    fn newton_history_decreases() {
        let f = AnalyticFunctionHandle::zeta();
        let n = damped_newton(&f, c(0.6, 14.3), 50).unwrap();
        assert!(n.converged);
        assert!(n.history.windows(2).all(|w| w[1] < w[0]));
        assert!((n.root - c(0.5, 14.134725141734693)).norm() < 1e-10);
    }
}
