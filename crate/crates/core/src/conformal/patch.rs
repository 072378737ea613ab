use super::{Anchor, DomainPatch, Side, Slit};
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use crate::trace::{
    point_in_polygon, segment_intersection, trace_branches_at_zero, Constraint, CurveComponent,
    TraceOptions,
};
use crate::zeros::{certify_multiplicity, winding_number, Contour, SearchRectangle};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Samples per side of the grid used for `B`, `B'` and `Ω_c`.
const PATCH_SAMPLES: usize = 24;
/// Polygon vertices on a full patch circle.
const CIRCLE_VERTICES: usize = 256;

/// Builds the two fundamental-domain pieces adjacent to `anchor` inside the
/// disc of radius `extent` around its center.
pub fn build_domain_patch(
    f: &AnalyticFunctionHandle,
    anchor: Anchor,
    extent: f64,
) -> Result<DomainPatch> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidInput("patch extent must be positive".into()));
    }
    let center = anchor.center();
    check_template(f, anchor, extent)?;
    let found = winding_number(f, &Contour::circle(center, extent))?;
    if found != anchor.count() {
        return Err(Error::ForeignZeroInPatch {
            expected: anchor.count(),
            found,
        });
    }

    let window = SearchRectangle::new(
        center.re - 1.05 * extent,
        center.re + 1.05 * extent,
        center.im - 1.05 * extent,
        center.im + 1.05 * extent,
    )?;
    let opts = TraceOptions {
        step: Some(extent / 200.0),
        ..TraceOptions::default()
    };
    let ray = Constraint::RayPreimage { theta: PI };
    let arcs: Vec<CurveComponent> = match anchor {
        Anchor::DoubleZero(s0) => trace_branches_at_zero(f, s0, 2, ray, window, opts)?,
        Anchor::Simple(s0) => trace_branches_at_zero(f, s0, 1, ray, window, opts)?,
        Anchor::Pair(a, b) => {
            let mut v = trace_branches_at_zero(f, a, 1, ray, window, opts)?;
            v.extend(trace_branches_at_zero(f, b, 1, ray, window, opts)?);
            v
        }
    };
    let clipped: Vec<Vec<Complex64>> = arcs
        .iter()
        .map(|a| clip_to_disc(&a.points, center, extent))
        .collect::<Result<_>>()?;

    let (boundary, omega, omega_prime) = match anchor {
        Anchor::Simple(_) => {
            let arc = &clipped[0];
            let outer = *arc.last().unwrap();
            let alpha = (outer - center).arg();
            let mut poly = arc.clone();
            poly.extend(
                circle_arc(center, extent, alpha, alpha + 2.0 * PI)
                    .into_iter()
                    .skip(1),
            );
            poly.extend(arc.iter().rev().skip(1).take(arc.len().saturating_sub(2)));
            (arc.clone(), poly, Vec::new())
        }
        _ => {
            if clipped.len() != 2 {
                return Err(Error::BranchAssemblyFailed(format!(
                    "{} negative-axis arcs, expected 2",
                    clipped.len()
                )));
            }
            let mut c: Vec<Complex64> = clipped[0].iter().rev().copied().collect();
            let skip = usize::from(matches!(anchor, Anchor::DoubleZero(_)));
            c.extend(clipped[1].iter().skip(skip));
            if !is_simple_curve(&c) {
                return Err(Error::BranchAssemblyFailed(
                    "dividing curve intersects itself".into(),
                ));
            }
            let a1 = (c[0] - center).arg();
            let a2 = (*c.last().unwrap() - center).arg();
            let mut ccw_end = a1;
            while ccw_end <= a2 {
                ccw_end += 2.0 * PI;
            }
            let mut cw_end = a1;
            while cw_end >= a2 {
                cw_end -= 2.0 * PI;
            }
            let close = |end: f64| {
                let mut p = c.clone();
                let arc = circle_arc(center, extent, a2, end);
                p.extend(&arc[1..arc.len() - 1]);
                p
            };
            let (p_ccw, p_cw) = (close(ccw_end), close(cw_end));
            let mid_ccw = center + Complex64::from_polar(extent, 0.5 * (a2 + ccw_end));
            let mid_cw = center + Complex64::from_polar(extent, 0.5 * (a2 + cw_end));
            // Ω is the half whose circle arc reaches further right (then up).
            let tol = 1e-9 * extent;
            let ccw_is_omega = if (mid_ccw.re - mid_cw.re).abs() > tol {
                mid_ccw.re > mid_cw.re
            } else {
                mid_ccw.im > mid_cw.im
            };
            if ccw_is_omega {
                (c, p_ccw, p_cw)
            } else {
                (c, p_cw, p_ccw)
            }
        }
    };

    let jet_center = f.jet(center)?;
    let lead = match anchor {
        Anchor::Simple(_) => jet_center.c[1],
        _ => jet_center.c[2],
    };
    let (slit_l, slit_l_prime) = match anchor {
        Anchor::Pair(..) => (
            Slit::NegativeRealAxisWithSegment {
                tip: jet_center.c[0],
            },
            Slit::NegativeRealAxis,
        ),
        _ => (Slit::NegativeRealAxis, Slit::NegativeRealAxis),
    };
    let local_scale = (0..64)
        .map(|k| {
            f.value(center + Complex64::from_polar(extent, 2.0 * PI * k as f64 / 64.0))
                .map(|v| v.norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut patch = DomainPatch {
        anchor,
        center,
        extent,
        boundary,
        omega,
        omega_prime,
        slit_l,
        slit_l_prime,
        delta: 0.01 * local_scale,
        b_region: Vec::new(),
        b_region_prime: Vec::new(),
        sigma_c: f.abscissa(),
        omega_c: Vec::new(),
        lead,
        local_scale,
    };
    fill_samples(f, &mut patch)?;
    Ok(patch)
}

fn check_template(f: &AnalyticFunctionHandle, anchor: Anchor, extent: f64) -> Result<()> {
    let expect = |s: Complex64, radius: f64, m: i64, what: &str| -> Result<()> {
        let cert = certify_multiplicity(f, s, radius)?;
        if cert.winding != m {
            return Err(Error::BranchAssemblyFailed(format!(
                "{what} template needs {m} zero(s) at {s}, certificate finds {}",
                cert.winding
            )));
        }
        Ok(())
    };
    match anchor {
        Anchor::DoubleZero(s0) => expect(s0, 0.5 * extent, 2, "double-zero"),
        Anchor::Simple(s0) => expect(s0, 0.5 * extent, 1, "simple-zero"),
        Anchor::Pair(a, b) => {
            let sep = (a - b).norm();
            if !(sep > 0.0) || sep >= extent {
                return Err(Error::BranchAssemblyFailed(format!(
                    "pair separation {sep:e} does not fit a patch of extent {extent:e}"
                )));
            }
            expect(a, 0.4 * sep, 1, "pair")?;
            expect(b, 0.4 * sep, 1, "pair")
        }
    }
}

/// Cuts a polyline starting inside the disc at its first exit.
fn clip_to_disc(points: &[Complex64], center: Complex64, radius: f64) -> Result<Vec<Complex64>> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (b - center).norm() >= radius {
            // |a + u (b - a) - center| = radius
            let d = b - a;
            let e = a - center;
            let qa = d.norm_sqr();
            let qb = 2.0 * (e.re * d.re + e.im * d.im);
            let qc = e.norm_sqr() - radius * radius;
            let u = (-qb + (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa);
            out.push(a + d * u.clamp(0.0, 1.0));
            return Ok(out);
        }
        out.push(b);
    }
    Err(Error::BranchAssemblyFailed(format!(
        "negative-axis arc from {} ends inside the patch",
        points[0]
    )))
}

/// Points on the circle from angle `from` to `to`, both included.
fn circle_arc(center: Complex64, radius: f64, from: f64, to: f64) -> Vec<Complex64> {
    let n = ((CIRCLE_VERTICES as f64 * (to - from).abs() / (2.0 * PI)).ceil() as usize).max(2);
    (0..=n)
        .map(|k| center + Complex64::from_polar(radius, from + (to - from) * k as f64 / n as f64))
        .collect()
}

fn is_simple_curve(c: &[Complex64]) -> bool {
    let n = c.len();
    for i in 0..n.saturating_sub(1) {
        for j in i + 2..n - 1 {
            if let Some((u, v)) = segment_intersection(c[i], c[i + 1], c[j], c[j + 1]) {
                // shared endpoints of consecutive or degenerate segments
                let touching = (j == i + 2 && u >= 1.0 - 1e-12 && v <= 1e-12) || c[i + 1] == c[j];
                if !touching {
                    return false;
                }
            }
        }
    }
    true
}

/// Distance from `v` to the negative real axis.
fn distance_to_negative_axis(v: Complex64) -> f64 {
    if v.re <= 0.0 {
        v.im.abs()
    } else {
        v.norm()
    }
}

fn slit_distance(slit: Slit, v: Complex64) -> f64 {
    match slit {
        Slit::NegativeRealAxis => distance_to_negative_axis(v),
        Slit::NegativeRealAxisWithSegment { tip } => distance_to_negative_axis(v).min(
            crate::trace::segment_distance(Complex64::new(0.0, 0.0), tip, v),
        ),
    }
}

fn fill_samples(f: &AnalyticFunctionHandle, patch: &mut DomainPatch) -> Result<()> {
    let n = PATCH_SAMPLES;
    let r = patch.extent;
    let nodes: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            patch.center
                + Complex64::new(
                    -r + 2.0 * r * (i as f64 + 0.5) / n as f64,
                    -r + 2.0 * r * (j as f64 + 0.5) / n as f64,
                )
        })
        .filter(|s| (s - patch.center).norm() < r)
        .collect();
    let values: Vec<Complex64> = nodes
        .par_iter()
        .map(|&s| f.value(s))
        .collect::<Result<_>>()?;
    for (&s, &v) in nodes.iter().zip(values.iter()) {
        let side = if point_in_polygon(&patch.omega, s) {
            Side::Omega
        } else if !patch.omega_prime.is_empty() && point_in_polygon(&patch.omega_prime, s) {
            Side::OmegaPrime
        } else {
            continue;
        };
        let far = slit_distance(patch.slit_l, v) > patch.delta
            && slit_distance(patch.slit_l_prime, v) > patch.delta;
        if !far {
            continue;
        }
        match side {
            Side::Omega => patch.b_region.push(s),
            Side::OmegaPrime => patch.b_region_prime.push(s),
        }
        if let Some(sc) = patch.sigma_c {
            let reflected = 2.0 * patch.center - s;
            if s.re > sc || reflected.re > sc {
                patch.omega_c.push(s);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn clip_lands_on_circle() {
        let pts = [c(0.0, 0.0), c(0.6, 0.0), c(1.2, 0.0)];
        let out = clip_to_disc(&pts, c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(out.len(), 3);
        assert!((out[2] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(clip_to_disc(&pts[..2], c(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn self_crossing_detected() {
        let z = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.5, -1.0)];
        assert!(!is_simple_curve(&z));
        let ok = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(2.0, 1.0)];
        assert!(is_simple_curve(&ok));
    }

    #[test]
    fn axis_distance() {
        assert_eq!(distance_to_negative_axis(c(-3.0, 0.5)), 0.5);
        assert_eq!(distance_to_negative_axis(c(3.0, 4.0)), 5.0);
    }
}
