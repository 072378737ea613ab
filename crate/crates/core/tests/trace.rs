use proptest::prelude::*;
use std::f64::consts::PI;
use zeromult::series::{AnalyticFunctionHandle, SyntheticRule};
use zeromult::trace::{
    classify_component, intertwining_check, partition_strips, seed_points, trace_all,
    trace_branches_at_zero, trace_level_curve, trace_level_curve_with, Classification, Constraint,
    CurveComponent, Edge, Termination, TraceOptions,
};
use zeromult::zeros::{locate_zeros, winding_number, Contour, SearchRectangle};
use zeromult::{Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rect(a: f64, b: f64, t0: f64, t1: f64) -> SearchRectangle {
    SearchRectangle::new(a, b, t0, t1).unwrap()
}

fn max_abs(comp: &CurveComponent) -> f64 {
    comp.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Connected clusters of grid cells whose corners change the sign of `Im f`,
/// joined through shared edges.
fn flood_fill_components(f: &AnalyticFunctionHandle, w: SearchRectangle, n: usize) -> usize {
    let node = |i: usize, j: usize| {
        c(
            w.sigma_min + w.width() * i as f64 / n as f64,
            w.t_min + w.height() * j as f64 / n as f64,
        )
    };
    let im: Vec<Vec<f64>> = (0..=n)
        .map(|j| (0..=n).map(|i| f.value(node(i, j)).unwrap().im).collect())
        .collect();
    let marked = |i: usize, j: usize| {
        let v = [im[j][i], im[j][i + 1], im[j + 1][i], im[j + 1][i + 1]];
        v.iter().any(|x| *x > 0.0) && v.iter().any(|x| *x < 0.0)
    };
    let mut seen = vec![vec![false; n]; n];
    let mut count = 0;
    for j0 in 0..n {
        for i0 in 0..n {
            if seen[j0][i0] || !marked(i0, j0) {
                continue;
            }
            count += 1;
            let mut stack = vec![(i0, j0)];
            seen[j0][i0] = true;
            while let Some((i, j)) = stack.pop() {
                let mut nb = Vec::new();
                if i > 0 {
                    nb.push((i - 1, j));
                }
                if i + 1 < n {
                    nb.push((i + 1, j));
                }
                if j > 0 {
                    nb.push((i, j - 1));
                }
                if j + 1 < n {
                    nb.push((i, j + 1));
                }
                for (a, b) in nb {
                    if !seen[b][a] && marked(a, b) {
                        seen[b][a] = true;
                        stack.push((a, b));
                    }
                }
            }
        }
    }
    count
}

#[test]
fn square_seeds_lie_on_both_axes() {
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(c(0.0, 0.0), 2));
    let seeds = seed_points(
        &f,
        rect(-1.0, 1.0, -1.0, 1.0),
        32,
        Constraint::RealAxisPreimage,
    )
    .unwrap();
    assert!(seeds
        .iter()
        .all(|s| s.re.abs() < 1e-12 || s.im.abs() < 1e-12));
    assert!(seeds.iter().any(|s| s.im.abs() < 1e-12));
    assert!(seeds.iter().any(|s| s.re.abs() < 1e-12));
}

#[test]
fn zeta_seeds_cover_every_component() {
    let f = AnalyticFunctionHandle::zeta();
    let w = rect(-1.0, 4.0, 0.1, 30.0);
    let seeds = seed_points(&f, w, 64, Constraint::RealAxisPreimage).unwrap();
    assert!(seeds.len() >= 4);
    let traced = trace_all(
        &f,
        w,
        Constraint::RealAxisPreimage,
        64,
        TraceOptions::default(),
    )
    .unwrap();
    assert!(traced.failures.is_empty(), "{:?}", traced.failures);
    let oracle = flood_fill_components(&f, w, 512);
    assert!(oracle >= 4);
    assert_eq!(traced.components.len(), oracle);
}

#[test]
fn no_seeds_where_imaginary_part_keeps_sign() {
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::polynomial(vec![
        c(0.0, 5.0),
        c(1.0, 0.0),
    ]));
    let seeds = seed_points(
        &f,
        rect(-1.0, 1.0, -1.0, 1.0),
        32,
        Constraint::RealAxisPreimage,
    )
    .unwrap();
    assert!(seeds.is_empty());
}

#[test]
fn square_real_axis_trace_runs_to_the_double_zero() {
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(c(0.0, 0.0), 2));
    let comp = trace_level_curve(
        &f,
        c(0.5, 0.0),
        Constraint::RealAxisPreimage,
        rect(-1.0, 1.0, -1.0, 1.0),
    )
    .unwrap();
    assert!(comp.points.iter().all(|p| p.im.abs() < 1e-12));
    assert!(comp.ends.contains(&Termination::ExitedWindow(Edge::Right)));
    assert!(comp.ends.contains(&Termination::CriticalPoint));
    let (a, b) = comp.endpoints().unwrap();
    let xs = [a.re.min(b.re), a.re.max(b.re)];
    assert!(xs[0].abs() < 1e-3 && (xs[1] - 1.0).abs() < 1e-12);
}

#[test]
fn zeta_real_segment_traces_to_itself() {
    let f = AnalyticFunctionHandle::zeta();
    let w = rect(-1.5, 0.9, -1.0, 1.0);
    let comp = trace_level_curve(&f, c(-0.5, 0.0), Constraint::RealAxisPreimage, w).unwrap();
    assert!(comp.points.iter().all(|p| p.im.abs() < 1e-12));
    let mut edges = comp.exit_edges();
    edges.sort_by_key(|e| *e as u8);
    assert_eq!(edges, vec![Edge::Left, Edge::Right]);
    assert!((comp.arc_length() - 2.4).abs() < 1e-9);
    assert_eq!(
        classify_component(&f, &comp).unwrap(),
        Classification::GammaZero
    );
}

#[test]
fn davenport_heilbronn_pair_lies_on_two_components() {
    let f = AnalyticFunctionHandle::davenport_heilbronn();
    let w = rect(0.3, 0.7, 520.7, 521.2);
    let zeros = locate_zeros(&f, w, 24).unwrap();
    assert_eq!(zeros.len(), 2);
    let set = trace_all(
        &f,
        w,
        Constraint::RealAxisPreimage,
        64,
        TraceOptions::default(),
    )
    .unwrap();
    let mut owners = Vec::new();
    for z in &zeros {
        let on: Vec<usize> = set
            .components
            .iter()
            .enumerate()
            .filter(|(_, k)| k.distance_to(z.location) < k.step)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(on.len(), 1, "zero {} on components {:?}", z.location, on);
        owners.push(on[0]);
    }
    assert_ne!(owners[0], owners[1]);
    for &o in &owners {
        let k = &set.components[o];
        let passing = zeros
            .iter()
            .filter(|z| k.distance_to(z.location) < k.step)
            .count();
        assert_eq!(passing, 1);
    }
}

#[test]
fn crossing_component_of_double_zero_is_gamma_j() {
    let s0 = c(0.3, 0.2);
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(s0, 2));
    let w = rect(-0.7, 1.3, -0.8, 1.2);
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
    for k in &comps {
        assert!(k.distance_to(s0) < 1e-12);
        assert_eq!(classify_component(&f, k).unwrap(), Classification::GammaJ);
    }
}

#[test]
fn zeta_right_of_pole_is_gamma_prime() {
    let f = AnalyticFunctionHandle::zeta();
    let comp = trace_level_curve(
        &f,
        c(2.0, 0.0),
        Constraint::RealAxisPreimage,
        rect(1.2, 8.0, -1.0, 1.0),
    )
    .unwrap();
    assert!(comp.values.iter().all(|v| v.re > 1.0));
    assert_eq!(
        classify_component(&f, &comp).unwrap(),
        Classification::GammaPrime
    );
}

#[test]
fn short_components_are_not_classified() {
    let f = AnalyticFunctionHandle::zeta();
    let mut comp = trace_level_curve(
        &f,
        c(2.0, 0.0),
        Constraint::RealAxisPreimage,
        rect(1.2, 8.0, -1.0, 1.0),
    )
    .unwrap();
    comp.points.truncate(3);
    comp.values.truncate(3);
    assert!(matches!(
        classify_component(&f, &comp),
        Err(Error::InsufficientArc { points: 3 })
    ));
}

#[test]
fn zeta_strips_hold_all_window_zeros() {
    let f = AnalyticFunctionHandle::zeta();
    let w = rect(-2.0, 8.0, 5.0, 30.0);
    let p = partition_strips(&f, w).unwrap();
    let critical = winding_number(&f, &Contour::Rectangle(rect(-0.5, 1.5, 5.0, 30.0))).unwrap();
    assert_eq!(critical, 3);
    assert_eq!(p.window_zero_count as i64, critical);
    assert_eq!(p.complete_j_total() as i64, critical);
    for s in &p.strips {
        assert_eq!(
            s.j_count,
            s.contained_zeros
                .iter()
                .map(|z| z.multiplicity)
                .sum::<u32>()
        );
    }
    // boundary images stay on the slit
    for s in p.strips.iter().filter(|s| s.complete) {
        for b in [s.lower.as_ref().unwrap(), s.upper.as_ref().unwrap()] {
            assert!(b.values.iter().all(|v| v.re > 1.0 - 1e-9));
        }
    }
}

#[test]
fn exponential_strips_have_height_two_pi() {
    let f = AnalyticFunctionHandle::synthetic(
        SyntheticRule::polynomial(vec![c(1.0, 0.0)]).with_exp(c(1.0, 0.0)),
    );
    let w = rect(-1.0, 1.0, -1.0, 20.0);
    let p = partition_strips(&f, w).unwrap();
    assert_eq!(p.window_zero_count, 0);
    let complete: Vec<_> = p.strips.iter().filter(|s| s.complete).collect();
    assert_eq!(complete.len(), 3);
    for (k, s) in complete.iter().enumerate() {
        let lo = s.lower.as_ref().unwrap();
        let hi = s.upper.as_ref().unwrap();
        assert!(lo
            .points
            .iter()
            .all(|p| (p.im - 2.0 * PI * k as f64).abs() < 1e-9));
        assert!(hi
            .points
            .iter()
            .all(|p| (p.im - 2.0 * PI * (k + 1) as f64).abs() < 1e-9));
        let inner: Vec<_> = p
            .components
            .iter()
            .filter(|x| {
                x.strip_index == Some(s.index) && x.classification == Classification::GammaZero
            })
            .collect();
        assert_eq!(inner.len(), 1);
        assert!(inner[0]
            .points
            .iter()
            .all(|p| (p.im - PI * (2 * k + 1) as f64).abs() < 1e-9));
    }
}

#[test]
fn short_window_gives_one_partial_strip() {
    let f = AnalyticFunctionHandle::synthetic(
        SyntheticRule::polynomial(vec![c(1.0, 0.0)]).with_exp(c(1.0, 0.0)),
    );
    let p = partition_strips(&f, rect(-1.0, 1.0, 1.0, 5.0)).unwrap();
    assert_eq!(p.strips.len(), 1);
    assert!(!p.strips[0].complete);
    assert!(!p.issues.is_empty());
}

#[test]
fn identity_has_no_derivative_curves() {
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::polynomial(vec![
        c(0.0, 0.0),
        c(1.0, 0.0),
    ]));
    let r =
        intertwining_check(&f, rect(-1.0, 1.0, -1.0, 1.0), 32, TraceOptions::default()).unwrap();
    assert!(r.upsilon.is_empty());
    assert!(r.intersections.is_empty());
}

#[test]
fn double_zero_makes_tangent_undefined() {
    let s0 = c(0.25, 0.4);
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(s0, 2).with_exp(c(1.0, 0.0)));
    let r = intertwining_check(&f, rect(-0.5, 1.0, -0.3, 1.1), 32, TraceOptions::default());
    match r {
        Err(Error::TangentUndefined { at }) => assert!((at - s0).norm() < 1e-6),
        other => panic!("expected TangentUndefined, got {other:?}"),
    }
}

#[test]
fn circle_preimage_around_simple_zero_is_one_loop() {
    let f = AnalyticFunctionHandle::zeta();
    let z = c(0.5, 14.134725141734693);
    let w = rect(0.3, 0.7, 13.9, 14.4);
    let (_, d) = f.value_and_derivative(z).unwrap();
    let r = 0.05 * d.norm();
    let seed = z + 0.05 * d.conj() / d.norm();
    let comp = trace_level_curve(&f, seed, Constraint::CirclePreimage { radius: r }, w).unwrap();
    assert!(comp.closed);
    let loop_winding = winding_of_polyline(&comp.points, z);
    assert_eq!(loop_winding.abs(), 1);
    assert_eq!(image_winding(&comp.values), loop_winding);
}

#[test]
fn circle_preimage_around_double_zero_winds_twice() {
    let s0 = c(0.0, 0.0);
    let f = AnalyticFunctionHandle::synthetic(SyntheticRule::power(s0, 2).with_exp(c(1.0, 0.0)));
    let comp = trace_level_curve_with(
        &f,
        c(0.1, 0.0),
        Constraint::CirclePreimage {
            radius: 0.01 * 0.1f64.exp(),
        },
        rect(-1.0, 1.0, -1.0, 1.0),
        TraceOptions::default(),
    )
    .unwrap();
    assert!(comp.closed);
    let loop_winding = winding_of_polyline(&comp.points, s0);
    assert_eq!(loop_winding.abs(), 1);
    assert_eq!(image_winding(&comp.values), 2 * loop_winding);
}

fn winding_of_polyline(points: &[Complex64], z: Complex64) -> i64 {
    image_winding(&points.iter().map(|p| p - z).collect::<Vec<_>>())
}

fn image_winding(values: &[Complex64]) -> i64 {
    let mut total = 0.0;
    for k in 0..values.len() {
        total += (values[(k + 1) % values.len()] / values[k]).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

fn hausdorff(a: &CurveComponent, b: &CurveComponent) -> f64 {
    let one = |x: &CurveComponent, y: &CurveComponent| {
        x.points
            .iter()
            .map(|p| y.distance_to(*p))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

fn test_handles() -> Vec<(AnalyticFunctionHandle, SearchRectangle)> {
    vec![
        (AnalyticFunctionHandle::zeta(), rect(-1.0, 3.0, 5.0, 30.0)),
        (
            AnalyticFunctionHandle::davenport_heilbronn(),
            rect(-0.5, 1.5, 20.0, 40.0),
        ),
        (
            AnalyticFunctionHandle::synthetic(SyntheticRule::from_roots(&[
                c(0.3, 0.2),
                c(-0.4, 0.5),
                c(0.1, -0.6),
            ])),
            rect(-1.0, 1.0, -1.0, 1.0),
        ),
    ]
}

#[test]
fn traced_components_satisfy_residual_and_separation() {
    for (f, w) in test_handles() {
        let set = trace_all(
            &f,
            w,
            Constraint::RealAxisPreimage,
            64,
            TraceOptions::default(),
        )
        .unwrap();
        assert!(set.failures.is_empty());
        let zeros = locate_zeros(&f, w, 24).unwrap();
        for k in &set.components {
            assert!(
                k.max_residual < 1e-8 * (1.0 + max_abs(k)),
                "{}",
                k.max_residual
            );
            for p in k.points.windows(2) {
                assert!((p[1] - p[0]).norm() <= 4.0 * k.step * (1.0 + 1e-9));
            }
        }
        for (i, a) in set.components.iter().enumerate() {
            for b in set.components.iter().skip(i + 1) {
                for p in &a.points {
                    if zeros.iter().all(|z| (z.location - p).norm() > 2.0 * a.step) {
                        assert!(b.distance_to(*p) > 0.5 * a.step);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn retracing_from_an_interior_sample_is_stable(which in 0usize..3, pick in 0.1f64..0.9) {
        let (f, w) = test_handles().swap_remove(which);
        let set = trace_all(&f, w, Constraint::RealAxisPreimage, 48, TraceOptions::default()).unwrap();
        for k in set.components.iter().filter(|k| k.len() > 10) {
            let i = ((k.len() - 1) as f64 * pick) as usize;
            let again = trace_level_curve(&f, k.points[i], Constraint::RealAxisPreimage, w).unwrap();
            prop_assert!(hausdorff(k, &again) < 2.0 * k.step);
        }
    }

    #[test]
    fn ray_preimages_keep_their_argument(theta in -3.0f64..3.0, x in 0.2f64..0.9) {
        let f = AnalyticFunctionHandle::synthetic(SyntheticRule::from_roots(&[c(0.0, 0.0), c(1.5, 0.3)]));
        let w = rect(-1.0, 1.0, -1.0, 1.0);
        let seed = Complex64::from_polar(x, theta);
        let v = f.value(seed).unwrap();
        let comp = trace_level_curve(&f, seed, Constraint::RayPreimage { theta: v.arg() }, w);
        if let Ok(comp) = comp {
            for val in &comp.values {
                let d = (val * Complex64::from_polar(1.0, -v.arg())).im;
                prop_assert!(d.abs() < 1e-8 * (1.0 + val.norm()));
            }
        }
    }
}
