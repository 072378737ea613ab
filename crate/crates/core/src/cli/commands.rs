use super::{AnchorSpec, Command, Failure, Outputs, RunConfig, Settings, Template};
use crate::conformal::{
    area_integral_check_with, build_domain_patch, build_involution, check_chain_rule,
    length_integral_check_with, local_model_fit, ratio_divergence_diagnostic,
    transported_area_check, write_summary_csv, Anchor, IntegralOptions, VerificationReport,
};
use crate::error::{Error, Result};
use crate::series::AnalyticFunctionHandle;
use crate::trace::{
    partition_strips_with, trace_all, write_component_csv, ComponentSummary, CurveComponent,
    StripOptions, TraceOptions,
};
use crate::zeros::{
    locate_zeros_with, write_zeros_csv, LocateOptions, SearchRectangle, ZeroRecord, ZeroStatus,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub function: String,
    pub s: Complex64,
    pub value: Complex64,
    pub error_bound: f64,
    pub terms_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSummary {
    pub index: i64,
    pub complete: bool,
    pub j_count: u32,
    pub zeros: Vec<Complex64>,
    /// Ids into `components.json`.
    pub lower: Option<usize>,
    pub upper: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripsOutput {
    pub window: SearchRectangle,
    pub window_zero_count: u32,
    pub complete_j_total: u32,
    pub strips: Vec<StripSummary>,
    pub issues: Vec<String>,
}

/// One row of `ratio.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub p: u64,
    pub log_abs: f64,
    pub arg: f64,
}

fn locate_options(settings: &Settings, seed: u64) -> LocateOptions {
    LocateOptions {
        max_depth: settings.max_depth,
        nodes_per_edge: settings.nodes_per_edge,
        certify_radius: settings.certify_radius,
        newton_max_iter: settings.newton_max_iter,
        seed,
    }
}

fn trace_options(settings: &Settings, window: &SearchRectangle) -> TraceOptions {
    TraceOptions {
        step: Some(settings.trace_step_fraction * window.diagonal()),
        max_steps: settings.trace_max_steps,
        tolerance: settings.trace_tolerance,
        ..TraceOptions::default()
    }
}

fn integral_options(settings: &Settings) -> IntegralOptions {
    IntegralOptions {
        tolerance: settings.integral_tolerance,
        agreement: settings.integral_agreement,
        area_order: settings.area_order,
        length_order: settings.length_order,
        step_fraction: settings.loop_step_fraction,
        rays: settings.rays,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Failure for zeros that did not certify, if any.
fn zero_failure(zeros: &[ZeroRecord]) -> Option<Failure> {
    let bad: Vec<&ZeroRecord> = zeros
        .iter()
        .filter(|z| z.status != ZeroStatus::Certified)
        .collect();
    let first = bad.first()?;
    let code = match first.status {
        ZeroStatus::UnresolvedCluster => "unresolved_cluster",
        _ => "newton_diverged",
    };
    Some(Failure {
        code: code.into(),
        message: format!(
            "{} zero(s) not certified, first near {}",
            bad.len(),
            first.location
        ),
    })
}

fn write_components(out: &mut Outputs, components: &[CurveComponent]) -> Result<()> {
    let mut summaries = Vec::with_capacity(components.len());
    for (id, c) in components.iter().enumerate() {
        let file = format!("components/component_{id:04}.csv");
        out.write_with(&file, |w| write_component_csv(c, w))?;
        summaries.push(ComponentSummary::new(id, file, c));
    }
    out.write_json("components.json", &summaries)
}

/// Runs the command; `Ok(Some(_))` is a numerical failure whose partial
/// outputs have been written.
pub(super) fn dispatch(config: &RunConfig, out: &mut Outputs) -> Result<Option<Failure>> {
    let st = &config.settings;
    let handle = |spec: &super::FunctionSpec| -> Result<AnalyticFunctionHandle> {
        spec.handle(st.precision, st.series_cutoff)
    };
    match &config.command {
        Command::Eval { function, point } => {
            let f = handle(function)?;
            let r = f.eval(*point)?;
            let result = EvalOutput {
                function: f.name(),
                s: *point,
                value: r.value,
                error_bound: r.error_bound,
                terms_used: r.terms_used,
            };
            out.write_json("eval.json", &result)?;
            println!(
                "{}",
                serde_json::to_string(&result).map_err(|e| Error::Io(e.to_string()))?
            );
            Ok(None)
        }
        Command::Zeros { function, rect } => {
            let f = handle(function)?;
            let zeros = locate_zeros_with(&f, *rect, locate_options(st, config.seed))?;
            out.write_with("zeros.csv", |w| write_zeros_csv(&zeros, w))?;
            out.write_json("zeros.json", &zeros)?;
            println!("{} zero(s) in {}", zeros.len(), function_label(&f));
            Ok(zero_failure(&zeros))
        }
        Command::Trace {
            function,
            window,
            constraint,
        } => {
            let f = handle(function)?;
            let set = trace_all(
                &f,
                *window,
                *constraint,
                st.grid_density,
                trace_options(st, window),
            )?;
            write_components(out, &set.components)?;
            out.write_json("failures.json", &set.failures)?;
            println!(
                "{} component(s), {} failed seed group(s)",
                set.components.len(),
                set.failures.len()
            );
            if set.components.is_empty() && !set.failures.is_empty() {
                let first = &set.failures[0];
                return Ok(Some(Failure {
                    code: first.code.clone(),
                    message: format!("every seed group failed; first: {}", first.message),
                }));
            }
            Ok(None)
        }
        Command::Strips { function, window } => {
            let f = handle(function)?;
            let opts = StripOptions {
                grid_density: st.grid_density,
                trace: trace_options(st, window),
                locate: locate_options(st, config.seed),
            };
            let part = partition_strips_with(&f, *window, opts)?;
            let id_of = |c: &Option<CurveComponent>| {
                c.as_ref()
                    .and_then(|c| part.components.iter().position(|k| k.points == c.points))
            };
            let summary = StripsOutput {
                window: part.window,
                window_zero_count: part.window_zero_count,
                complete_j_total: part.complete_j_total(),
                strips: part
                    .strips
                    .iter()
                    .map(|s| StripSummary {
                        index: s.index,
                        complete: s.complete,
                        j_count: s.j_count,
                        zeros: s.contained_zeros.iter().map(|z| z.location).collect(),
                        lower: id_of(&s.lower),
                        upper: id_of(&s.upper),
                    })
                    .collect(),
                issues: part.issues.clone(),
            };
            write_components(out, &part.components)?;
            out.write_with("zeros.csv", |w| write_zeros_csv(&part.zeros, w))?;
            out.write_json("strips.json", &summary)?;
            println!(
                "{} strip(s), {} complete, j total {} of {} zero(s)",
                summary.strips.len(),
                summary.strips.iter().filter(|s| s.complete).count(),
                summary.complete_j_total,
                summary.window_zero_count
            );
            Ok(zero_failure(&part.zeros))
        }
        Command::Verify {
            function,
            anchor,
            radii,
        } => {
            let f = handle(function)?;
            verify(&f, anchor, radii, config, out)
        }
        Command::Ratio {
            series,
            s,
            s_image,
            n_max,
        } => {
            let series = series.load()?;
            let d = ratio_divergence_diagnostic(&series, *s, *s_image, *n_max)?;
            out.write_with("ratio.csv", |w| {
                let mut csv = csv::Writer::from_writer(w);
                for k in 0..d.primes.len() {
                    csv.serialize(RatioRow {
                        p: d.primes[k],
                        log_abs: d.log_abs[k],
                        arg: d.arg[k],
                    })
                    .map_err(csv_err)?;
                }
                csv.flush()?;
                Ok(())
            })?;
            out.write_json("ratio.json", &d)?;
            println!(
                "{} primes; log|ratio| max {:e}, last {:e}, slope {:e}",
                d.primes.len(),
                d.stats.max_log_abs,
                d.stats.last_log_abs,
                d.stats.slope
            );
            Ok(None)
        }
    }
}

fn function_label(f: &AnalyticFunctionHandle) -> String {
    f.name()
}

fn verify(
    f: &AnalyticFunctionHandle,
    spec: &AnchorSpec,
    radii: &[f64],
    config: &RunConfig,
    out: &mut Outputs,
) -> Result<Option<Failure>> {
    let st = &config.settings;
    let anchor = match *spec {
        AnchorSpec::Located { rect } => {
            let zeros = locate_zeros_with(f, rect, locate_options(st, config.seed))?;
            out.write_json("zeros.json", &zeros)?;
            if let Some(failure) = zero_failure(&zeros) {
                return Ok(Some(failure));
            }
            Anchor::from_records(&zeros)?
        }
        AnchorSpec::Declared { zero, template } => match template {
            Template::Double => Anchor::DoubleZero(zero),
            Template::Simple => Anchor::Simple(zero),
        },
    };
    let extent = st.patch_extent;
    let patch = build_domain_patch(f, anchor, extent)?;
    out.write_json("patch.json", &patch)?;

    let mut reports: Vec<VerificationReport> = Vec::new();
    if !patch.is_simple() {
        let map = build_involution(f, &patch, st.involution_grid)?;
        out.write_json("involution.json", &map)?;
        let center = anchor.center();
        let samples: Vec<Complex64> = [0.5, 0.8]
            .iter()
            .flat_map(|&d| {
                (0..8).map(move |k| {
                    center + Complex64::from_polar(d * extent, 0.3 + k as f64 * 0.785)
                })
            })
            .filter(|&s| patch.side_of(s).is_some())
            .collect();
        reports.push(check_chain_rule(f, &map, &samples, st.chain_rule_tolerance));
        reports.push(transported_area_check(
            f,
            &patch,
            &map,
            radii,
            st.transport_tolerance,
        )?);
    }
    let opts = integral_options(st);
    reports.push(area_integral_check_with(f, &patch, radii, opts)?);
    reports.push(length_integral_check_with(f, &patch, radii, opts)?);

    let fit_radii: Vec<f64> = (1..=8).map(|k| extent * 0.5f64.powi(k)).collect();
    let fit = local_model_fit(f, anchor.center(), &fit_radii)?;
    out.write_json("model_fit.json", &fit)?;
    out.write_json("reports.json", &reports)?;
    out.write_with("summary.csv", |w: &mut dyn Write| {
        write_summary_csv(&reports, w)
    })?;

    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.identity.as_str())
        .collect();
    for r in &reports {
        println!(
            "{:<18} {}",
            r.identity,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    if failed.is_empty() {
        Ok(None)
    } else {
        Ok(Some(Failure {
            code: "verification_failed".into(),
            message: format!("failed checks: {}", failed.join(", ")),
        }))
    }
}
