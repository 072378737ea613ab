//! Local conformal structure near a double zero or a close zero pair: the
//! fundamental-domain patches on either side of the negative-axis pre-image,
//! the involution swapping them, the area and length identities, the
//! quadratic model fit and the Euler-product ratio diagnostic.

mod integrals;
mod involution;
mod model;
mod patch;
pub mod quadrature;

pub use integrals::{
    area_integral_check, area_integral_check_with, length_integral_check,
    length_integral_check_with, transported_area_check, IntegralOptions,
};
pub use involution::{build_involution, check_chain_rule, InvolutionMap, InvolutionNode};
pub use model::{
    local_model_fit, ratio_divergence_diagnostic, ModelFit, ModelFitRow, RatioDiagnostic,
    RatioStats,
};
pub use patch::build_domain_patch;

use crate::error::{Error, Result};
use crate::zeros::{ZeroRecord, ZeroStatus};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Distance scale, relative to the pair separation, above which a close pair
/// is treated as one quadratic zero.
pub const MERGE_FACTOR: f64 = 5.0;

/// The zero configuration a patch is built around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    DoubleZero(Complex64),
    Pair(Complex64, Complex64),
    /// One simple zero; the patch is the disc slit along one arc.
    Simple(Complex64),
}

impl Anchor {
    /// Anchor from located zeros: one record of multiplicity 2, two records
    /// of multiplicity 1, or one of multiplicity 1.
    pub fn from_records(records: &[ZeroRecord]) -> Result<Anchor> {
        if records.iter().any(|r| r.status != ZeroStatus::Certified) {
            return Err(Error::InvalidInput("anchor zeros must be certified".into()));
        }
        match records {
            [a] if a.multiplicity == 2 => Ok(Anchor::DoubleZero(a.location)),
            [a] if a.multiplicity == 1 => Ok(Anchor::Simple(a.location)),
            [a, b] if a.multiplicity == 1 && b.multiplicity == 1 => {
                // order by real part so the anchor is independent of input order
                if (a.location.re, a.location.im) <= (b.location.re, b.location.im) {
                    Ok(Anchor::Pair(a.location, b.location))
                } else {
                    Ok(Anchor::Pair(b.location, a.location))
                }
            }
            _ => Err(Error::InvalidInput(format!(
                "cannot form an anchor from {} zero records",
                records.len()
            ))),
        }
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        match *self {
            Anchor::DoubleZero(s) | Anchor::Simple(s) => vec![s],
            Anchor::Pair(a, b) => vec![a, b],
        }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Anchor::DoubleZero(s) | Anchor::Simple(s) => s,
            Anchor::Pair(a, b) => (a + b) * 0.5,
        }
    }

    pub fn separation(&self) -> f64 {
        match *self {
            Anchor::Pair(a, b) => (a - b).norm(),
            _ => 0.0,
        }
    }

    /// Zeros counted with multiplicity.
    pub fn count(&self) -> i64 {
        match self {
            Anchor::Simple(_) => 1,
            _ => 2,
        }
    }

    /// `MERGE_FACTOR` times the separation; zero for a true double zero.
    pub fn merge_scale(&self) -> f64 {
        MERGE_FACTOR * self.separation()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Omega,
    OmegaPrime,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Omega => Side::OmegaPrime,
            Side::OmegaPrime => Side::Omega,
        }
    }
}

/// Image of the patch boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slit {
    NegativeRealAxis,
    /// The negative axis together with the image of the segment joining a
    /// pair, which runs from 0 to `tip = f(midpoint)` and back.
    NegativeRealAxisWithSegment {
        tip: Complex64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPatch {
    pub anchor: Anchor,
    pub center: Complex64,
    /// Radius of the patch disc.
    pub extent: f64,
    /// Dividing curve `C`: outer end of the first arc, through the anchor
    /// zeros, to the outer end of the second arc. Mapped by `f` onto the
    /// slit.
    pub boundary: Vec<Complex64>,
    pub omega: Vec<Complex64>,
    /// Empty for the simple template.
    pub omega_prime: Vec<Complex64>,
    pub slit_l: Slit,
    pub slit_l_prime: Slit,
    /// Tube radius around the slits used for the `B` samples.
    pub delta: f64,
    pub b_region: Vec<Complex64>,
    pub b_region_prime: Vec<Complex64>,
    pub sigma_c: Option<f64>,
    /// Samples of `B ∪ B'` with `Re s` or `Re` of the reflected point beyond
    /// `sigma_c`.
    pub omega_c: Vec<Complex64>,
    /// `f''(s0)/2` for a double zero, `f''(m)/2` at the midpoint of a pair,
    /// `f'(s0)` for a simple zero.
    pub lead: Complex64,
    /// Largest `|f|` on the patch circle.
    pub local_scale: f64,
}

impl DomainPatch {
    pub fn side_of(&self, p: Complex64) -> Option<Side> {
        if crate::trace::point_in_polygon(&self.omega, p) {
            Some(Side::Omega)
        } else if !self.omega_prime.is_empty()
            && crate::trace::point_in_polygon(&self.omega_prime, p)
        {
            Some(Side::OmegaPrime)
        } else {
            None
        }
    }

    pub fn boundary_distance(&self, p: Complex64) -> f64 {
        crate::trace::polyline_distance(&self.boundary, p)
    }

    pub fn polygon(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Omega => &self.omega,
            Side::OmegaPrime => &self.omega_prime,
        }
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.anchor, Anchor::Simple(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub r: f64,
    pub measured: f64,
    pub target: f64,
    /// `|measured - target| / |target|`.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(
        label: impl Into<String>,
        r: f64,
        measured: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        let deviation = if target == 0.0 {
            measured.abs()
        } else {
            (measured - target).abs() / target.abs()
        };
        ReportRow {
            label: label.into(),
            r,
            measured,
            target,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub radii: Vec<f64>,
    pub rows: Vec<ReportRow>,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>, radii: Vec<f64>) -> Self {
        VerificationReport {
            identity: identity.into(),
            radii,
            rows: Vec::new(),
            passed: true,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.passed &= row.pass;
        self.rows.push(row);
    }

    pub fn rows_labelled<'a>(
        &'a self,
        prefix: &'a str,
    ) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.label.starts_with(prefix))
    }

    pub fn max_deviation(&self, prefix: &str) -> f64 {
        self.rows_labelled(prefix)
            .map(|r| r.deviation)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub identity: String,
    pub label: String,
    pub r: f64,
    pub measured: f64,
    pub target: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn write_summary_csv<W: Write>(reports: &[VerificationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rep in reports {
        for row in &rep.rows {
            w.serialize(SummaryRow {
                identity: rep.identity.clone(),
                label: row.label.clone(),
                r: row.r,
                measured: row.measured,
                target: row.target,
                deviation: row.deviation,
                tolerance: row.tolerance,
                pass: row.pass,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: std::io::Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())))
        .collect()
}
