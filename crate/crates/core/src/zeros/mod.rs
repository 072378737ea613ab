//! Zero location in rectangles: winding numbers, quadrisection, damped
//! Newton refinement and multiplicity certificates.

mod locate;
mod winding;

pub use locate::{
    certify_multiplicity, damped_newton, locate_zeros, locate_zeros_with, LocateOptions,
    MultiplicityCertificate, NewtonOutcome,
};
pub use winding::{
    winding_number, winding_of, winding_with, Contour, WindingOptions, WindingResult,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Largest outward shift applied to a contour that touches a zero or pole.
pub const JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl SearchRectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let r = SearchRectangle {
            sigma_min,
            sigma_max,
            t_min,
            t_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.sigma_min, self.sigma_max, self.t_min, self.t_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.sigma_min >= self.sigma_max || self.t_min >= self.t_max {
            return Err(Error::InvalidInput(format!(
                "degenerate rectangle [{}, {}] x [{}, {}]",
                self.sigma_min, self.sigma_max, self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.sigma_min + self.sigma_max),
            0.5 * (self.t_min + self.t_max),
        )
    }

    /// Corners counterclockwise from the lower left.
    pub fn corner(&self, k: usize) -> Complex64 {
        match k % 4 {
            0 => Complex64::new(self.sigma_min, self.t_min),
            1 => Complex64::new(self.sigma_max, self.t_min),
            2 => Complex64::new(self.sigma_max, self.t_max),
            _ => Complex64::new(self.sigma_min, self.t_max),
        }
    }

    pub fn contains(&self, p: Complex64) -> bool {
        p.re >= self.sigma_min && p.re <= self.sigma_max && p.im >= self.t_min && p.im <= self.t_max
    }

    pub fn contains_open(&self, p: Complex64) -> bool {
        p.re > self.sigma_min && p.re < self.sigma_max && p.im > self.t_min && p.im < self.t_max
    }

    pub fn boundary_distance(&self, p: Complex64) -> f64 {
        if self.contains(p) {
            (p.re - self.sigma_min)
                .min(self.sigma_max - p.re)
                .min(p.im - self.t_min)
                .min(self.t_max - p.im)
        } else {
            let cx = p.re.clamp(self.sigma_min, self.sigma_max);
            let cy = p.im.clamp(self.t_min, self.t_max);
            (p - Complex64::new(cx, cy)).norm()
        }
    }

    pub fn expand(&self, by: f64) -> Self {
        SearchRectangle {
            sigma_min: self.sigma_min - by,
            sigma_max: self.sigma_max + by,
            t_min: self.t_min - by,
            t_max: self.t_max + by,
        }
    }

    /// Four children split at `(fx, fy)` fractions of the width and height,
    /// ordered lower-left, lower-right, upper-left, upper-right.
    pub fn split(&self, fx: f64, fy: f64) -> [SearchRectangle; 4] {
        let xm = self.sigma_min + fx * self.width();
        let ym = self.t_min + fy * self.height();
        [
            SearchRectangle {
                sigma_max: xm,
                t_max: ym,
                ..*self
            },
            SearchRectangle {
                sigma_min: xm,
                t_max: ym,
                ..*self
            },
            SearchRectangle {
                sigma_max: xm,
                t_min: ym,
                ..*self
            },
            SearchRectangle {
                sigma_min: xm,
                t_min: ym,
                ..*self
            },
        ]
    }

    /// Horizontal bands of height at most `band`, bottom to top.
    pub fn bands(&self, band: f64) -> Vec<SearchRectangle> {
        let n = (self.height() / band).ceil().max(1.0) as usize;
        (0..n)
            .map(|k| SearchRectangle {
                t_min: self.t_min + self.height() * k as f64 / n as f64,
                t_max: if k + 1 == n {
                    self.t_max
                } else {
                    self.t_min + self.height() * (k + 1) as f64 / n as f64
                },
                ..*self
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroStatus {
    /// Newton converged and the certification circle reproduced the count.
    Certified,
    /// Winding above one persisted at the depth limit.
    UnresolvedCluster,
    /// Newton left the box; the location is the box center.
    NewtonDiverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub location: Complex64,
    pub multiplicity: u32,
    pub winding_number: i64,
    /// `|f|` at the refined location.
    pub residual: f64,
    pub certified_radius: f64,
    /// Largest `|f|` on the certification circle.
    pub local_scale: f64,
    pub status: ZeroStatus,
}

impl ZeroRecord {
    pub fn row(&self) -> ZeroRow {
        ZeroRow {
            re: self.location.re,
            im: self.location.im,
            multiplicity: self.multiplicity,
            residual: self.residual,
            certified_radius: self.certified_radius,
        }
    }
}

/// CSV projection of a [`ZeroRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRow {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
    pub residual: f64,
    pub certified_radius: f64,
}

pub fn write_zeros_csv<W: Write>(zeros: &[ZeroRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    // header is written even for an empty list
    w.write_record(["re", "im", "multiplicity", "residual", "certified_radius"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for z in zeros {
        let r = z.row();
        w.write_record([
            r.re.to_string(),
            r.im.to_string(),
            r.multiplicity.to_string(),
            r.residual.to_string(),
            r.certified_radius.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_zeros_csv<R: Read>(input: R) -> Result<Vec<ZeroRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_covers_parent() {
        let r = SearchRectangle::new(0.0, 2.0, 10.0, 14.0).unwrap();
        let kids = r.split(0.5, 0.25);
        let area: f64 = kids.iter().map(|k| k.width() * k.height()).sum();
        assert!((area - 8.0).abs() < 1e-12);
        assert_eq!(kids[3].sigma_min, 1.0);
        assert_eq!(kids[3].t_min, 11.0);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(SearchRectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SearchRectangle::new(0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn boundary_distance_inside_and_out() {
        let r = SearchRectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!((r.boundary_distance(Complex64::new(0.5, 0.2)) - 0.2).abs() < 1e-15);
        assert!((r.boundary_distance(Complex64::new(2.0, 0.5)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let z = ZeroRecord {
            location: Complex64::new(0.5, 14.134725141734695),
            multiplicity: 1,
            winding_number: 1,
            residual: 3.1e-16,
            certified_radius: 0.01,
            local_scale: 0.0079,
            status: ZeroStatus::Certified,
        };
        let mut buf = Vec::new();
        write_zeros_csv(std::slice::from_ref(&z), &mut buf).unwrap();
        let rows = read_zeros_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, vec![z.row()]);
    }
}
