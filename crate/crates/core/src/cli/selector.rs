use crate::error::{Error, Result};
use crate::series::config::{parse_complex, validate_series_config};
use crate::series::{
    AnalyticFunctionHandle, DirichletCharacter, FunctionKind, GeneralDirichletSeries, SyntheticRule,
};
use crate::zeros::SearchRectangle;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

/// Function selector of the command line.
///
/// `zeta`, `dh`, `hurwitz:A`, `l5` (the character mod 5 with `χ(2) = i`),
/// `series:PATH`, `double:S0` for `(s - s0)² e^s` and `power:M:S0` for
/// `(s - s0)^M`, with `S0` a complex literal such as `0.5+0.3i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zeta,
    DavenportHeilbronn,
    Hurwitz { shift: f64 },
    LMod5,
    Series { path: PathBuf },
    DoubleZero { s0: Complex64 },
    Power { s0: Complex64, m: usize },
}

fn complex_arg(spec: &str, text: &str) -> Result<Complex64> {
    parse_complex(text).ok_or_else(|| {
        Error::ConfigInvalid(format!("function '{spec}': bad complex literal '{text}'"))
    })
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<FunctionSpec> {
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (text, None),
        };
        match (head, rest) {
            ("zeta", None) => Ok(FunctionSpec::Zeta),
            ("dh" | "davenport-heilbronn", None) => Ok(FunctionSpec::DavenportHeilbronn),
            ("l5", None) => Ok(FunctionSpec::LMod5),
            ("hurwitz", Some(a)) => {
                let shift: f64 = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::ConfigInvalid(format!("function '{text}': bad shift")))?;
                if !(shift > 0.0 && shift <= 1.0) {
                    return Err(Error::ConfigInvalid(format!(
                        "function '{text}': shift must lie in (0, 1]"
                    )));
                }
                Ok(FunctionSpec::Hurwitz { shift })
            }
            ("series", Some(p)) if !p.is_empty() => Ok(FunctionSpec::Series {
                path: PathBuf::from(p),
            }),
            ("double", Some(s0)) => Ok(FunctionSpec::DoubleZero {
                s0: complex_arg(text, s0)?,
            }),
            ("power", Some(r)) => {
                let (m, s0) = r.split_once(':').ok_or_else(|| {
                    Error::ConfigInvalid(format!("function '{text}' is not power:M:S0"))
                })?;
                let m: usize =
                    m.trim().parse().ok().filter(|&m| m > 0).ok_or_else(|| {
                        Error::ConfigInvalid(format!("function '{text}': bad order"))
                    })?;
                Ok(FunctionSpec::Power {
                    s0: complex_arg(text, s0)?,
                    m,
                })
            }
            _ => Err(Error::ConfigInvalid(format!("unknown function '{text}'"))),
        }
    }

    /// Loads series files (with validation) and builds the handle.
    pub fn handle(&self, precision: f64, series_cutoff: usize) -> Result<AnalyticFunctionHandle> {
        let kind = match self {
            FunctionSpec::Zeta => FunctionKind::RiemannZeta,
            FunctionSpec::DavenportHeilbronn => FunctionKind::DavenportHeilbronn,
            FunctionSpec::Hurwitz { shift } => FunctionKind::HurwitzZeta { shift: *shift },
            FunctionSpec::LMod5 => FunctionKind::DirichletL(DirichletCharacter::mod5_i()),
            FunctionSpec::Series { path } => FunctionKind::TruncatedSeries {
                series: Arc::new(validate_series_config(path)?),
                cutoff: series_cutoff,
            },
            FunctionSpec::DoubleZero { s0 } => {
                FunctionKind::Synthetic(SyntheticRule::double_zero(*s0))
            }
            FunctionSpec::Power { s0, m } => FunctionKind::Synthetic(SyntheticRule::power(*s0, *m)),
        };
        Ok(AnalyticFunctionHandle::new(kind).with_precision(precision))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesSpec {
    Classical,
    File { path: PathBuf },
}

impl SeriesSpec {
    pub fn parse(text: &str) -> SeriesSpec {
        if text == "classical" {
            SeriesSpec::Classical
        } else {
            SeriesSpec::File {
                path: PathBuf::from(text),
            }
        }
    }

    pub fn load(&self) -> Result<GeneralDirichletSeries> {
        match self {
            SeriesSpec::Classical => Ok(GeneralDirichletSeries::classical()),
            SeriesSpec::File { path } => validate_series_config(path),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Double,
    Simple,
}

impl Template {
    pub fn parse(text: &str) -> Result<Template> {
        match text {
            "double" => Ok(Template::Double),
            "simple" => Ok(Template::Simple),
            _ => Err(Error::ConfigInvalid(format!(
                "template '{text}' is not double or simple"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnchorSpec {
    /// The certified zeros located in a rectangle.
    Located {
        rect: SearchRectangle,
    },
    Declared {
        zero: Complex64,
        template: Template,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_selectors() {
        assert_eq!(
            FunctionSpec::parse("dh").unwrap(),
            FunctionSpec::DavenportHeilbronn
        );
        assert_eq!(
            FunctionSpec::parse("hurwitz:0.25").unwrap(),
            FunctionSpec::Hurwitz { shift: 0.25 }
        );
        assert_eq!(
            FunctionSpec::parse("double:0.5+0.3i").unwrap(),
            FunctionSpec::DoubleZero {
                s0: Complex64::new(0.5, 0.3)
            }
        );
        assert_eq!(
            FunctionSpec::parse("power:3:-1").unwrap(),
            FunctionSpec::Power {
                s0: Complex64::new(-1.0, 0.0),
                m: 3
            }
        );
        for bad in ["eta", "hurwitz:2", "power:0:1", "double:x", "series:"] {
            assert!(
                matches!(FunctionSpec::parse(bad), Err(Error::ConfigInvalid(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn missing_series_file_is_an_io_error() {
        let spec = FunctionSpec::Series {
            path: PathBuf::from("/nonexistent/series.txt"),
        };
        assert!(matches!(spec.handle(1e-12, 100), Err(Error::Io(_))));
    }
}
