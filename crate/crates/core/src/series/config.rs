//! Text format for series specifications.
//!
//! ```text
//! # comments start with '#'
//! name = L mod 5
//! coefficients = dirichlet-character 5: 0, 1, i, -i, -1
//! exponents = log
//! sigma_c = 0
//! ```
//!
//! `coefficients` is `ones`, `dirichlet-character q: χ(0), ..., χ(q-1)` or
//! `custom: a_1, a_2, ...`. `exponents` is `log`, `scaled-log c` or
//! `custom: λ_1, λ_2, ...`. Complex literals accept `1`, `-i`, `0.5+2i`,
//! `3e-2-1.5i`.

use super::dirichlet::{lambda_additivity_check, multiplicativity_check};
use super::{CoefficientRule, DirichletCharacter, ExponentRule, GeneralDirichletSeries};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;

/// Bound up to which loaded series are validated.
pub const VALIDATION_BOUND: u64 = 10_000;

pub fn parse_complex(text: &str) -> Option<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-')
                && bytes[k - 1] != b'e'
                && bytes[k - 1] != b'E'
            {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().ok()?,
        };
        let re = re.parse::<f64>().ok()?;
        Some(Complex64::new(re, im))
    } else {
        t.parse::<f64>().ok().map(|x| Complex64::new(x, 0.0))
    }
}

fn parse_list<T>(line: usize, text: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    text.split(',')
        .map(|item| {
            f(item.trim()).ok_or_else(|| Error::ParseError {
                line,
                message: format!("cannot parse list item '{}'", item.trim()),
            })
        })
        .collect()
}

/// Parses the key/value text without running the validation checks.
pub fn parse_series_config(text: &str) -> Result<GeneralDirichletSeries> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ParseError {
            line: line_no,
            message: "expected 'key = value'".into(),
        })?;
        let key = key.trim().to_string();
        if entries.contains_key(&key) {
            return Err(Error::ParseError {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
        entries.insert(key, (line_no, value.trim().to_string()));
    }
    let get = |k: &str| {
        entries
            .get(k)
            .cloned()
            .ok_or_else(|| Error::ConfigInvalid(format!("missing key '{k}'")))
    };
    for k in entries.keys() {
        if !["name", "coefficients", "exponents", "sigma_c"].contains(&k.as_str()) {
            return Err(Error::ConfigInvalid(format!("unknown key '{k}'")));
        }
    }

    let (_, name) = get("name")?;
    let (cl, ctext) = get("coefficients")?;
    let coefficients = if ctext == "ones" {
        CoefficientRule::Ones
    } else if let Some(rest) = ctext.strip_prefix("dirichlet-character") {
        let (q, table) = rest.split_once(':').ok_or_else(|| Error::ParseError {
            line: cl,
            message: "expected 'dirichlet-character q: table'".into(),
        })?;
        let q: u64 = q.trim().parse().map_err(|_| Error::ParseError {
            line: cl,
            message: format!("bad modulus '{}'", q.trim()),
        })?;
        let table = parse_list(cl, table, parse_complex)?;
        CoefficientRule::Character(DirichletCharacter::new(q, table)?)
    } else if let Some(rest) = ctext.strip_prefix("custom:") {
        CoefficientRule::Custom(parse_list(cl, rest, parse_complex)?)
    } else {
        return Err(Error::ParseError {
            line: cl,
            message: format!("unknown coefficient rule '{ctext}'"),
        });
    };

    let (el, etext) = get("exponents")?;
    let exponents = if etext == "log" {
        ExponentRule::Log
    } else if let Some(rest) = etext.strip_prefix("scaled-log") {
        let c: f64 = rest.trim().parse().map_err(|_| Error::ParseError {
            line: el,
            message: format!("bad scale '{}'", rest.trim()),
        })?;
        ExponentRule::ScaledLog(c)
    } else if let Some(rest) = etext.strip_prefix("custom:") {
        ExponentRule::Custom(parse_list(el, rest, |x| x.parse::<f64>().ok())?)
    } else {
        return Err(Error::ParseError {
            line: el,
            message: format!("unknown exponent rule '{etext}'"),
        });
    };

    let (sl, stext) = get("sigma_c")?;
    let sigma_c: f64 = stext.parse().map_err(|_| Error::ParseError {
        line: sl,
        message: format!("bad sigma_c '{stext}'"),
    })?;

    Ok(GeneralDirichletSeries {
        name,
        coefficients,
        exponents,
        sigma_c,
    })
}

/// Multiplicativity and exponent-additivity checks up to `n_max`; the first
/// violation is returned as an error.
pub fn validate_series(series: &GeneralDirichletSeries, n_max: u64) -> Result<()> {
    if let Some(&(m, n)) = multiplicativity_check(series, n_max).first() {
        return Err(Error::MultiplicativityViolation { m, n });
    }
    if let Some(&n) = lambda_additivity_check(series, n_max).first() {
        return Err(Error::AdditivityViolation(n));
    }
    if let ExponentRule::Custom(v) = &series.exponents {
        if v.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::ConfigInvalid(
                "exponents must be nondecreasing".into(),
            ));
        }
    }
    Ok(())
}

/// Reads, parses and validates a series file.
pub fn validate_series_config(path: &Path) -> Result<GeneralDirichletSeries> {
    let text = std::fs::read_to_string(path)?;
    let series = parse_series_config(&text)?;
    validate_series(&series, VALIDATION_BOUND)?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1"), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(parse_complex("-i"), Some(Complex64::new(0.0, -1.0)));
        assert_eq!(parse_complex("i"), Some(Complex64::new(0.0, 1.0)));
        assert_eq!(parse_complex("0.5+2i"), Some(Complex64::new(0.5, 2.0)));
        assert_eq!(parse_complex("3e-2-1.5i"), Some(Complex64::new(0.03, -1.5)));
        assert_eq!(parse_complex("1e-3i"), Some(Complex64::new(0.0, 1e-3)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn ones_and_log_accepted() {
        let s =
            parse_series_config("name = zeta\ncoefficients = ones\nexponents = log\nsigma_c = 1\n")
                .unwrap();
        assert!(validate_series(&s, VALIDATION_BOUND).is_ok());
    }

    #[test]
    fn additivity_violation_reported() {
        let mut lambdas: Vec<String> = (1..=12).map(|n| ((n as f64).ln()).to_string()).collect();
        lambdas[5] = "2.0".into(); // λ_6
        let text = format!(
            "name = broken\ncoefficients = ones\nexponents = custom: {}\nsigma_c = 1\n",
            lambdas.join(", ")
        );
        let s = parse_series_config(&text).unwrap();
        assert_eq!(
            validate_series(&s, VALIDATION_BOUND),
            Err(Error::AdditivityViolation(6))
        );
    }

    #[test]
    fn parse_errors_carry_line() {
        let r = parse_series_config("# header\nname = x\ncoefficients = bogus\n");
        assert!(matches!(r, Err(Error::ParseError { line: 3, .. })));
        let r = parse_series_config("name x\n");
        assert!(matches!(r, Err(Error::ParseError { line: 1, .. })));
    }
}
