//! JSON form of harmonic fields. Exact coefficients are "num/den" strings; decimal floats are
//! accepted only when reading into a floating-point field.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CrError, Result};
use crate::harmonic::{valid_index, HarmonicField};
use crate::scalar::{format_rational, parse_rational, rational_to_f64, GaussianRational};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldJson {
    pub truncation: u32,
    pub coefficients: Vec<CoeffJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffJson {
    pub p: u32,
    pub q: u32,
    pub m: i32,
    #[serde(default = "zero_str")]
    pub re: String,
    #[serde(default = "zero_str")]
    pub im: String,
}

fn zero_str() -> String {
    "0".into()
}

fn parse_json(text: &str) -> Result<FieldJson> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
        CrError::Parse(format!("line {}, column {}: {msg}", e.line(), e.column()))
    })
}

fn check_indices(f: &FieldJson) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (k, c) in f.coefficients.iter().enumerate() {
        if !valid_index(c.p, c.q, c.m) {
            return Err(CrError::Invalid(format!(
                "coefficient {k}: m = {} outside [-{}, {}]",
                c.m, c.q, c.p
            )));
        }
        if c.p + c.q > f.truncation {
            return Err(CrError::Invalid(format!(
                "coefficient {k}: degree {} exceeds truncation {}",
                c.p + c.q,
                f.truncation
            )));
        }
        if !seen.insert((c.p, c.q, c.m)) {
            return Err(CrError::Invalid(format!(
                "coefficient {k}: duplicate index ({},{},{})",
                c.p, c.q, c.m
            )));
        }
    }
    Ok(())
}

fn parse_float(s: &str, k: usize) -> Result<f64> {
    if let Ok(r) = parse_rational(s) {
        return Ok(rational_to_f64(&r));
    }
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CrError::Parse(format!("coefficient {k}: cannot read {s:?}")))?;
    if !v.is_finite() {
        return Err(CrError::Parse(format!(
            "coefficient {k}: non-finite value {s:?}"
        )));
    }
    Ok(v)
}

/// Reads an exact field; floats are rejected.
pub fn field_from_json(text: &str) -> Result<HarmonicField<GaussianRational>> {
    let f = parse_json(text)?;
    check_indices(&f)?;
    let mut out = HarmonicField::zero(f.truncation);
    for (k, c) in f.coefficients.iter().enumerate() {
        let re = parse_rational(&c.re)
            .map_err(|e| CrError::Parse(format!("coefficient {k} re: {e}")))?;
        let im = parse_rational(&c.im)
            .map_err(|e| CrError::Parse(format!("coefficient {k} im: {e}")))?;
        out.set(c.p, c.q, c.m, GaussianRational::new(re, im));
    }
    Ok(out)
}

/// Reads a floating-point field; rationals and decimals both accepted.
pub fn field_from_json_f64(text: &str) -> Result<HarmonicField<Complex64>> {
    let f = parse_json(text)?;
    check_indices(&f)?;
    let mut out = HarmonicField::zero(f.truncation);
    for (k, c) in f.coefficients.iter().enumerate() {
        out.set(
            c.p,
            c.q,
            c.m,
            Complex64::new(parse_float(&c.re, k)?, parse_float(&c.im, k)?),
        );
    }
    Ok(out)
}

pub fn field_to_json(u: &HarmonicField<GaussianRational>) -> FieldJson {
    FieldJson {
        truncation: u.truncation,
        coefficients: u
            .iter()
            .map(|((p, q, m), c)| CoeffJson {
                p,
                q,
                m,
                re: format_rational(&c.re),
                im: format_rational(&c.im),
            })
            .collect(),
    }
}

pub fn field_to_json_f64(u: &HarmonicField<Complex64>) -> FieldJson {
    FieldJson {
        truncation: u.truncation,
        coefficients: u
            .iter()
            .map(|((p, q, m), c)| CoeffJson {
                p,
                q,
                m,
                re: format!("{:e}", c.re),
                im: format!("{:e}", c.im),
            })
            .collect(),
    }
}
