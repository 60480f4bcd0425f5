//! Convergence reports and their CSV, Markdown and JSON forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use divdiv_core::analysis::{ErrorBundle, NORM_NAMES};

use crate::error::Result;
use crate::study::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorValues {
    pub err_sigma: f64,
    pub err_divdiv: f64,
    pub err_u: f64,
    #[serde(rename = "err_Qu")]
    pub err_qu: f64,
    #[serde(rename = "snorm_Qu")]
    pub snorm_qu: f64,
    pub snorm_post: f64,
}

impl ErrorValues {
    pub fn to_array(&self) -> [f64; 6] {
        [self.err_sigma, self.err_divdiv, self.err_u, self.err_qu, self.snorm_qu, self.snorm_post]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self { err_sigma: a[0], err_divdiv: a[1], err_u: a[2], err_qu: a[3], snorm_qu: a[4], snorm_post: a[5] }
    }

    /// `log2(prev / next)` per norm.
    pub fn rates(prev: &Self, next: &Self) -> Self {
        let (p, n) = (prev.to_array(), next.to_array());
        Self::from_array(std::array::from_fn(|k| (p[k] / n[k]).log2()))
    }
}

impl From<&ErrorBundle> for ErrorValues {
    fn from(e: &ErrorBundle) -> Self {
        Self::from_array(e.values())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub h: f64,
    pub n_triangles: usize,
    pub n_sigma: usize,
    pub n_u: usize,
    pub errors: ErrorValues,
    /// Rates against the previous level; absent on the first one.
    pub rates: Option<ErrorValues>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub level: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: RunConfig,
    pub threads: usize,
    pub levels: Vec<LevelRecord>,
    pub complete: bool,
    pub failure: Option<Failure>,
    pub seconds: f64,
}

/// `printf("%.6e")`: six decimals and an exponent of at least two digits.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

impl ConvergenceReport {
    pub fn last(&self) -> Option<&LevelRecord> {
        self.levels.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h");
        for name in NORM_NAMES {
            let _ = write!(s, ",{name},rate");
        }
        s.push('\n');
        for rec in &self.levels {
            let _ = write!(s, "{},{}", rec.level, sci(rec.h));
            let rates = rec.rates.map(|r| r.to_array());
            for (k, v) in rec.errors.to_array().iter().enumerate() {
                match rates {
                    Some(r) => {
                        let _ = write!(s, ",{},{:.2}", sci(*v), r[k]);
                    }
                    None => {
                        let _ = write!(s, ",{},-", sci(*v));
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("## {:?}, {} levels\n\n| level | h |", self.config.example, self.levels.len());
        for name in NORM_NAMES {
            let _ = write!(s, " {name} | rate |");
        }
        s.push_str("\n|---|---|");
        s.push_str(&"---|---|".repeat(NORM_NAMES.len()));
        s.push('\n');
        for rec in &self.levels {
            let _ = write!(s, "| {} | {} |", rec.level, sci(rec.h));
            let rates = rec.rates.map(|r| r.to_array());
            for (k, v) in rec.errors.to_array().iter().enumerate() {
                let rate = rates.map(|r| format!("{:.2}", r[k])).unwrap_or_else(|| "-".into());
                let _ = write!(s, " {} | {} |", sci(*v), rate);
            }
            s.push('\n');
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(s, "\nIncomplete: level {} failed: {}", f.level, f.message);
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
