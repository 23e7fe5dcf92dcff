//! Input files: one JSON object per job.

use std::path::Path;

use mumford::padic::is_prime;
use mumford::{Mat2, Padic, ProjPoint};
use serde::Deserialize;
use serde_json::Value;

/// Malformed input; the binary exits with 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub p: u32,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub max_m: Option<usize>,
    #[serde(default)]
    pub generators: Option<Vec<[[Value; 2]; 2]>>,
    /// Fixed-point pairs of involutions.
    #[serde(default)]
    pub involutions: Option<Vec<[Value; 2]>>,
    /// Normalized branch values `r_0, …, r_{2g−2}`.
    #[serde(default)]
    pub ramification: Option<Vec<Value>>,
    /// Digits for the inversion.
    #[serde(default)]
    pub d: Option<u32>,
    /// Points to embed.
    #[serde(default)]
    pub points: Option<Vec<Value>>,
    #[serde(default)]
    pub fit_quartic: Option<bool>,
}

fn text(v: &Value) -> Result<String, UsageError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_i64() => Ok(n.to_string()),
        _ => Err(UsageError(format!("expected an integer or a string, got {v}"))),
    }
}

impl JobSpec {
    pub fn load(path: &Path) -> Result<JobSpec, UsageError> {
        let raw = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        let spec: JobSpec = serde_json::from_str(&raw).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        if !is_prime(spec.p as u64) {
            return Err(UsageError(format!("p = {} is not prime", spec.p)));
        }
        if spec.n == Some(0) {
            return Err(UsageError("n must be at least 1".into()));
        }
        Ok(spec)
    }

    /// A rational `"a/b"`, an integer, or a digit string `"(…d)_p"`.
    pub fn scalar(&self, v: &Value, cap: u32) -> Result<Padic, UsageError> {
        let s = text(v)?;
        let parsed = if s.trim_start().starts_with('(') {
            Padic::parse_digits(&s, self.p).map(|x| x.with_cap(cap))
        } else {
            Padic::from_rational_str(&s, self.p, cap)
        };
        parsed.map_err(|e| UsageError(format!("bad number {s:?}: {e}")))
    }

    /// As [`JobSpec::scalar`], with `"inf"` for ∞.
    pub fn point(&self, v: &Value, cap: u32) -> Result<ProjPoint, UsageError> {
        if let Value::String(s) = v {
            if matches!(s.trim(), "inf" | "∞" | "infinity") {
                return Ok(ProjPoint::Infinity);
            }
        }
        Ok(ProjPoint::Finite(self.scalar(v, cap)?))
    }

    pub fn generators(&self, cap: u32) -> Result<Vec<Mat2>, UsageError> {
        let gens = self
            .generators
            .as_ref()
            .ok_or_else(|| UsageError("missing \"generators\"".into()))?;
        if gens.is_empty() {
            return Err(UsageError("\"generators\" is empty".into()));
        }
        gens.iter()
            .map(|m| {
                let e = |r: usize, c: usize| self.scalar(&m[r][c], cap);
                Ok(Mat2::new(e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?))
            })
            .collect()
    }
}
