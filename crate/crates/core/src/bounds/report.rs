use std::collections::BTreeMap;

use serde::Serialize;

use crate::stats::Estimate;

/// Separation, in combined standard errors, required for a strict verdict.
pub const VERDICT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `lhs ≤ rhs − 3σ`.
    Verified,
    /// The two sides overlap within `3σ`.
    Consistent,
    /// `lhs > rhs + 3σ`.
    Violated,
    /// Only the ratio is meaningful (unspecified constants).
    Reported,
    /// The bound's hypotheses failed; nothing is asserted.
    PreconditionViolated,
    /// The right-hand side is infinite.
    Unbounded,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Reported => "reported",
            Verdict::PreconditionViolated => "precondition-violated",
            Verdict::Unbounded => "unbounded",
        }
    }

    /// Outcome for an `lhs ≤ rhs` claim under the `3σ` rule.
    pub fn compare(lhs: &Estimate, rhs: &Estimate) -> Self {
        if rhs.value.is_infinite() && rhs.value > 0.0 {
            return Verdict::Unbounded;
        }
        let sigma = (lhs.std_error.powi(2) + rhs.std_error.powi(2)).sqrt();
        let slack = 1e-12 * lhs.value.abs().max(rhs.value.abs()).max(1.0);
        if lhs.value <= rhs.value - VERDICT_SIGMAS * sigma - slack {
            Verdict::Verified
        } else if lhs.value > rhs.value + VERDICT_SIGMAS * sigma + slack {
            Verdict::Violated
        } else {
            Verdict::Consistent
        }
    }
}

/// Left and right sides of one inequality with a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// `lhs / rhs`.
    pub ratio: f64,
    pub verdict: Verdict,
    /// Parameters that produced the report.
    pub config: BTreeMap<String, String>,
}

impl BoundReport {
    pub fn compare(name: &str, lhs: Estimate, rhs: Estimate) -> Self {
        Self::with_verdict(name, lhs, rhs, Verdict::compare(&lhs, &rhs))
    }

    /// Ratio-only report for a bound with unspecified constants.
    pub fn reported(name: &str, lhs: Estimate, rhs: Estimate) -> Self {
        let v = if rhs.value.is_infinite() { Verdict::Unbounded } else { Verdict::Reported };
        Self::with_verdict(name, lhs, rhs, v)
    }

    pub fn precondition_violated(name: &str, reason: &str) -> Self {
        let nan = Estimate { value: f64::NAN, std_error: f64::NAN };
        let mut r = Self::with_verdict(name, nan, nan, Verdict::PreconditionViolated);
        r.config.insert("reason".into(), reason.to_string());
        r
    }

    fn with_verdict(name: &str, lhs: Estimate, rhs: Estimate, verdict: Verdict) -> Self {
        Self { name: name.to_string(), lhs, rhs, ratio: lhs.value / rhs.value, verdict, config: BTreeMap::new() }
    }

    pub fn with_config(mut self, key: &str, value: impl ToString) -> Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    /// True unless the verdict is a violation.
    pub fn acceptable(&self) -> bool {
        self.verdict != Verdict::Violated
    }
}

/// Unspecified universal constants and numerical knobs.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Constants {
    /// Reverse-Hölder constant for `E|P X|⁴ ≤ c (E|P X|²)²`.
    pub c_borell: f64,
    /// `C` in the split bound `2 v(d) + C n max d_i`.
    pub var_split_c: f64,
    /// `c'` in the symmetric Poincaré estimate.
    pub c_prime: f64,
    /// Cells per slice for the 1D grid eigensolver.
    pub slice_resolution: usize,
    /// Maximum number of batch points at which slice gaps are evaluated.
    pub slice_samples: usize,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c_borell: 3.0, var_split_c: 48.0, c_prime: 1.0, slice_resolution: 256, slice_samples: 4000 }
    }
}

impl Constants {
    /// Apply a `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> crate::Result<()> {
        let bad = || crate::Error::Configuration(format!("constant '{key}': cannot parse '{value}'"));
        match key {
            "c_borell" => self.c_borell = value.parse().map_err(|_| bad())?,
            "var_split_c" => self.var_split_c = value.parse().map_err(|_| bad())?,
            "c_prime" => self.c_prime = value.parse().map_err(|_| bad())?,
            "slice_resolution" => self.slice_resolution = value.parse().map_err(|_| bad())?,
            "slice_samples" => self.slice_samples = value.parse().map_err(|_| bad())?,
            _ => return Err(crate::Error::Configuration(format!("unknown constant '{key}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sigma_rule() {
        let e = |v, s| Estimate { value: v, std_error: s };
        assert_eq!(Verdict::compare(&e(1.0, 0.1), &e(2.0, 0.1)), Verdict::Verified);
        assert_eq!(Verdict::compare(&e(1.0, 0.2), &e(1.5, 0.1)), Verdict::Consistent);
        assert_eq!(Verdict::compare(&e(2.0, 0.1), &e(1.0, 0.1)), Verdict::Violated);
        assert_eq!(Verdict::compare(&e(1.0, 0.0), &e(1.0, 0.0)), Verdict::Consistent);
        assert_eq!(Verdict::compare(&e(1.0, 0.0), &e(f64::INFINITY, 0.0)), Verdict::Unbounded);
    }

    #[test]
    fn constant_overrides() {
        let mut c = Constants::default();
        c.set("c_borell", "2.5").unwrap();
        assert_eq!(c.c_borell, 2.5);
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("c_prime", "x").is_err());
    }
}
