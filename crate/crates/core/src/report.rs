//! Structured pass/fail record of numerical checks.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// Free-form observations (normalisations found, flagged discrepancies).
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a measured error; passes iff `error ≤ tolerance` (NaN fails).
    pub fn record(&mut self, name: impl Into<String>, error: f64, tolerance: f64) -> bool {
        let pass = error <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            max_abs_error: error,
            tolerance,
            status: if pass {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        });
        pass
    }

    pub fn skip(&mut self, name: impl Into<String>, tolerance: f64, reason: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            max_abs_error: f64::NAN,
            tolerance,
            status: CheckStatus::Skipped(reason.into()),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    /// True when no check failed; skipped checks do not count as failures.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Applies one tolerance to every non-skipped check and re-evaluates it.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        for c in &mut self.checks {
            if !matches!(c.status, CheckStatus::Skipped(_)) {
                c.tolerance = tolerance;
                c.status = if c.max_abs_error <= tolerance {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
            }
        }
        self
    }

    /// Writes `check_name,max_abs_error,tolerance,pass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "check_name,max_abs_error,tolerance,pass")?;
        for c in &self.checks {
            let pass = match &c.status {
                CheckStatus::Pass => "true",
                CheckStatus::Fail => "false",
                CheckStatus::Skipped(_) => "skipped",
            };
            writeln!(
                w,
                "{},{:.16e},{:.16e},{}",
                c.name, c.max_abs_error, c.tolerance, pass
            )?;
        }
        Ok(())
    }
}
