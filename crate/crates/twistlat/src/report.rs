//! Check records shared by every verification battery.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub paper_anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, max_residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            paper_anchor: anchor.into(),
            max_residual,
            tolerance,
            // NaN never passes
            pass: max_residual <= tolerance,
        }
    }

    /// Boolean check recorded as residual 0 or 1.
    pub fn flag(name: impl Into<String>, anchor: impl Into<String>, ok: bool) -> Check {
        Check::new(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
