use serde::Serialize;

use crate::format::fmt_f64;

/// How `lhs` and `rhs` are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `lhs <= rhs + tol`
    AtMost,
    /// `lhs >= rhs - tol`
    AtLeast,
    /// `|lhs - rhs| <= tol`
    Equal,
}

/// Outcome of one numerical check.
///
/// `slack` is the margin in the passing direction: `rhs - lhs` for
/// [`Orientation::AtMost`], `lhs - rhs` for [`Orientation::AtLeast`] and
/// `-|lhs - rhs|` for [`Orientation::Equal`]. A check passes iff
/// `slack >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub orientation: Orientation,
    pub tolerance: f64,
    pub pass: bool,
    pub context: Vec<(String, String)>,
}

impl BoundReport {
    pub fn new(
        label: impl Into<String>,
        lhs: f64,
        rhs: f64,
        orientation: Orientation,
        tolerance: f64,
    ) -> Self {
        let slack = match orientation {
            Orientation::AtMost => rhs - lhs,
            Orientation::AtLeast => lhs - rhs,
            Orientation::Equal => -(lhs - rhs).abs(),
        };
        BoundReport {
            label: label.into(),
            lhs,
            rhs,
            slack,
            orientation,
            tolerance,
            pass: slack >= -tolerance,
            context: Vec::new(),
        }
    }

    pub fn at_most(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(label, lhs, rhs, Orientation::AtMost, tolerance)
    }

    pub fn at_least(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(label, lhs, rhs, Orientation::AtLeast, tolerance)
    }

    pub fn equal(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(label, lhs, rhs, Orientation::Equal, tolerance)
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.context.push((key.into(), value.to_string()));
        self
    }

    pub fn with_f64(self, key: impl Into<String>, value: f64) -> Self {
        self.with(key, fmt_f64(value))
    }

    pub fn context_value(&self, key: &str) -> Option<&str> {
        self.context
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Folds many reports into one: passes iff all pass, keeps the tightest.
    pub fn worst_of(
        label: impl Into<String>,
        reports: impl IntoIterator<Item = BoundReport>,
    ) -> Option<BoundReport> {
        let mut count = 0usize;
        let mut failures = 0usize;
        let mut worst: Option<BoundReport> = None;
        for r in reports {
            count += 1;
            if !r.pass {
                failures += 1;
            }
            let tighter = worst.as_ref().is_none_or(|w| r.slack < w.slack);
            if tighter {
                worst = Some(r);
            }
        }
        worst.map(|mut w| {
            let inner = std::mem::replace(&mut w.label, label.into());
            w.pass = failures == 0;
            w.context.push(("worst_case".into(), inner));
            w.context.push(("checks".into(), count.to_string()));
            w.context.push(("failures".into(), failures.to_string()));
            w
        })
    }

    pub const CSV_HEADER: &'static str = "label,lhs,rhs,slack,pass,parameters";

    /// One CSV line (no newline). Parameters are `key=value` joined by `;`.
    pub fn to_csv_row(&self) -> String {
        let params = self
            .context
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{}",
            csv_field(&self.label),
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            fmt_f64(self.slack),
            self.pass,
            csv_field(&params)
        )
    }

    /// Flat JSON record with `parameters` as an object.
    pub fn to_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> = self
            .context
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::json!({
            "label": self.label,
            "lhs": fmt_f64(self.lhs),
            "rhs": fmt_f64(self.rhs),
            "slack": fmt_f64(self.slack),
            "orientation": self.orientation,
            "tolerance": fmt_f64(self.tolerance),
            "pass": self.pass,
            "parameters": params,
        })
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
