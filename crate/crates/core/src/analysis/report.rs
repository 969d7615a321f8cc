//! Condition verdicts with the evidence that produced them.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnGrid,
    /// A concrete counterexample: the point and how far the inequality misses there.
    FailsAt { x: f64, margin: f64 },
    NotApplicable,
}

/// How far a verdict reaches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// Exact parameter test on a closed-form family.
    Exact,
    /// Checked on a finite grid over the whole half-line.
    OnGrid,
    /// Checked on a one-sided window toward 0 or ∞.
    OnWindow,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub grid: String,
    pub points: usize,
    /// Location and value of the smallest margin seen.
    pub worst_x: Option<f64>,
    pub worst_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub scope: Scope,
    pub witnesses: BTreeMap<String, f64>,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub clauses: Vec<ConditionReport>,
}

impl ConditionReport {
    pub fn new(condition: impl Into<String>, verdict: Verdict, scope: Scope) -> Self {
        ConditionReport {
            condition: condition.into(),
            verdict,
            scope,
            witnesses: BTreeMap::new(),
            evidence: Evidence::default(),
            note: None,
            clauses: Vec::new(),
        }
    }

    pub fn holds(condition: impl Into<String>, scope: Scope) -> Self {
        Self::new(condition, Verdict::HoldsOnGrid, scope)
    }

    pub fn fails(condition: impl Into<String>, x: f64, margin: f64, scope: Scope) -> Self {
        Self::new(condition, Verdict::FailsAt { x, margin }, scope)
    }

    pub fn not_applicable(condition: impl Into<String>, note: impl Into<String>) -> Self {
        Self::new(condition, Verdict::NotApplicable, Scope::Exact).with_note(note)
    }

    /// A verdict from a grid scan of margins, where the condition is `margin ≥ 0` at every point.
    pub fn from_margins(
        condition: impl Into<String>,
        scope: Scope,
        grid: impl Into<String>,
        margins: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        let mut worst: Option<(f64, f64)> = None;
        let mut points = 0;
        for (x, m) in margins {
            points += 1;
            // NaN margins count as failures at that point.
            let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
            if worst.is_none_or(|(_, w)| m < w) {
                worst = Some((x, m));
            }
        }
        let verdict = match worst {
            Some((x, m)) if m < 0.0 => Verdict::FailsAt { x, margin: m },
            _ => Verdict::HoldsOnGrid,
        };
        let mut r = Self::new(condition, verdict, scope);
        r.evidence = Evidence {
            grid: grid.into(),
            points,
            worst_x: worst.map(|w| w.0),
            worst_margin: worst.map(|w| w.1),
        };
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_witness(mut self, name: &str, value: f64) -> Self {
        self.witnesses.insert(name.to_string(), value);
        self
    }

    pub fn with_clauses(mut self, clauses: Vec<ConditionReport>) -> Self {
        self.clauses = clauses;
        self
    }

    pub fn is_holding(&self) -> bool {
        self.verdict == Verdict::HoldsOnGrid
    }

    pub fn is_failing(&self) -> bool {
        matches!(self.verdict, Verdict::FailsAt { .. })
    }

    /// Clause lookup by name, for nested reports.
    pub fn clause(&self, name: &str) -> Option<&ConditionReport> {
        self.clauses.iter().find(|c| c.condition == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_pick_the_worst_point() {
        let r = ConditionReport::from_margins("c", Scope::OnGrid, "g", vec![(1.0, 0.5), (2.0, -0.1), (3.0, -0.3)]);
        assert_eq!(r.verdict, Verdict::FailsAt { x: 3.0, margin: -0.3 });
        let ok = ConditionReport::from_margins("c", Scope::OnGrid, "g", vec![(1.0, 0.0)]);
        assert!(ok.is_holding());
    }

    #[test]
    fn serializes_flat_verdict() {
        let r = ConditionReport::fails("c", 1.0, -2.0, Scope::OnWindow);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "fails-at");
        assert_eq!(v["margin"], -2.0);
        assert_eq!(v["scope"], "on-window");
    }
}
