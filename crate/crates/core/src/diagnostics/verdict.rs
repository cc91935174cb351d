//! Verdicts and the evidence attached to them.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: any fail wins, then any inconclusive, else pass.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut out = Verdict::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// A named value at index `n` (partial sums, envelope values, …).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub value: f64,
}

/// A fitted or derived scalar (decay exponent, growth ratio, oscillation, …).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub name: String,
    pub value: f64,
}

/// Aggregate over the index range `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// The numeric rule that produced the verdict.
    pub criterion: String,
    pub checkpoints: Vec<Checkpoint>,
    pub slopes: Vec<Slope>,
    pub windows: Vec<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Evidence {
    pub fn new(criterion: impl Into<String>) -> Self {
        Evidence {
            criterion: criterion.into(),
            ..Default::default()
        }
    }

    pub fn checkpoint(mut self, n: usize, value: f64) -> Self {
        self.checkpoints.push(Checkpoint { n, value });
        self
    }

    pub fn slope(mut self, name: impl Into<String>, value: f64) -> Self {
        self.slopes.push(Slope {
            name: name.into(),
            value,
        });
        self
    }

    pub fn window(mut self, lo: usize, hi: usize, value: f64) -> Self {
        self.windows.push(Window { lo, hi, value });
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn find_slope(&self, name: &str) -> Option<f64> {
        self.slopes.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    /// e.g. `ThmA.b`.
    pub condition: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl ConditionVerdict {
    pub fn new(condition: impl Into<String>, verdict: Verdict, evidence: Evidence) -> Self {
        ConditionVerdict {
            condition: condition.into(),
            verdict,
            evidence,
        }
    }
}

/// Result of one hypothesis checker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub theorem: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    pub overall: Verdict,
    pub conditions: Vec<ConditionVerdict>,
    /// Predicted spectral conclusion, present only when every condition passes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
}

impl CheckReport {
    pub(crate) fn new(
        theorem: &str,
        n: usize,
        weight: Option<String>,
        conditions: Vec<ConditionVerdict>,
        conclusion: impl Into<String>,
    ) -> Self {
        let overall = Verdict::all(conditions.iter().map(|c| c.verdict));
        let conclusion = (overall == Verdict::Pass).then(|| conclusion.into());
        CheckReport {
            theorem: theorem.to_string(),
            n,
            weight,
            overall,
            conditions,
            conclusion,
        }
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionVerdict> {
        self.conditions.iter().find(|c| c.condition == id)
    }

    /// Verdict of the condition whose id ends in `.{suffix}`.
    pub fn verdict_of(&self, suffix: &str) -> Option<Verdict> {
        self.conditions
            .iter()
            .find(|c| {
                c.condition
                    .rsplit_once('.')
                    .is_some_and(|(_, s)| s == suffix)
            })
            .map(|c| c.verdict)
    }

    /// Conditions that did not pass.
    pub fn failing(&self) -> impl Iterator<Item = &ConditionVerdict> {
        self.conditions
            .iter()
            .filter(|c| c.verdict != Verdict::Pass)
    }
}
