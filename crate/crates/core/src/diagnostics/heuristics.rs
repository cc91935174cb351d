//! Finite-N grading rules for asymptotic statements.
//!
//! * Series `Σ t_n`, `t_n ≥ 0`: window sums `W` over dyadic windows
//!   `[N/2^{j+1}, N/2^j)` anchored at the end of the data are fitted against
//!   the window centres `c` on a log-log scale, using the windows that start
//!   at or above `√N` (at least `fit_windows` of them). For `t_n ~ n^{-p}` the
//!   slope is `1 - p`, so `p̂ = 1 - slope` estimates the decay exponent.
//!   The condensed exponent `q̂` is minus the slope of `ln W` against
//!   `ln log₂ c`; it is about 1 for `t_n ~ 1/(n log n)`.
//!   The series is graded summable when `p̂ ≥ summable_exponent` and
//!   `q̂ ≥ summable_exponent`, divergent when `p̂ ≤ divergent_exponent`,
//!   inconclusive otherwise. If the two most recent windows are at the
//!   rounding-noise floor the series is graded summable (eventually zero).
//! * Limits: the tail is the last quarter of `[1, N]`; a limit exists when the
//!   tail oscillation is below `limit_tolerance`, and the limit is the tail mean.
//!   `limsup` is the tail maximum.
//! * `x_n → ∞`: with the lower envelope `m(n) = min_{n ≤ k ≤ N} x_k`, the ratio
//!   `m(N/4) / m(N/64)` must reach `growth_pass` (fails below `growth_fail`).
//! * Boundedness: no new record in the second half beyond `1 + limit_tolerance`
//!   times the first-half supremum (fails at `bounded_factor` times).

use super::verdict::{ConditionVerdict, Evidence, Verdict};
use serde::{Deserialize, Serialize};

/// Tunable thresholds for all checkers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub summable_exponent: f64,
    pub divergent_exponent: f64,
    /// Minimum number of most recent dyadic windows used in the fit.
    pub fit_windows: usize,
    /// Smallest admissible window start.
    pub min_window_start: usize,
    /// Rounding-noise allowance per term, in units of machine epsilon, for
    /// series whose terms are differences of O(1) quantities.
    pub noise_ulps: f64,
    pub limit_tolerance: f64,
    pub growth_pass: f64,
    pub growth_fail: f64,
    pub bounded_factor: f64,
    /// `F_n` is left undefined where `|S_n| / (a_n α_n Ŝ_n)` is below this.
    pub f_exclusion: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            summable_exponent: 1.1,
            divergent_exponent: 1.02,
            fit_windows: 6,
            min_window_start: 8,
            noise_ulps: 64.0,
            limit_tolerance: 1e-3,
            growth_pass: 1.5,
            growth_fail: 1.1,
            bounded_factor: 1.5,
            f_exclusion: 1e-12,
        }
    }
}

impl CheckConfig {
    pub fn noise_per_term(&self) -> f64 {
        self.noise_ulps * f64::EPSILON
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesClass {
    Summable,
    Divergent,
    Unclear,
}

/// Dyadic-window evidence about a nonnegative series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesReport {
    pub class: SeriesClass,
    /// Fitted decay exponent, when enough windows are nonzero.
    pub p_hat: Option<f64>,
    /// Decay exponent of the window sums against `log₂` of the window centre.
    pub q_hat: Option<f64>,
    pub eventually_zero: bool,
    /// `(lo, hi, Σ_{lo ≤ n < hi} t_n)`, most recent window first.
    pub windows: Vec<(usize, usize, f64)>,
    /// Partial sums `Σ_{k ≤ n} t_k` at `n = N/8, N/4, N/2, N`.
    pub checkpoints: Vec<(usize, f64)>,
}

impl SeriesReport {
    fn evidence(&self, criterion: &str) -> Evidence {
        let mut ev = Evidence::new(criterion);
        for &(n, v) in &self.checkpoints {
            ev = ev.checkpoint(n, v);
        }
        if let Some(p) = self.p_hat {
            ev = ev.slope("p_hat", p);
        }
        if let Some(q) = self.q_hat {
            ev = ev.slope("q_hat", q);
        }
        for &(lo, hi, v) in &self.windows {
            ev = ev.window(lo, hi, v);
        }
        if self.eventually_zero {
            ev = ev.note("recent windows at rounding-noise level");
        }
        ev
    }
}

/// Grades `Σ t_n` where `terms[n] = t_n`. `noise` is the per-term size below
/// which a window sum counts as zero (0 for terms computed without cancellation).
pub fn classify_series(terms: &[f64], noise: f64, cfg: &CheckConfig) -> SeriesReport {
    let len = terms.len();
    let mut windows = Vec::new();
    let mut hi = len;
    loop {
        let lo = hi / 2;
        if lo < cfg.min_window_start.max(1) || lo == hi {
            break;
        }
        let sum: f64 = terms[lo..hi].iter().map(|t| t.max(0.0)).sum();
        windows.push((lo, hi, sum));
        hi = lo;
    }

    let mut checkpoints = Vec::new();
    let last = len.saturating_sub(1);
    let marks = [last / 8, last / 4, last / 2, last];
    let mut acc = 0.0;
    let mut next = 0;
    for (n, t) in terms.iter().enumerate() {
        acc += t.max(0.0);
        while next < marks.len() && marks[next] == n {
            checkpoints.push((n, acc));
            next += 1;
        }
    }

    let is_zero = |(lo, hi, s): (usize, usize, f64)| s <= noise * (hi - lo) as f64;
    let eventually_zero = windows.len() >= 2 && windows[..2].iter().all(|w| is_zero(*w));
    if eventually_zero {
        return SeriesReport {
            class: SeriesClass::Summable,
            p_hat: None,
            q_hat: None,
            eventually_zero,
            windows,
            checkpoints,
        };
    }

    let root = (len as f64).sqrt();
    let count = windows
        .iter()
        .filter(|w| w.0 as f64 >= root)
        .count()
        .max(cfg.fit_windows);
    let fitted: Vec<(f64, f64)> = windows
        .iter()
        .take(count)
        .filter(|w| !is_zero(**w))
        .map(|&(lo, hi, s)| ((lo as f64 * hi as f64).sqrt(), s.ln()))
        .collect();
    let (p_hat, q_hat) = if fitted.len() >= 3 {
        let by_n: Vec<(f64, f64)> = fitted.iter().map(|&(c, w)| (c.ln(), w)).collect();
        let by_j: Vec<(f64, f64)> = fitted.iter().map(|&(c, w)| (c.log2().ln(), w)).collect();
        (
            Some(1.0 - least_squares_slope(&by_n)),
            Some(-least_squares_slope(&by_j)),
        )
    } else {
        (None, None)
    };
    let class = match (p_hat, q_hat) {
        (Some(p), Some(q)) if p >= cfg.summable_exponent && q >= cfg.summable_exponent => {
            SeriesClass::Summable
        }
        (Some(p), _) if p <= cfg.divergent_exponent => SeriesClass::Divergent,
        _ => SeriesClass::Unclear,
    };
    SeriesReport {
        class,
        p_hat,
        q_hat,
        eventually_zero,
        windows,
        checkpoints,
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Condition "Σ t_n < ∞".
pub fn summable_condition(
    id: &str,
    what: &str,
    terms: &[f64],
    noise: f64,
    cfg: &CheckConfig,
) -> ConditionVerdict {
    let report = classify_series(terms, noise, cfg);
    let verdict = match report.class {
        SeriesClass::Summable => Verdict::Pass,
        SeriesClass::Divergent => Verdict::Fail,
        SeriesClass::Unclear => Verdict::Inconclusive,
    };
    let criterion = format!(
        "{what} < ∞: pass if p_hat and q_hat ≥ {} or recent windows vanish, fail if p_hat ≤ {}",
        cfg.summable_exponent, cfg.divergent_exponent
    );
    ConditionVerdict::new(id, verdict, report.evidence(&criterion))
}

/// Condition "Σ t_n = ∞".
pub fn divergent_condition(
    id: &str,
    what: &str,
    terms: &[f64],
    cfg: &CheckConfig,
) -> ConditionVerdict {
    let report = classify_series(terms, 0.0, cfg);
    let verdict = match report.class {
        SeriesClass::Divergent => Verdict::Pass,
        SeriesClass::Summable => Verdict::Fail,
        SeriesClass::Unclear => Verdict::Inconclusive,
    };
    let criterion = format!(
        "{what} = ∞: pass if p_hat ≤ {}, fail if p_hat and q_hat ≥ {} or recent windows vanish",
        cfg.divergent_exponent, cfg.summable_exponent
    );
    ConditionVerdict::new(id, verdict, report.evidence(&criterion))
}

/// Condition "x_n → ∞" for `values[n] = x_n`, `n = 0..=N`.
pub fn tends_to_infinity(
    id: &str,
    what: &str,
    values: &[f64],
    cfg: &CheckConfig,
) -> ConditionVerdict {
    let last = values.len() - 1;
    let mut envelope = values.to_vec();
    for n in (0..last).rev() {
        envelope[n] = envelope[n].min(envelope[n + 1]);
    }
    let (lo, hi) = ((last / 64).max(1), (last / 4).max(1));
    let ratio = envelope[hi] / envelope[lo];
    let verdict = if ratio >= cfg.growth_pass {
        Verdict::Pass
    } else if ratio < cfg.growth_fail || ratio.is_nan() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    let criterion = format!(
        "{what} → ∞: lower envelope ratio m(N/4)/m(N/64) ≥ {} passes, < {} fails",
        cfg.growth_pass, cfg.growth_fail
    );
    let mut ev = Evidence::new(criterion).slope("envelope_ratio", ratio);
    for n in [lo, last / 16, hi, last] {
        ev = ev.checkpoint(n, envelope[n]);
    }
    ConditionVerdict::new(id, verdict, ev)
}

/// Tail statistics over the last quarter of `[1, N]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tail {
    pub lo: usize,
    pub hi: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Tail {
    pub fn of(values: &[f64]) -> Tail {
        let last = values.len() - 1;
        let lo = (last - last / 4).max(1).min(last);
        let slice = &values[lo..=last];
        let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
        let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        Tail {
            lo,
            hi: last + 1,
            min,
            max,
            mean,
        }
    }

    pub fn oscillation(&self) -> f64 {
        self.max - self.min
    }

    fn evidence(&self, criterion: String) -> Evidence {
        Evidence::new(criterion)
            .slope("tail_min", self.min)
            .slope("tail_max", self.max)
            .slope("tail_mean", self.mean)
            .slope("tail_oscillation", self.oscillation())
            .window(self.lo, self.hi, self.mean)
    }
}

/// Condition "lim x_n exists"; returns the estimate when it does.
pub fn limit_exists(
    id: &str,
    what: &str,
    values: &[f64],
    cfg: &CheckConfig,
) -> (ConditionVerdict, Option<f64>) {
    let tail = Tail::of(values);
    let exists = tail.oscillation() < cfg.limit_tolerance;
    let criterion = format!(
        "lim {what} exists: tail oscillation < {}",
        cfg.limit_tolerance
    );
    let verdict = if exists { Verdict::Pass } else { Verdict::Fail };
    (
        ConditionVerdict::new(id, verdict, tail.evidence(criterion)),
        exists.then_some(tail.mean),
    )
}

/// Condition "lim x_n = target".
pub fn limit_equals(
    id: &str,
    what: &str,
    values: &[f64],
    target: f64,
    cfg: &CheckConfig,
) -> ConditionVerdict {
    let tail = Tail::of(values);
    let tol = cfg.limit_tolerance;
    let verdict = if tail.oscillation() < tol && (tail.mean - target).abs() < tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let criterion =
        format!("lim {what} = {target}: tail oscillation and |tail mean − {target}| below {tol}");
    ConditionVerdict::new(id, verdict, tail.evidence(criterion))
}

/// Condition "limsup x_n < bound".
pub fn limsup_below(
    id: &str,
    what: &str,
    values: &[f64],
    bound: f64,
    cfg: &CheckConfig,
) -> ConditionVerdict {
    let tail = Tail::of(values);
    let tol = cfg.limit_tolerance;
    let verdict = if tail.max < bound - tol {
        Verdict::Pass
    } else if tail.max >= bound {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    let criterion = format!(
        "limsup {what} < {bound}: tail max < {} passes, ≥ {bound} fails",
        bound - tol
    );
    ConditionVerdict::new(id, verdict, tail.evidence(criterion))
}

/// Condition "sup |x_n| < ∞".
pub fn bounded(id: &str, what: &str, values: &[f64], cfg: &CheckConfig) -> ConditionVerdict {
    let last = values.len() - 1;
    let half = last / 2;
    let sup = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (first, second) = (sup(&values[..half]), sup(&values[half..]));
    let ratio = if second == 0.0 { 0.0 } else { second / first };
    let verdict = if ratio <= 1.0 + cfg.limit_tolerance {
        Verdict::Pass
    } else if ratio >= cfg.bounded_factor || first == 0.0 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    let criterion = format!(
        "{what} bounded: second-half sup ≤ (1 + {}) × first-half sup passes, ≥ {} × fails",
        cfg.limit_tolerance, cfg.bounded_factor
    );
    let ev = Evidence::new(criterion)
        .window(0, half, first)
        .window(half, last + 1, second)
        .slope("sup_ratio", ratio);
    ConditionVerdict::new(id, verdict, ev)
}
