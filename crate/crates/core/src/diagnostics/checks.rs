//! Numerical hypothesis checkers. Each condition is graded by the rules in
//! [`super::heuristics`] from the coefficients `a_0..a_{N+1}`, `b_0..b_{N+1}`.

use super::heuristics::{
    bounded, divergent_condition, limit_equals, limit_exists, limsup_below, summable_condition,
    tends_to_infinity, CheckConfig, Tail,
};
use super::verdict::{CheckReport, ConditionVerdict, Verdict};
use crate::error::{Error, Result};
use crate::sequences::{iterlog_cutoff, iterlog_g, SequencePair, WeightSequence};
use serde::Serialize;

pub const MIN_CHECK_N: usize = 100;

pub const CONCLUSION_A: &str = "σ_p(C) = ∅ and σ(C) = ℝ";
pub const CONCLUSION_42: &str = "σ(C) = ℝ, purely absolutely continuous";

struct Data {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Data {
    fn load(seq: &SequencePair, n: usize) -> Result<Self> {
        if n < MIN_CHECK_N {
            return Err(Error::Precondition(format!(
                "checkers need N ≥ {MIN_CHECK_N}, got {n}"
            )));
        }
        Ok(Data {
            n,
            a: seq.a_prefix(n + 2)?,
            b: seq.b_prefix(n + 2)?,
        })
    }

    /// `f(k)` for `k = 1..=N`, with index 0 copied from index 1.
    fn per_index(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..=self.n)
            .map(|k| if k == 0 { 0.0 } else { f(k) })
            .collect();
        v[0] = v[1];
        v
    }

    /// `f(k)` for `k = 1..=N`, zero at index 0 (series terms).
    fn terms(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..=self.n)
            .map(|k| if k == 0 { 0.0 } else { f(k) })
            .collect()
    }

    fn a_view(&self) -> &[f64] {
        &self.a[..=self.n]
    }

    fn b_over_a(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.b[k].abs() / self.a[k]).collect()
    }

    /// Rounding allowance per term for differences of quantities of size `scale(k)`,
    /// taken as the largest such size over the second half.
    fn noise(&self, cfg: &CheckConfig, scale: impl Fn(usize) -> f64) -> f64 {
        let top = (self.n / 2..=self.n).map(scale).fold(1.0f64, f64::max);
        cfg.noise_per_term() * top
    }
}

fn weights(alpha: &WeightSequence, len: usize) -> Result<Vec<f64>> {
    (0..len).map(|n| alpha.at(n)).collect()
}

/// Theorem A conditions (a)–(g) for the weight sequence `α`.
pub fn check_theorem_a(
    seq: &SequencePair,
    alpha: &WeightSequence,
    n: usize,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let d = Data::load(seq, n)?;
    let al = weights(alpha, n + 2)?;
    let (a, b) = (&d.a, &d.b);
    let ratio = |k: usize| (al[k - 1] / al[k]) * (a[k] / a[k - 1]);
    let b_scale = |k: usize| 1.0 + (b[k].abs() + b[k + 1].abs()) / a[k];

    let cond_b = d.terms(|k| {
        let x = (a[k + 1] / a[k]) * (al[k + 1] / al[k]) - (a[k] / a[k - 1]) * (al[k - 1] / al[k]);
        (-x).max(0.0)
    });
    let cond_c = d.terms(|k| (a[k - 1] / a[k] - al[k - 1] / al[k]).abs() / a[k - 1]);
    let cond_d = d.terms(|k| (b[k + 1] / a[k] - (b[k] / a[k - 1]) * (al[k - 1] / al[k])).abs());
    let cond_e: Vec<f64> = (0..=n).map(|k| 1.0 / (a[k] * al[k])).collect();

    let conditions = vec![
        tends_to_infinity("ThmA.a", "a_n", d.a_view(), cfg),
        summable_condition(
            "ThmA.b",
            "Σ [(a_{n+1}/a_n)(α_{n+1}/α_n) − (a_n/a_{n-1})(α_{n-1}/α_n)]⁻",
            &cond_b,
            d.noise(cfg, ratio),
            cfg,
        ),
        summable_condition(
            "ThmA.c",
            "Σ |a_{n-1}/a_n − α_{n-1}/α_n| / a_{n-1}",
            &cond_c,
            d.noise(cfg, |_| 1.0),
            cfg,
        ),
        summable_condition(
            "ThmA.d",
            "Σ |b_{n+1}/a_n − (b_n/a_{n-1})(α_{n-1}/α_n)|",
            &cond_d,
            d.noise(cfg, b_scale),
            cfg,
        ),
        divergent_condition("ThmA.e", "Σ 1/(a_n α_n)", &cond_e, cfg),
        limit_equals(
            "ThmA.f",
            "(α_{n-1}/α_n)(a_n/a_{n-1})",
            &d.per_index(ratio),
            1.0,
            cfg,
        ),
        limsup_below("ThmA.g", "|b_n|/a_n", &d.b_over_a(), 2.0, cfg),
    ];
    Ok(CheckReport::new(
        "A",
        n,
        Some(alpha.label().to_string()),
        conditions,
        CONCLUSION_A,
    ))
}

/// Corollary B conditions (a)–(e) (Theorem A with `α = a`).
pub fn check_corollary_b(seq: &SequencePair, n: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    let d = Data::load(seq, n)?;
    let (a, b) = (&d.a, &d.b);
    let inv_sq: Vec<f64> = (0..=n).map(|k| 1.0 / (a[k] * a[k])).collect();
    let cond_c = d.terms(|k| (1.0 - (a[k + 1] / a[k]).powi(2)).max(0.0));
    let cond_e = d.terms(|k| (b[k + 1] - b[k]).abs() / a[k]);
    let conditions = vec![
        tends_to_infinity("CorB.a", "a_n", d.a_view(), cfg),
        divergent_condition("CorB.b", "Σ 1/a_n²", &inv_sq, cfg),
        summable_condition(
            "CorB.c",
            "Σ [(a_{n+1}/a_n)² − 1]⁻",
            &cond_c,
            d.noise(cfg, |k| (a[k + 1] / a[k]).powi(2)),
            cfg,
        ),
        limsup_below("CorB.d", "|b_n|/a_n", &d.b_over_a(), 2.0, cfg),
        summable_condition(
            "CorB.e",
            "Σ |b_{n+1} − b_n|/a_n",
            &cond_e,
            d.noise(cfg, |k| (b[k].abs() + b[k + 1].abs()) / a[k]),
            cfg,
        ),
    ];
    Ok(CheckReport::new(
        "B",
        n,
        Some("a".into()),
        conditions,
        CONCLUSION_A,
    ))
}

/// Corollary C verdicts plus the estimate of `M` and the ratio trace
/// `a_n²/(b_n b_{n+1})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryCReport {
    #[serde(flatten)]
    pub report: CheckReport,
    /// Tail mean of `a_{n-1} − b_n + a_n`, when the tail has converged.
    pub m_estimate: Option<f64>,
    /// Tail oscillation of `a_{n-1} − b_n + a_n`.
    pub m_dispersion: f64,
    /// `a_N²/(b_N b_{N+1})`, when defined.
    pub ratio_at_n: Option<f64>,
    /// Number of indices `n ≤ N` where `b_n b_{n+1} ≤ 0`.
    pub ratio_undefined: usize,
    /// `a_n²/(b_n b_{n+1})` for `n = 0..=N`; `None` where `b_n b_{n+1} ≤ 0`.
    #[serde(skip)]
    pub ratio: Vec<Option<f64>>,
}

/// `a_n²/(b_n b_{n+1})`, undefined when `b_n b_{n+1} ≤ 0`.
pub fn chihara_ratio(seq: &SequencePair, n: usize) -> Result<Option<f64>> {
    let denom = seq.b(n)? * seq.b(n + 1)?;
    (denom > 0.0)
        .then(|| seq.a(n).map(|a| a * a / denom))
        .transpose()
}

/// Corollary C conditions (a)–(d).
pub fn check_corollary_c(
    seq: &SequencePair,
    n: usize,
    cfg: &CheckConfig,
) -> Result<CorollaryCReport> {
    let d = Data::load(seq, n)?;
    let (a, b) = (&d.a, &d.b);
    let inv: Vec<f64> = (0..=n).map(|k| 1.0 / a[k]).collect();
    let cond_c = d.terms(|k| (1.0 - a[k + 1] / a[k]).max(0.0));
    let shift = d.per_index(|k| a[k - 1] - b[k] + a[k]);
    let (mut cond_d, m_estimate) = limit_exists("CorC.d", "(a_{n-1} − b_n + a_n)", &shift, cfg);
    let tail = Tail::of(&shift);
    if let Some(m) = m_estimate {
        cond_d.evidence = cond_d.evidence.slope("M", m);
    }

    let ratio: Vec<Option<f64>> = (0..=n)
        .map(|k| {
            let denom = b[k] * b[k + 1];
            (denom > 0.0).then(|| a[k] * a[k] / denom)
        })
        .collect();
    let ratio_undefined = ratio.iter().filter(|r| r.is_none()).count();
    let ratio_at_n = ratio[n];

    let conditions = vec![
        tends_to_infinity("CorC.a", "a_n", d.a_view(), cfg),
        divergent_condition("CorC.b", "Σ 1/a_n", &inv, cfg),
        summable_condition(
            "CorC.c",
            "Σ [a_{n+1}/a_n − 1]⁻",
            &cond_c,
            d.noise(cfg, |k| a[k + 1] / a[k]),
            cfg,
        ),
        cond_d,
    ];
    let conclusion = match m_estimate {
        Some(m) => format!("σ_ess(C) = [−M, ∞) with M ≈ {m}"),
        None => String::new(),
    };
    let report = CheckReport::new("C", n, None, conditions, conclusion);
    Ok(CorollaryCReport {
        report,
        m_estimate,
        m_dispersion: tail.oscillation(),
        ratio_at_n,
        ratio_undefined,
        ratio,
    })
}

/// Theorem 4.2 conditions with `α ≡ 1`; (c) is split into the three
/// bounded-variation statements c1: `a_{n-1}/a_n`, c2: `1/a_n`, c3: `b_n/a_n`.
/// (d) is graded as `limsup |b_n|/a_n < 2`.
pub fn check_theorem_42(seq: &SequencePair, n: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    let d = Data::load(seq, n)?;
    let (a, b) = (&d.a, &d.b);
    let inv: Vec<f64> = (0..=n).map(|k| 1.0 / a[k]).collect();
    let variation = |x: &dyn Fn(usize) -> f64| d.terms(|k| (x(k + 1) - x(k)).abs());
    let ratio = |k: usize| a[k - 1] / a[k];
    let inv_a = |k: usize| 1.0 / a[k];
    let b_over_a = |k: usize| b[k] / a[k];
    let conditions = vec![
        tends_to_infinity("Thm42.a", "a_n", d.a_view(), cfg),
        divergent_condition("Thm42.b", "Σ 1/a_n", &inv, cfg),
        summable_condition(
            "Thm42.c1",
            "Σ |Δ(a_{n-1}/a_n)|",
            &variation(&ratio),
            d.noise(cfg, ratio),
            cfg,
        ),
        summable_condition(
            "Thm42.c2",
            "Σ |Δ(1/a_n)|",
            &variation(&inv_a),
            d.noise(cfg, inv_a),
            cfg,
        ),
        summable_condition(
            "Thm42.c3",
            "Σ |Δ(b_n/a_n)|",
            &variation(&b_over_a),
            d.noise(cfg, |k| b_over_a(k).abs()),
            cfg,
        ),
        limsup_below("Thm42.d", "|b_n|/a_n", &d.b_over_a(), 2.0, cfg),
    ];
    Ok(CheckReport::new(
        "4.2",
        n,
        Some("one".into()),
        conditions,
        CONCLUSION_42,
    ))
}

/// Theorem 4.3 conditions for level `K`. (b) reconstructs the smallest
/// admissible `c_n` (the excess of `a_n/a_{n-1}` outside the envelope for
/// `n` above the cutoff) and grades its summability; (c) is split into
/// c1: `b` bounded and c2: `Σ |b_{n+1} − b_n|/a_n < ∞`.
pub fn check_theorem_43(
    seq: &SequencePair,
    k: u32,
    n: usize,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let d = Data::load(seq, n)?;
    let (a, b) = (&d.a, &d.b);
    let cutoff = iterlog_cutoff(k);
    let mut excess = vec![0.0; n + 1];
    for m in (cutoff + 1).max(1)..=n {
        let x = m as f64;
        let mut upper = 1.0 + 1.0 / x;
        for j in 1..=k {
            upper += 1.0 / (x * iterlog_g(j, x)?);
        }
        let q = a[m] / a[m - 1];
        excess[m] = (1.0 - q).max(q - upper).max(0.0);
    }
    let cond_c2 = d.terms(|m| (b[m + 1] - b[m]).abs() / a[m]);
    let cond_d = d.terms(|m| 1.0 / (m as f64 * a[m]));
    let conditions = vec![
        tends_to_infinity("Thm43.a", "a_n", d.a_view(), cfg),
        summable_condition(
            "Thm43.b",
            &format!("Σ c_n with 1 − c_n ≤ a_n/a_{{n-1}} ≤ 1 + 1/n + Σ_{{j≤{k}}} 1/(n g_j(n)) + c_n for n > {cutoff}"),
            &excess,
            d.noise(cfg, |m| 1.0 + a[m] / a[m - 1].max(f64::MIN_POSITIVE)),
            cfg,
        ),
        bounded("Thm43.c1", "b_n", &b[..=n], cfg),
        summable_condition(
            "Thm43.c2",
            "Σ |b_{n+1} − b_n|/a_n",
            &cond_c2,
            d.noise(cfg, |m| (b[m].abs() + b[m + 1].abs()) / a[m]),
            cfg,
        ),
        summable_condition("Thm43.d", "Σ 1/(n a_n)", &cond_d, 0.0, cfg),
    ];
    Ok(CheckReport::new(
        "4.3",
        n,
        Some(format!("iterlog:{k}")),
        conditions,
        CONCLUSION_A,
    ))
}

/// Summable variation of the weighted ratio, `Σ |(a_{n+1}/a_n)(α_{n+1}/α_n) − (a_n/a_{n-1})(α_{n-1}/α_n)| < ∞`.
/// Together with the hypotheses of Theorem A it keeps `a_nα_n Ŝ_n` between two positive constants.
pub fn check_ratio_variation(
    seq: &SequencePair,
    alpha: &WeightSequence,
    n: usize,
    cfg: &CheckConfig,
) -> Result<ConditionVerdict> {
    let d = Data::load(seq, n)?;
    let al = weights(alpha, n + 2)?;
    let a = &d.a;
    let terms = d.terms(|k| {
        ((a[k + 1] / a[k]) * (al[k + 1] / al[k]) - (a[k] / a[k - 1]) * (al[k - 1] / al[k])).abs()
    });
    let noise = d.noise(cfg, |k| (a[k] / a[k - 1]) * (al[k - 1] / al[k]));
    Ok(summable_condition(
        "Ratio.bv",
        "Σ |(a_{n+1}/a_n)(α_{n+1}/α_n) − (a_n/a_{n-1})(α_{n-1}/α_n)|",
        &terms,
        noise,
        cfg,
    ))
}

/// Overall verdict of a list of conditions.
pub fn overall(conditions: &[ConditionVerdict]) -> Verdict {
    Verdict::all(conditions.iter().map(|c| c.verdict))
}
