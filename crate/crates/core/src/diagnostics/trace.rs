//! The commutator sequence `S_n` along a generalized eigenvector.

use super::heuristics::CheckConfig;
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::recurrence::{propagate, EigvecInit};
use crate::sequences::{SequencePair, WeightSequence};
use serde::Serialize;
use std::io::Write;
use std::ops::Range;
use twofloat::TwoFloat;

/// One row of a [`DiagnosticsTrace`]; all `S` values are divided by
/// `Ŝ_n = u_n² + u_{n+1}²`, which makes them independent of the solution scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    /// `a_n α_n`.
    pub a_alpha: f64,
    /// `S_n / Ŝ_n` from the form in `(u_n, u_{n+1})`.
    pub s_over_shat: f64,
    /// `S_n / Ŝ_n` from the form in `(u_{n-1}, u_n)`.
    pub s_over_shat_alt: f64,
    /// `ln Ŝ_n`.
    pub ln_shat: f64,
    /// `F_n = (S_{n+1} − S_n)/S_n`; `None` where `S_n` is numerically zero.
    pub f: Option<f64>,
    /// `Σ_{1 ≤ k ≤ n} F_k⁻` over defined `F_k`.
    pub sum_f_minus: f64,
    /// `Σ_{0 ≤ k ≤ n} 1/(a_k α_k)`.
    pub sum_inv_a_alpha: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl TraceRow {
    /// `S_n / (a_n α_n Ŝ_n)`.
    pub fn normalized(&self) -> f64 {
        self.s_over_shat / self.a_alpha
    }

    /// Raw `S_n`, when representable.
    pub fn s_raw(&self) -> Option<f64> {
        let v = self.s_over_shat * self.ln_shat.exp();
        v.is_finite().then_some(v)
    }
}

/// `S_n`, `F_n` and the bounds `w_min ≤ S_n/Ŝ_n ≤ w_max` for `n = 1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsTrace {
    pub lambda: f64,
    pub weight: String,
    pub rows: Vec<TraceRow>,
    /// Indices where `F_n` was left undefined.
    pub exclusions: usize,
}

impl DiagnosticsTrace {
    pub fn n_max(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, n: usize) -> Option<&TraceRow> {
        n.checked_sub(1).and_then(|i| self.rows.get(i))
    }

    /// CSV with columns `n,S_over_Shat,F,sumFminus,sum_inv_a_alpha,wmin,wmax`;
    /// undefined `F` is written as `NaN`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "S_over_Shat",
            "F",
            "sumFminus",
            "sum_inv_a_alpha",
            "wmin",
            "wmax",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format_f64(r.s_over_shat),
                format_f64(r.f.unwrap_or(f64::NAN)),
                format_f64(r.sum_f_minus),
                format_f64(r.sum_inv_a_alpha),
                format_f64(r.w_min),
                format_f64(r.w_max),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Coeffs {
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: Vec<f64>,
}

impl Coeffs {
    fn load(seq: &SequencePair, alpha: &WeightSequence, len: usize) -> Result<Self> {
        Ok(Coeffs {
            a: seq.a_prefix(len)?,
            b: seq.b_prefix(len)?,
            alpha: (0..len).map(|n| alpha.at(n)).collect::<Result<_>>()?,
        })
    }
}

/// `w_min`, `w_max`: extremal values of `S_n` on `Ŝ_n = 1`.
///
/// With `r = (α_{n-1}/α_n)(a_n/a_{n-1})` and `t = r(λ − b_n)/a_n`,
/// `2w/(a_n α_n) = 1 + r ∓ √((1 − r)² + t²)`. The smaller root is taken as
/// `det / w_max` to avoid cancellation.
pub fn w_bounds(
    seq: &SequencePair,
    alpha: &WeightSequence,
    lambda: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Precondition("w_bounds needs n ≥ 1".into()));
    }
    Ok(w_bounds_from(
        seq.a(n - 1)?,
        alpha.at(n - 1)?,
        seq.a(n)?,
        alpha.at(n)?,
        seq.b(n)?,
        lambda,
    ))
}

pub(crate) fn w_bounds_from(
    a_prev: f64,
    al_prev: f64,
    a: f64,
    al: f64,
    b: f64,
    lambda: f64,
) -> (f64, f64) {
    let aa = a * al;
    let r = (al_prev / al) * (a / a_prev);
    let t = r * (lambda - b) / a;
    let w_max = 0.5 * aa * (1.0 + r + (1.0 - r).hypot(t));
    let det = aa * aa * (r - 0.25 * t * t);
    (det / w_max, w_max)
}

/// Propagates the eigenvector `u` at `λ` and evaluates the commutator
/// diagnostics for `n = 1..=N`.
pub fn s_sequence(
    seq: &SequencePair,
    alpha: &WeightSequence,
    lambda: f64,
    init: EigvecInit,
    n_max: usize,
) -> Result<DiagnosticsTrace> {
    s_sequence_with(seq, alpha, lambda, init, n_max, &CheckConfig::default())
}

pub fn s_sequence_with(
    seq: &SequencePair,
    alpha: &WeightSequence,
    lambda: f64,
    init: EigvecInit,
    n_max: usize,
    cfg: &CheckConfig,
) -> Result<DiagnosticsTrace> {
    if n_max < 2 {
        return Err(Error::Precondition(format!(
            "s_sequence needs N ≥ 2, got {n_max}"
        )));
    }
    let states = propagate(seq, lambda, init, n_max)?;
    let c = Coeffs::load(seq, alpha, n_max + 2)?;
    let (a, b, al) = (&c.a, &c.b, &c.alpha);

    let mut rows = Vec::with_capacity(n_max);
    let mut sum_f_minus = 0.0;
    let mut sum_inv = 1.0 / (a[0] * al[0]);
    let mut exclusions = 0;
    for n in 1..=n_max {
        let s = &states[n];
        let w = s.wide();
        let (x, y) = (w.x, w.y);
        let um = states[n - 1].wide().x_at(w.exp2);
        let shat = x * x + y * y;
        let shift = TwoFloat::new_sub(lambda, b[n]);
        let shift_next = TwoFloat::new_sub(lambda, b[n + 1]);
        let aa = a[n] * al[n];
        let aa_w = TwoFloat::new_mul(a[n], al[n]);
        let k = TwoFloat::new_div(al[n - 1], a[n - 1]);

        let s1 = um * um * TwoFloat::new_mul(a[n - 1], al[n - 1]) + x * x * aa_w
            - shift * um * x * al[n - 1];
        let k_a2 = k * a[n] * a[n];
        let s2 = y * y * k_a2 + x * x * aa_w - k * a[n] * shift * y * x;
        let diff = (TwoFloat::new_mul(a[n + 1], al[n + 1]) - k_a2) * y * y
            + (k * a[n] * shift - shift_next * al[n]) * y * x;

        let s1 = f64::from(s1 / shat);
        let s2_w = s2;
        let s2 = f64::from(s2 / shat);
        let f = if (s2 / aa).abs() < cfg.f_exclusion {
            exclusions += 1;
            None
        } else {
            let f = f64::from(diff / s2_w);
            sum_f_minus += (-f).max(0.0);
            Some(f)
        };
        sum_inv += 1.0 / aa;
        let (w_min, w_max) = w_bounds_from(a[n - 1], al[n - 1], a[n], al[n], b[n], lambda);
        rows.push(TraceRow {
            n,
            a_alpha: aa,
            s_over_shat: s2,
            s_over_shat_alt: s1,
            ln_shat: s.ln_pair_norm_sq(),
            f,
            sum_f_minus,
            sum_inv_a_alpha: sum_inv,
            w_min,
            w_max,
        });
    }
    Ok(DiagnosticsTrace {
        lambda,
        weight: alpha.label().to_string(),
        rows,
        exclusions,
    })
}

/// Tail summary used as evidence for `liminf S_n > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiminfEstimate {
    pub window: Range<usize>,
    /// `min S_n / (a_n α_n Ŝ_n)` over the window.
    pub min_normalized: f64,
    /// `min S_n` over the window, if every raw value is representable.
    pub min_raw: Option<f64>,
    /// `Σ F_n⁻` over defined `F_n` in the window.
    pub sum_f_minus: f64,
    /// Indices in the window where `F_n` was undefined.
    pub exclusions: usize,
}

/// Summarizes `n ∈ window` (half-open) of a trace.
pub fn liminf_estimate(trace: &DiagnosticsTrace, window: Range<usize>) -> Result<LiminfEstimate> {
    if window.is_empty() || window.start == 0 {
        return Err(Error::Precondition(format!("invalid window {window:?}")));
    }
    if window.end > trace.n_max() + 1 {
        return Err(Error::OutOfRange {
            index: window.end - 1,
            len: trace.n_max() + 1,
        });
    }
    let rows = &trace.rows[window.start - 1..window.end - 1];
    let min_normalized = rows
        .iter()
        .map(TraceRow::normalized)
        .fold(f64::INFINITY, f64::min);
    let min_raw = rows
        .iter()
        .map(TraceRow::s_raw)
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)));
    let sum_f_minus = rows.iter().filter_map(|r| r.f).map(|f| (-f).max(0.0)).sum();
    let exclusions = rows.iter().filter(|r| r.f.is_none()).count();
    Ok(LiminfEstimate {
        window,
        min_normalized,
        min_raw,
        sum_f_minus,
        exclusions,
    })
}
