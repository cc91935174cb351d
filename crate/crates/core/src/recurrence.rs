//! Generalized eigenvectors and orthonormal polynomials by the three-term
//! recurrence
//!
//! ```text
//! a_n u_{n+1} = (λ - b_n) u_n - a_{n-1} u_{n-1}
//! ```
//!
//! Solutions grow or decay like `exp(c n)` for generic `λ`, so the pair
//! `(u_n, u_{n+1})` is stored normalized to unit length together with the
//! natural log of its true magnitude. All downstream diagnostics only need
//! scale-free ratios, and anything that does need magnitudes works in
//! log space.

use std::io::Write;

use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::sequences::SequencePair;

/// Initial pair `(u_0, u_1) ≠ (0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigvecInit {
    u0: f64,
    u1: f64,
}

impl EigvecInit {
    pub fn new(u0: f64, u1: f64) -> Result<Self> {
        if !(u0.is_finite() && u1.is_finite()) {
            return Err(Error::domain("initial values must be finite"));
        }
        if u0 == 0.0 && u1 == 0.0 {
            return Err(Error::domain("initial pair must not be (0, 0)"));
        }
        Ok(EigvecInit { u0, u1 })
    }

    /// `(p_0, p_1) = (1, (λ - b_0)/a_0)`.
    pub fn polynomial(seq: &SequencePair, lambda: f64) -> Result<Self> {
        EigvecInit::new(1.0, (lambda - seq.b(0)?) / seq.a(0)?)
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }
}

/// A real number stored as sign and `ln|v|`, with exact zero tracked by the
/// sign rather than by `ln 0 = -∞` arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    /// -1, 0 or 1.
    pub sign: i8,
    /// `ln|v|`; `-∞` when `sign == 0`.
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    /// The value `v · exp(log_scale)`.
    pub fn from_scaled(v: f64, log_scale: f64) -> Self {
        if v == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: if v < 0.0 { -1 } else { 1 },
                ln_abs: v.abs().ln() + log_scale,
            }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        SignedLog::from_scaled(v, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Plain value, possibly `±∞` or a flushed zero when out of range.
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_abs.exp()
        }
    }

    /// Plain value when it is a normal binary64 number (or exactly zero).
    pub fn representable(&self) -> Option<f64> {
        let v = self.value();
        (v == 0.0 && self.sign == 0 || v.is_normal()).then_some(v)
    }
}

/// Normalized pair `(x, y) = (u_n, u_{n+1}) / exp(log_scale)` with
/// `x² + y² = 1`.
///
/// Internally the pair is also kept unnormalized in double-double precision,
/// rescaled by exact powers of two, so that quantities with heavy cancellation
/// (such as the commutator forms) can be evaluated from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationState {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub log_scale: f64,
    wide: WidePair,
}

/// `(u_n, u_{n+1}) = (x, y) · 2^exp2` with `max(|x|, |y|) ∈ [1, 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct WidePair {
    pub x: TwoFloat,
    pub y: TwoFloat,
    pub exp2: i32,
}

impl WidePair {
    fn new(x: TwoFloat, y: TwoFloat, exp2: i32) -> Option<Self> {
        let m = x.hi().abs().max(y.hi().abs());
        if !(m.is_finite() && m > 0.0) {
            return None;
        }
        let k = binary_exponent(m);
        let s = pow2(-k)?;
        Some(WidePair {
            x: x * s,
            y: y * s,
            exp2: exp2.checked_add(k)?,
        })
    }

    /// `(u_n, u_{n+1})` as a normalized f64 pair plus `ln` of its magnitude.
    fn normalized(&self) -> (f64, f64, f64) {
        let (x, y) = (f64::from(self.x), f64::from(self.y));
        let r = x.hypot(y);
        (
            x / r,
            y / r,
            r.ln() + f64::from(self.exp2) * std::f64::consts::LN_2,
        )
    }

    /// The first component rescaled to `2^exp2`.
    pub fn x_at(&self, exp2: i32) -> TwoFloat {
        scale_pow2(self.x, self.exp2 - exp2)
    }
}

fn binary_exponent(m: f64) -> i32 {
    let (_, e) = frexp(m);
    e - 1
}

/// Mantissa in `[0.5, 1)` and exponent, for finite positive normal or subnormal `m`.
fn frexp(m: f64) -> (f64, i32) {
    let bits = m.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i32;
    if raw == 0 {
        let (f, e) = frexp(m * 2f64.powi(64));
        (f, e - 64)
    } else {
        (
            f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52)),
            raw - 1022,
        )
    }
}

fn pow2(k: i32) -> Option<f64> {
    (-1022..=1023)
        .contains(&k)
        .then(|| f64::from_bits(((k + 1023) as u64) << 52))
}

fn scale_pow2(v: TwoFloat, k: i32) -> TwoFloat {
    let mut v = v;
    let mut k = k;
    while k != 0 {
        let step = k.clamp(-1000, 1000);
        v *= pow2(step).expect("step within range");
        k -= step;
    }
    v
}

impl PropagationState {
    fn from_wide(n: usize, wide: WidePair) -> Self {
        let (x, y, log_scale) = wide.normalized();
        PropagationState {
            n,
            x,
            y,
            log_scale,
            wide,
        }
    }

    pub fn u(&self) -> SignedLog {
        SignedLog::from_scaled(self.x, self.log_scale)
    }

    pub fn u_next(&self) -> SignedLog {
        SignedLog::from_scaled(self.y, self.log_scale)
    }

    /// `ln(u_n² + u_{n+1}²)`.
    pub fn ln_pair_norm_sq(&self) -> f64 {
        2.0 * self.log_scale
    }

    pub(crate) fn wide(&self) -> &WidePair {
        &self.wide
    }
}

/// Unbounded stream of propagation states for `n = 0, 1, 2, …`.
///
/// Coefficients are fetched only when the next state is requested; after an
/// error the stream ends.
#[derive(Clone, Debug)]
pub struct Propagator {
    seq: SequencePair,
    lambda: f64,
    first: Option<PropagationState>,
    last: Option<PropagationState>,
}

impl Propagator {
    pub fn new(seq: &SequencePair, lambda: f64, init: EigvecInit) -> Self {
        let wide = WidePair::new(TwoFloat::from(init.u0), TwoFloat::from(init.u1), 0)
            .expect("initial pair is finite and nonzero");
        Propagator {
            seq: seq.clone(),
            lambda,
            first: Some(PropagationState::from_wide(0, wide)),
            last: None,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn step(&self, s: &PropagationState) -> Result<PropagationState> {
        let n = s.n;
        let a_n = self.seq.a(n)?;
        let a_next = self.seq.a(n + 1)?;
        let b_next = self.seq.b(n + 1)?;
        let w = &s.wide;
        let z = (TwoFloat::new_sub(self.lambda, b_next) * w.y - w.x * a_n) / a_next;
        let wide = WidePair::new(w.y, z, w.exp2)
            .ok_or_else(|| Error::domain(format!("recurrence lost scale at n = {}", n + 1)))?;
        Ok(PropagationState::from_wide(n + 1, wide))
    }
}

impl Iterator for Propagator {
    type Item = Result<PropagationState>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(first) = self.first.take() {
            self.last = Some(first);
            return Some(Ok(first));
        }
        let last = self.last.take()?;
        match self.step(&last) {
            Ok(s) => {
                self.last = Some(s);
                Some(Ok(s))
            }
            Err(e) => Some(Err(e)),
        }
    }
}

/// States `n = 0..=n_max`, i.e. the values `u_0..u_{n_max+1}`.
pub fn propagate(
    seq: &SequencePair,
    lambda: f64,
    init: EigvecInit,
    n_max: usize,
) -> Result<Vec<PropagationState>> {
    Propagator::new(seq, lambda, init).take(n_max + 1).collect()
}

/// `u_0..u_{last+1}` from a run of states starting at `n = 0`.
pub fn eigvec_values(states: &[PropagationState]) -> Vec<SignedLog> {
    let mut out: Vec<SignedLog> = states.iter().map(PropagationState::u).collect();
    if let Some(last) = states.last() {
        out.push(last.u_next());
    }
    out
}

/// Orthonormal polynomial values `p_0(λ)..p_N(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTrace {
    pub lambda: f64,
    pub values: Vec<SignedLog>,
}

impl PolyTrace {
    /// Highest index `N` in the trace.
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<SignedLog> {
        self.values.get(n).copied()
    }
}

/// Evaluates `p_0(λ)..p_N(λ)` with `p_{-1} = 0`, `p_0 = 1`.
pub fn poly_eval(seq: &SequencePair, lambda: f64, n: usize) -> Result<PolyTrace> {
    if n == 0 {
        return Ok(PolyTrace {
            lambda,
            values: vec![SignedLog::from_f64(1.0)],
        });
    }
    let init = EigvecInit::polynomial(seq, lambda)?;
    let states = propagate(seq, lambda, init, n - 1)?;
    Ok(PolyTrace {
        lambda,
        values: eigvec_values(&states),
    })
}

/// Partial sums `Σ_{n≤m} u_n²` kept as natural logs (`-∞` while all terms
/// are zero).
#[derive(Clone, Debug, PartialEq)]
pub struct LogPartialSums {
    pub ln_sums: Vec<f64>,
}

impl LogPartialSums {
    pub fn len(&self) -> usize {
        self.ln_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_sums.is_empty()
    }

    /// `Σ_{n≤m} u_n²` as a plain number (may overflow to `∞`).
    pub fn value(&self, m: usize) -> f64 {
        self.ln_sums[m].exp()
    }

    /// `Σ_{m1<n≤m2} u_n²`, computed from the logs.
    pub fn increment(&self, m1: usize, m2: usize) -> f64 {
        let (lo, hi) = (self.ln_sums[m1], self.ln_sums[m2]);
        if lo == f64::NEG_INFINITY {
            return hi.exp();
        }
        // hi >= lo by construction
        lo.exp() * (hi - lo).exp_m1()
    }
}

/// Log-sum-exp accumulation of `u_0², …, u_{terms-1}²`. The result is
/// nondecreasing exactly: each update adds a nonnegative quantity to the
/// larger of the two logs.
pub fn l2_partial_sums(values: &[SignedLog], terms: usize) -> Result<LogPartialSums> {
    if values.len() < terms {
        return Err(Error::Precondition(format!(
            "trace has {} values, {terms} terms requested",
            values.len()
        )));
    }
    let mut acc = f64::NEG_INFINITY;
    let mut ln_sums = Vec::with_capacity(terms);
    for v in &values[..terms] {
        if !v.is_zero() {
            acc = log_add(acc, 2.0 * v.ln_abs);
        }
        ln_sums.push(acc);
    }
    Ok(LogPartialSums { ln_sums })
}

/// `ln(e^p + e^q)`.
pub(crate) fn log_add(p: f64, q: f64) -> f64 {
    let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Writes `n,sign_u,log_abs_u,u_if_representable`.
pub fn write_trace_csv<W: Write>(out: W, values: &[SignedLog]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "sign_u", "log_abs_u", "u_if_representable"])?;
    for (n, v) in values.iter().enumerate() {
        let rep = v.representable().map(format_f64).unwrap_or_default();
        w.write_record([n.to_string(), v.sign.to_string(), format_f64(v.ln_abs), rep])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::catalog::from_text;
    use proptest::prelude::*;

    /// Plain recurrence without rescaling; test oracle.
    fn naive(seq: &SequencePair, lambda: f64, u0: f64, u1: f64, count: usize) -> Vec<f64> {
        let mut u = vec![u0, u1];
        for n in 1..count - 1 {
            let a_prev = seq.a(n - 1).unwrap();
            let next =
                ((lambda - seq.b(n).unwrap()) * u[n] - a_prev * u[n - 1]) / seq.a(n).unwrap();
            u.push(next);
        }
        u
    }

    fn plain(values: &[SignedLog]) -> Vec<f64> {
        values.iter().map(SignedLog::value).collect()
    }

    #[test]
    fn const_family_period_four() {
        let seq = from_text("const").unwrap();
        let states = propagate(&seq, 0.0, EigvecInit::new(0.0, 1.0).unwrap(), 6).unwrap();
        let u = plain(&eigvec_values(&states));
        let expected = [0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0];
        for (got, want) in u.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(eigvec_values(&states)[2].is_zero());
    }

    #[test]
    fn const_family_linear_growth() {
        let seq = from_text("const").unwrap();
        let states = propagate(&seq, 2.0, EigvecInit::new(1.0, 2.0).unwrap(), 50).unwrap();
        for (n, v) in eigvec_values(&states).iter().enumerate() {
            assert!((v.value() - (n + 1) as f64).abs() < 1e-12 * (n + 1) as f64);
        }
    }

    #[test]
    fn linear_a_third_value() {
        let seq = from_text("pow:alpha=1").unwrap();
        let states = propagate(&seq, 0.0, EigvecInit::new(1.0, 0.0).unwrap(), 1).unwrap();
        let u = plain(&eigvec_values(&states));
        assert_eq!(u.len(), 3);
        assert!((u[2] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn polynomial_examples() {
        let seq = from_text("const").unwrap();
        let p = poly_eval(&seq, 0.0, 8).unwrap();
        let want = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0];
        for (got, w) in plain(&p.values).iter().zip(want) {
            assert!((got - w).abs() < 1e-15);
        }
        assert!(p.values[1].is_zero() && p.values[3].is_zero());

        let p = poly_eval(&seq, 2.0, 20).unwrap();
        for (n, v) in p.values.iter().enumerate() {
            assert!((v.value() - (n + 1) as f64).abs() < 1e-12 * (n + 1) as f64);
        }

        let seq = from_text("pow:alpha=1").unwrap();
        let p = poly_eval(&seq, 0.0, 2).unwrap();
        assert!((p.values[2].value() + 0.5).abs() < 1e-15);
        assert_eq!(
            poly_eval(&seq, 0.3, 0).unwrap().values,
            vec![SignedLog::from_f64(1.0)]
        );
    }

    #[test]
    fn const_partial_sums() {
        let seq = from_text("const").unwrap();
        let p = poly_eval(&seq, 0.0, 10).unwrap();
        let sums = l2_partial_sums(&p.values, 8).unwrap();
        assert_eq!(sums.len(), 8);
        assert!((sums.value(7) - 4.0).abs() < 1e-14);
        assert!((sums.increment(3, 7) - 2.0).abs() < 1e-14);
        assert!(l2_partial_sums(&p.values, 12).is_err());
    }

    #[test]
    fn huge_values_stay_finite_in_log_space() {
        // far outside the spectrum the solution grows geometrically
        let seq = from_text("const").unwrap();
        let p = poly_eval(&seq, 50.0, 5_000).unwrap();
        let last = p.values[5_000];
        assert!(last.ln_abs.is_finite() && last.ln_abs > 1e4);
        assert!(last.representable().is_none());
        let sums = l2_partial_sums(&p.values, 5_001).unwrap();
        assert!(sums.ln_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(sums.ln_sums[5_000].is_finite());
    }

    #[test]
    fn zero_init_rejected() {
        assert!(EigvecInit::new(0.0, 0.0).is_err());
        assert!(EigvecInit::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn table_exhaustion_is_reported() {
        let seq = SequencePair::from_table(vec![1.0, 1.0], vec![0.0; 3]).unwrap();
        let init = EigvecInit::new(1.0, 0.0).unwrap();
        assert_eq!(propagate(&seq, 0.0, init, 1).unwrap().len(), 2);
        assert!(matches!(
            propagate(&seq, 0.0, init, 2),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn trace_csv_layout() {
        let values = vec![
            SignedLog::from_f64(1.0),
            SignedLog::ZERO,
            SignedLog::from_f64(-0.5),
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &values).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,sign_u,log_abs_u,u_if_representable");
        assert_eq!(lines[1], "0,1,0.0000000000000000e0,1.0000000000000000e0");
        assert_eq!(lines[2], "1,0,-inf,0.0000000000000000e0");
        assert!(lines[3].starts_with("2,-1,"));
    }

    const CATALOG: &[&str] = &[
        "pow:alpha=0.5",
        "pow:alpha=1",
        "pow-shifted:alpha=0.5",
        "paired:eps=1,inner=pow,alpha=0.5",
        "factorial-staircase",
        "iterlog:K=1,M=16",
        "chihara",
        "const",
    ];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn states_stay_normalized(idx in 0..CATALOG.len(), lambda in -5.0f64..5.0, t in 0.0f64..std::f64::consts::TAU) {
            let seq = from_text(CATALOG[idx]).unwrap();
            let init = EigvecInit::new(t.cos(), t.sin()).unwrap();
            for s in Propagator::new(&seq, lambda, init).take(400) {
                let s = s.unwrap();
                prop_assert!((s.x * s.x + s.y * s.y - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn matches_naive_recurrence(idx in 0..CATALOG.len(), lambda in -5.0f64..5.0, t in 0.0f64..std::f64::consts::TAU) {
            let seq = from_text(CATALOG[idx]).unwrap();
            let (u0, u1) = (t.cos(), t.sin());
            let states = propagate(&seq, lambda, EigvecInit::new(u0, u1).unwrap(), 199).unwrap();
            let scaled = eigvec_values(&states);
            let direct = naive(&seq, lambda, u0, u1, 201);
            for n in 0..200 {
                // error relative to the local magnitude of the solution pair
                let scale = direct[n].hypot(direct[n + 1]);
                prop_assume!(scale.is_finite());
                prop_assert!((scaled[n].value() - direct[n]).abs() <= 1e-10 * scale,
                    "n = {}: {} vs {}", n, scaled[n].value(), direct[n]);
            }
        }

        #[test]
        fn partial_sums_nondecreasing(idx in 0..CATALOG.len(), lambda in -5.0f64..5.0) {
            let seq = from_text(CATALOG[idx]).unwrap();
            let p = poly_eval(&seq, lambda, 300).unwrap();
            let sums = l2_partial_sums(&p.values, 301).unwrap();
            prop_assert!(sums.ln_sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
