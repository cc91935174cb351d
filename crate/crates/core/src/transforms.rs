//! Structural transformations of Jacobi matrices.
//!
//! * [`flip`]: `(a, b) ↦ (a, -b)`. Conjugation by `diag((-1)^n)` turns `C`
//!   into `-Ĉ`, so `σ(C) = -σ(Ĉ)` and `p̂_n(λ) = (-1)^n p_n(-λ)`.
//! * [`square_even`], [`square_odd`]: when `b ≡ 0`, `C²` splits into the
//!   even and odd coordinate subspaces, and each block is again a Jacobi matrix:
//!
//!   ```text
//!   a_n^e = a_{2n} a_{2n+1},    b_n^e = a_{2n-1}² + a_{2n}²
//!   a_n^o = a_{2n+1} a_{2n+2},  b_n^o = a_{2n}² + a_{2n+1}²
//!   ```
//!
//!   with `a_{-1} = 0`, so `b_0^e = a_0²`. The even block satisfies
//!   `p_{2n}(x) = p_n^e(x²)`.
//! * [`bd_to_jacobi`]: the birth–death generator `Q` is similar, through
//!   `P = diag(√π_n)`, to the Jacobi matrix with `ā_n = √(λ_n μ_{n+1})` and
//!   `b̄_n = -(λ_n + μ_n)`.
//!
//! The odd block is the even block of the shifted sequence `a_1, a_2, ..`
//! in every entry except `b_0`: `b_0^o = a_0² + a_1²` while the shifted even
//! block has `a_1²`. The two differ by the rank-one term `a_0² e_0 e_0ᵀ`.
//!
//! # Birth–death rates
//!
//! Rates are read from CSV (columns `n,lambda,mu`) or from the text form
//!
//! ```text
//! bd:lam=<shape>,mu=<shape>[,lam_scale=c][,mu_scale=c][,lam_pow=p][,mu_pow=p][,mu0=m]
//! ```
//!
//! (the `bd:` prefix is optional). Shapes:
//!
//! | shape       | `λ_n`             | `μ_n` (n ≥ 1) |
//! |-------------|-------------------|---------------|
//! | `linear`    | `n + 1`           | `n`           |
//! | `quadratic` | `(n + 1)²`        | `n²`          |
//! | `pow`       | `(n + 1)^lam_pow` | `n^mu_pow`    |
//! | number `c`  | `c`               | `c`           |
//!
//! Each rate is multiplied by its `_scale` (default 1). `μ_0` is `mu0`
//! (default 0).

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::heuristics::{
    divergent_condition, summable_condition, tends_to_infinity, CheckConfig,
};
use crate::diagnostics::{CheckReport, MIN_CHECK_N};
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::sequences::{Coefficients, FamilySpec, ParamValue, SequencePair};

pub const CONCLUSION_51: &str = "σ(Q) = (−∞, 0]";

/// Number of leading diagonal entries checked eagerly by the restrictions.
const ZERO_DIAGONAL_PRECHECK: usize = 64;

#[derive(Debug)]
struct Flipped(SequencePair);

impl Coefficients for Flipped {
    fn off_diagonal(&self, n: usize) -> Result<f64> {
        self.0.a(n)
    }

    fn diagonal(&self, n: usize) -> Result<f64> {
        Ok(-self.0.b(n)?)
    }
}

/// `(a, -b)`.
pub fn flip(seq: &SequencePair) -> SequencePair {
    SequencePair::new(Flipped(seq.clone()))
}

#[derive(Debug)]
struct Shifted(SequencePair);

impl Coefficients for Shifted {
    fn off_diagonal(&self, n: usize) -> Result<f64> {
        self.0.a(n + 1)
    }

    fn diagonal(&self, n: usize) -> Result<f64> {
        self.0.b(n + 1)
    }
}

/// Drops the first row and column: `(a_{n+1}, b_{n+1})`.
pub fn shift(seq: &SequencePair) -> SequencePair {
    SequencePair::new(Shifted(seq.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug)]
struct Restriction {
    seq: SequencePair,
    parity: Parity,
}

impl Restriction {
    fn zero_b(&self, n: usize) -> Result<()> {
        let v = self.seq.b(n)?;
        if v != 0.0 {
            return Err(Error::Precondition(format!(
                "{} restriction needs b ≡ 0, but b_{n} = {v}",
                self.parity
            )));
        }
        Ok(())
    }

    /// Offset of the first underlying index: 0 for even, 1 for odd.
    fn offset(&self) -> usize {
        match self.parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl Coefficients for Restriction {
    fn off_diagonal(&self, n: usize) -> Result<f64> {
        let i = 2 * n + self.offset();
        self.zero_b(i)?;
        self.zero_b(i + 1)?;
        Ok(self.seq.a(i)? * self.seq.a(i + 1)?)
    }

    fn diagonal(&self, n: usize) -> Result<f64> {
        let i = 2 * n + self.offset();
        self.zero_b(i)?;
        let before = self.seq.a_prev(i)?;
        let at = self.seq.a(i)?;
        Ok(before * before + at * at)
    }
}

fn restriction(seq: &SequencePair, parity: Parity) -> Result<SequencePair> {
    let r = Restriction {
        seq: seq.clone(),
        parity,
    };
    for n in 0..ZERO_DIAGONAL_PRECHECK {
        match r.zero_b(n) {
            Ok(()) => {}
            Err(Error::OutOfRange { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(SequencePair::new(r))
}

/// Even block of `C²`. Requires `b ≡ 0`: the first entries are checked
/// immediately, later ones whenever a coefficient that depends on them is read.
pub fn square_even(seq: &SequencePair) -> Result<SequencePair> {
    restriction(seq, Parity::Even)
}

/// Odd block of `C²`, with the same precondition as [`square_even`].
pub fn square_odd(seq: &SequencePair) -> Result<SequencePair> {
    restriction(seq, Parity::Odd)
}

type RateFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Birth rates `λ_n > 0` and death rates `μ_n` with `μ_0 ≥ 0`, `μ_n > 0`
/// for `n ≥ 1`.
#[derive(Clone)]
pub struct BirthDeathRates {
    label: String,
    lambda: RateFn,
    mu: RateFn,
    len: Option<usize>,
}

impl fmt::Debug for BirthDeathRates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BirthDeathRates")
            .field("label", &self.label)
            .field("len", &self.len)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    Linear,
    Quadratic,
    Pow,
    Constant(f64),
}

impl BirthDeathRates {
    pub fn from_fn<L, M>(label: impl Into<String>, lambda: L, mu: M) -> Self
    where
        L: Fn(usize) -> f64 + Send + Sync + 'static,
        M: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        BirthDeathRates {
            label: label.into(),
            lambda: Arc::new(lambda),
            mu: Arc::new(mu),
            len: None,
        }
    }

    /// Finite tables of equal length.
    pub fn from_table(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if lambda.len() != mu.len() {
            return Err(Error::Precondition(format!(
                "rate tables differ in length ({} vs {})",
                lambda.len(),
                mu.len()
            )));
        }
        let len = lambda.len();
        let rates = BirthDeathRates {
            label: "table".into(),
            lambda: Arc::new(move |n| lambda[n]),
            mu: Arc::new(move |n| mu[n]),
            len: Some(len),
        };
        for n in 0..len {
            rates.lambda(n)?;
            rates.mu(n)?;
        }
        Ok(rates)
    }

    /// CSV with header `n,lambda,mu`, rows in index order from 0.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Row {
            n: usize,
            lambda: f64,
            mu: f64,
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let (mut lambda, mut mu) = (Vec::new(), Vec::new());
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.n != i {
                return Err(Error::domain(format!("rate row {i} has index {}", row.n)));
            }
            lambda.push(row.lambda);
            mu.push(row.mu);
        }
        let mut rates = Self::from_table(lambda, mu)?;
        rates.label = path.as_ref().display().to_string();
        Ok(rates)
    }

    /// Parses the `bd:lam=..,mu=..` text form described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.strip_prefix("bd:").unwrap_or(text);
        let spec = FamilySpec::parse_syntax(&format!("bd:{body}"))?;
        const KEYS: [&str; 7] = [
            "lam",
            "mu",
            "lam_scale",
            "mu_scale",
            "lam_pow",
            "mu_pow",
            "mu0",
        ];
        if let Some((k, _)) = spec
            .params
            .iter()
            .find(|(k, _)| !KEYS.contains(&k.as_str()))
        {
            return Err(Error::UnexpectedParameter {
                family: "bd".into(),
                key: k.clone(),
            });
        }
        let shape = |key: &str| -> Result<Shape> {
            let v = spec.get(key).ok_or_else(|| Error::MissingParameter {
                family: "bd".into(),
                key: key.into(),
            })?;
            match v {
                ParamValue::Word(w) => match w.as_str() {
                    "linear" => Ok(Shape::Linear),
                    "quadratic" => Ok(Shape::Quadratic),
                    "pow" => Ok(Shape::Pow),
                    other => Err(Error::domain(format!("unknown rate shape `{other}`"))),
                },
                number => Ok(Shape::Constant(number.as_f64().expect("numeric"))),
            }
        };
        let number = |key: &str, default: Option<f64>| -> Result<f64> {
            match spec.get(key) {
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::domain(format!("`{key}` must be a number"))),
                None => default.ok_or_else(|| Error::MissingParameter {
                    family: "bd".into(),
                    key: key.into(),
                }),
            }
        };
        let (lam_shape, mu_shape) = (shape("lam")?, shape("mu")?);
        let lam_pow = if lam_shape == Shape::Pow {
            number("lam_pow", None)?
        } else {
            0.0
        };
        let mu_pow = if mu_shape == Shape::Pow {
            number("mu_pow", None)?
        } else {
            0.0
        };
        let (lam_scale, mu_scale) = (
            number("lam_scale", Some(1.0))?,
            number("mu_scale", Some(1.0))?,
        );
        let mu0 = number("mu0", Some(0.0))?;
        let base = |shape: Shape, pow: f64, x: f64| match shape {
            Shape::Linear => x,
            Shape::Quadratic => x * x,
            Shape::Pow => x.powf(pow),
            Shape::Constant(c) => c,
        };
        let rates = BirthDeathRates {
            label: spec.render(),
            lambda: Arc::new(move |n| lam_scale * base(lam_shape, lam_pow, n as f64 + 1.0)),
            mu: Arc::new(move |n| {
                if n == 0 {
                    mu0
                } else {
                    mu_scale * base(mu_shape, mu_pow, n as f64)
                }
            }),
            len: None,
        };
        rates.lambda(0)?;
        rates.mu(0)?;
        rates.mu(1)?;
        Ok(rates)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn check_index(&self, n: usize) -> Result<()> {
        match self.len {
            Some(len) if n >= len => Err(Error::OutOfRange { index: n, len }),
            _ => Ok(()),
        }
    }

    /// Birth rate `λ_n`.
    pub fn lambda(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let v = (self.lambda)(n);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!(
                "birth rate λ_{n} = {v} is not positive"
            )))
        }
    }

    /// Death rate `μ_n`.
    pub fn mu(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let v = (self.mu)(n);
        let ok = v.is_finite() && if n == 0 { v >= 0.0 } else { v > 0.0 };
        if ok {
            Ok(v)
        } else {
            Err(Error::domain(format!(
                "death rate μ_{n} = {v} is out of range"
            )))
        }
    }

    /// `a = (μ_1, λ_1, μ_2, λ_2, ..)`.
    pub fn interleaved(&self, n: usize) -> Result<f64> {
        let k = n / 2 + 1;
        if n % 2 == 0 {
            self.mu(k)
        } else {
            self.lambda(k)
        }
    }
}

/// Stationary weights `π_0 = 1`, `π_n = λ_0⋯λ_{n-1} / (μ_1⋯μ_n)`, kept as
/// natural logarithms.
#[derive(Clone, Debug)]
pub struct PiWeights {
    rates: BirthDeathRates,
}

impl PiWeights {
    /// `ln π_0..ln π_{len-1}`.
    pub fn ln_prefix(&self, len: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(len);
        let mut acc = 0.0;
        for n in 0..len {
            if n > 0 {
                acc += self.ln_ratio(n - 1)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn ln_pi(&self, n: usize) -> Result<f64> {
        Ok(self.ln_prefix(n + 1)?[n])
    }

    /// `ln(π_{n+1}/π_n) = ln λ_n − ln μ_{n+1}`.
    pub fn ln_ratio(&self, n: usize) -> Result<f64> {
        Ok(self.rates.lambda(n)?.ln() - self.rates.mu(n + 1)?.ln())
    }
}

#[derive(Debug)]
struct BdJacobi(BirthDeathRates);

impl Coefficients for BdJacobi {
    fn off_diagonal(&self, n: usize) -> Result<f64> {
        Ok(self.0.lambda(n)?.sqrt() * self.0.mu(n + 1)?.sqrt())
    }

    fn diagonal(&self, n: usize) -> Result<f64> {
        Ok(-(self.0.lambda(n)? + self.0.mu(n)?))
    }
}

/// `(ā, b̄)` with `ā_n = √(λ_n μ_{n+1})`, `b̄_n = −(λ_n + μ_n)`, and `π`.
pub fn bd_to_jacobi(rates: &BirthDeathRates) -> (SequencePair, PiWeights) {
    (
        SequencePair::new(BdJacobi(rates.clone())),
        PiWeights {
            rates: rates.clone(),
        },
    )
}

#[derive(Debug)]
struct RootSource {
    rates: BirthDeathRates,
    parity: Parity,
}

impl Coefficients for RootSource {
    fn off_diagonal(&self, n: usize) -> Result<f64> {
        // even: (√λ_0, √μ_1, √λ_1, ..); odd: (√μ_0, √λ_0, √μ_1, ..)
        let m = match self.parity {
            Parity::Even => n + 1,
            Parity::Odd => n,
        };
        let k = m / 2;
        let v = if m % 2 == 0 {
            self.rates.mu(k)?
        } else {
            self.rates.lambda(k)?
        };
        Ok(v.sqrt())
    }

    fn diagonal(&self, _: usize) -> Result<f64> {
        Ok(0.0)
    }
}

/// How the flipped matrix `−C̄` arises as a block of a square.
#[derive(Clone, Debug)]
pub struct BdRoute {
    pub parity: Parity,
    /// `ã` with `b̃ ≡ 0`, whose `parity` block of `C̃²` is `−C̄`.
    pub source: SequencePair,
    pub explanation: &'static str,
}

/// Even block of `ã = (√λ_0, √μ_1, √λ_1, ..)` when `μ_0 = 0`, odd block of
/// `ã = (√μ_0, √λ_0, √μ_1, ..)` when `μ_0 > 0`.
pub fn bd_route(rates: &BirthDeathRates) -> Result<BdRoute> {
    let (parity, explanation) = if rates.mu(0)? == 0.0 {
        (
            Parity::Even,
            "μ_0 = 0: −C̄ is the even block of C̃² for ã = (√λ_0, √μ_1, √λ_1, √μ_2, ...)",
        )
    } else {
        (
            Parity::Odd,
            "μ_0 > 0: −C̄ is the odd block of C̃² for ã = (√μ_0, √λ_0, √μ_1, √λ_1, ...)",
        )
    };
    let source = SequencePair::new(RootSource {
        rates: rates.clone(),
        parity,
    });
    Ok(BdRoute {
        parity,
        source,
        explanation,
    })
}

impl BdRoute {
    /// The block itself, equal to `flip(C̄)`.
    pub fn block(&self) -> Result<SequencePair> {
        match self.parity {
            Parity::Even => square_even(&self.source),
            Parity::Odd => square_odd(&self.source),
        }
    }
}

/// One row of a birth–death conversion table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BdRow {
    pub n: usize,
    pub lambda: f64,
    pub mu: f64,
    pub abar: f64,
    pub bbar: f64,
    pub log_pi: f64,
}

/// Rates, `ā`, `b̄` and `ln π` for `n < len`.
pub fn bd_table(rates: &BirthDeathRates, len: usize) -> Result<Vec<BdRow>> {
    let (jac, pi) = bd_to_jacobi(rates);
    let ln_pi = pi.ln_prefix(len)?;
    (0..len)
        .map(|n| {
            Ok(BdRow {
                n,
                lambda: rates.lambda(n)?,
                mu: rates.mu(n)?,
                abar: jac.a(n)?,
                bbar: jac.b(n)?,
                log_pi: ln_pi[n],
            })
        })
        .collect()
}

/// CSV with header `n,lambda,mu,abar,bbar,log_pi` (`log_pi` is `ln π_n`).
pub fn write_bd_csv<W: Write>(out: W, rows: &[BdRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "lambda", "mu", "abar", "bbar", "log_pi"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format_f64(r.lambda),
            format_f64(r.mu),
            format_f64(r.abar),
            format_f64(r.bbar),
            format_f64(r.log_pi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Theorem 5.1 conditions on the interleaved sequence `a = (μ_1, λ_1, μ_2, ..)`:
/// (a) `a_n → ∞`, (b) `Σ 1/a_n = ∞`, (c) `Σ [a_{n+1}/a_n − 1]⁻ < ∞`.
pub fn bd_check_theorem_51(
    rates: &BirthDeathRates,
    n: usize,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    if n < MIN_CHECK_N {
        return Err(Error::Precondition(format!(
            "checkers need N ≥ {MIN_CHECK_N}, got {n}"
        )));
    }
    let a: Vec<f64> = (0..n + 2)
        .map(|k| rates.interleaved(k))
        .collect::<Result<_>>()?;
    let inv: Vec<f64> = a[..=n].iter().map(|v| 1.0 / v).collect();
    let ratio_terms: Vec<f64> = (0..=n).map(|k| (1.0 - a[k + 1] / a[k]).max(0.0)).collect();
    let top_ratio = (n / 2..=n).map(|k| a[k + 1] / a[k]).fold(1.0f64, f64::max);
    let conditions = vec![
        tends_to_infinity("Thm51.a", "a_n", &a[..=n], cfg),
        divergent_condition("Thm51.b", "Σ 1/a_n", &inv, cfg),
        summable_condition(
            "Thm51.c",
            "Σ [a_{n+1}/a_n − 1]⁻",
            &ratio_terms,
            cfg.noise_per_term() * top_ratio,
            cfg,
        ),
    ];
    Ok(CheckReport::new("5.1", n, None, conditions, CONCLUSION_51))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::poly_eval;
    use crate::sequences::{instantiate, parse_family};
    use crate::spectra::{eigenvalues, truncate};
    use crate::Verdict;
    use proptest::prelude::*;

    fn seq(text: &str) -> SequencePair {
        instantiate(&parse_family(text).unwrap()).unwrap()
    }

    fn linear() -> SequencePair {
        SequencePair::from_fn(|n| n as f64 + 1.0, |_| 0.0)
    }

    #[test]
    fn flip_examples() {
        let ch = seq("chihara");
        assert_eq!(flip(&ch).b(2).unwrap(), -5.0);
        let twice = flip(&flip(&ch));
        for n in 0..20 {
            assert_eq!(twice.a(n).unwrap(), ch.a(n).unwrap());
            assert_eq!(twice.b(n).unwrap(), ch.b(n).unwrap());
        }
    }

    #[test]
    fn flip_negates_and_reverses_eigenvalues() {
        let ch = seq("chihara");
        let t = truncate(&ch, 50).unwrap();
        let tf = truncate(&flip(&ch), 50).unwrap();
        let tol = t.default_tolerance();
        let s = eigenvalues(&t, tol).unwrap().eigenvalues;
        let sf = eigenvalues(&tf, tol).unwrap().eigenvalues;
        for (x, y) in s.iter().zip(sf.iter().rev()) {
            assert!((x + y).abs() <= 2.0 * tol);
        }
    }

    #[test]
    fn restriction_examples() {
        let e = square_even(&linear()).unwrap();
        assert_eq!(e.a(0).unwrap(), 2.0);
        assert_eq!(e.b(0).unwrap(), 1.0);
        assert_eq!(e.b(1).unwrap(), 13.0);
        let o = square_odd(&linear()).unwrap();
        assert_eq!(o.a(0).unwrap(), 6.0);
        assert_eq!(o.b(0).unwrap(), 5.0);

        let c = seq("const");
        let (e, o) = (square_even(&c).unwrap(), square_odd(&c).unwrap());
        assert_eq!(e.b_prefix(4).unwrap(), vec![1.0, 2.0, 2.0, 2.0]);
        assert_eq!(o.b_prefix(4).unwrap(), vec![2.0; 4]);
        assert!(e
            .a_prefix(10)
            .unwrap()
            .iter()
            .chain(&o.a_prefix(10).unwrap())
            .all(|v| *v == 1.0));
    }

    #[test]
    fn restriction_requires_zero_diagonal() {
        assert!(matches!(
            square_even(&seq("chihara")),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            square_odd(&seq("chihara")),
            Err(Error::Precondition(_))
        ));
        let late = SequencePair::from_fn(|_| 1.0, |n| if n == 500 { 1.0 } else { 0.0 });
        let e = square_even(&late).unwrap();
        assert!(e.a(10).is_ok());
        assert!(matches!(e.a(250), Err(Error::Precondition(_))));
        let table = SequencePair::from_table(vec![1.0, 2.0], vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(square_even(&table).unwrap().a(0).unwrap(), 2.0);
    }

    #[test]
    fn odd_block_is_shifted_even_block_up_to_b0() {
        for s in [linear(), seq("factorial-staircase"), seq("pow:alpha=0.5")] {
            let o = square_odd(&s).unwrap();
            let e = square_even(&shift(&s)).unwrap();
            let a0 = s.a(0).unwrap();
            assert!((o.b(0).unwrap() - e.b(0).unwrap() - a0 * a0).abs() < 1e-12);
            for n in 0..40 {
                assert_eq!(o.a(n).unwrap(), e.a(n).unwrap());
                if n > 0 {
                    assert_eq!(o.b(n).unwrap(), e.b(n).unwrap());
                }
            }
        }
    }

    fn rel_close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
    }

    proptest! {
        #[test]
        fn even_polynomials_are_squares(x in -3.0f64..3.0, staircase in any::<bool>()) {
            let s = if staircase { seq("factorial-staircase") } else { linear() };
            let e = square_even(&s).unwrap();
            let p = poly_eval(&s, x, 100).unwrap();
            let pe = poly_eval(&e, x * x, 50).unwrap();
            for n in 0..=50 {
                let (u, v) = (p.get(2 * n).unwrap(), pe.get(n).unwrap());
                prop_assert!(rel_close(u.value(), v.value(), 1e-9), "n = {}: {:?} vs {:?}", n, u, v);
            }
        }
    }

    #[test]
    fn bd_examples() {
        let r = BirthDeathRates::parse("bd:lam=linear,mu=linear").unwrap();
        let (jac, pi) = bd_to_jacobi(&r);
        for n in 0..20 {
            assert!((jac.a(n).unwrap() - (n as f64 + 1.0)).abs() < 1e-12);
            assert_eq!(jac.b(n).unwrap(), -(2.0 * n as f64 + 1.0));
        }
        assert!(pi.ln_prefix(20).unwrap().iter().all(|v| v.abs() < 1e-12));

        let r = BirthDeathRates::parse("lam=2,mu=1").unwrap();
        let (jac, pi) = bd_to_jacobi(&r);
        assert_eq!(jac.b(0).unwrap(), -2.0);
        for n in 0..10 {
            assert!((jac.a(n).unwrap() - 2f64.sqrt()).abs() < 1e-15);
            if n > 0 {
                assert_eq!(jac.b(n).unwrap(), -3.0);
            }
            assert!((pi.ln_pi(n).unwrap() - n as f64 * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn bd_language() {
        let r = BirthDeathRates::parse("bd:lam=quadratic,mu=pow,mu_pow=1.5,mu_scale=2,mu0=0.5")
            .unwrap();
        assert_eq!(r.lambda(2).unwrap(), 9.0);
        assert_eq!(r.mu(0).unwrap(), 0.5);
        assert!((r.mu(4).unwrap() - 16.0).abs() < 1e-12);
        assert!(matches!(
            BirthDeathRates::parse("bd:lam=linear"),
            Err(Error::MissingParameter { .. })
        ));
        assert!(matches!(
            BirthDeathRates::parse("bd:lam=pow,mu=linear"),
            Err(Error::MissingParameter { .. })
        ));
        assert!(matches!(
            BirthDeathRates::parse("bd:lam=linear,mu=linear,x=1"),
            Err(Error::UnexpectedParameter { .. })
        ));
        assert!(matches!(
            BirthDeathRates::parse("bd:lam=linear,mu=cubic"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            BirthDeathRates::parse("bd:lam=-1,mu=linear"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            BirthDeathRates::parse("bd:lam=linear,mu=linear,mu0=-1"),
            Err(Error::Domain(_))
        ));
        assert!(BirthDeathRates::parse("bd:lam=1,,mu=1")
            .unwrap_err()
            .is_parse_error());
    }

    #[test]
    fn rates_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        std::fs::write(&path, "n,lambda,mu\n0,1,0\n1,2,1\n2,3,2\n").unwrap();
        let r = BirthDeathRates::from_csv(&path).unwrap();
        assert_eq!(r.lambda(2).unwrap(), 3.0);
        assert!(matches!(r.mu(3), Err(Error::OutOfRange { .. })));
        std::fs::write(&path, "n,lambda,mu\n0,1,0\n1,0,1\n").unwrap();
        assert!(BirthDeathRates::from_csv(&path).is_err());
    }

    fn dense(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
    }

    #[test]
    fn similarity_oracle() {
        for text in [
            "bd:lam=linear,mu=linear",
            "bd:lam=2,mu=1",
            "bd:lam=pow,lam_pow=1.3,mu=quadratic,mu0=0.7",
        ] {
            let r = BirthDeathRates::parse(text).unwrap();
            let n = 30;
            let q = dense(n, |i, j| {
                if i == j {
                    -(r.lambda(i).unwrap() + r.mu(i).unwrap())
                } else if j == i + 1 {
                    r.lambda(i).unwrap()
                } else if i == j + 1 {
                    r.mu(i).unwrap()
                } else {
                    0.0
                }
            });
            let (jac, pi) = bd_to_jacobi(&r);
            let ln_pi = pi.ln_prefix(n).unwrap();
            let c = truncate(&jac, n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let similar = q[i][j] * ((ln_pi[i] - ln_pi[j]) / 2.0).exp();
                    let expected = if i == j {
                        c.diag()[i]
                    } else if j == i + 1 {
                        c.offdiag()[i]
                    } else if i == j + 1 {
                        c.offdiag()[j]
                    } else {
                        0.0
                    };
                    assert!(
                        rel_close(similar, expected, 1e-12),
                        "{text} ({i},{j}): {similar} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn routes_reproduce_the_flipped_matrix() {
        for (text, parity) in [
            ("bd:lam=linear,mu=linear", Parity::Even),
            ("bd:lam=pow,lam_pow=1.3,mu=quadratic,mu0=0.7", Parity::Odd),
        ] {
            let r = BirthDeathRates::parse(text).unwrap();
            let route = bd_route(&r).unwrap();
            assert_eq!(route.parity, parity);
            let block = route.block().unwrap();
            let target = flip(&bd_to_jacobi(&r).0);
            for n in 0..30 {
                assert!(rel_close(block.a(n).unwrap(), target.a(n).unwrap(), 1e-14));
                assert!(rel_close(block.b(n).unwrap(), target.b(n).unwrap(), 1e-14));
            }
        }
    }

    proptest! {
        #[test]
        fn pi_ratio_recursion(c in 0.1f64..5.0, p in 0.0f64..2.0, mu0 in 0.0f64..3.0) {
            let text = format!("bd:lam=pow,lam_pow={p:?},lam_scale={c:?},mu=linear,mu0={mu0:?}");
            let r = BirthDeathRates::parse(&text).unwrap();
            let (_, pi) = bd_to_jacobi(&r);
            let ln = pi.ln_prefix(200).unwrap();
            prop_assert_eq!(ln[0], 0.0);
            for n in 0..199 {
                let exact = (r.lambda(n).unwrap() / r.mu(n + 1).unwrap()).ln();
                prop_assert!((ln[n + 1] - ln[n] - exact).abs() <= 1e-12 * exact.abs().max(1.0));
                prop_assert!(ln[n + 1].exp() > 0.0 || ln[n + 1] < -700.0);
            }
        }
    }

    #[test]
    fn theorem_51_fixtures() {
        let cfg = CheckConfig::default();
        let check = |text: &str| {
            bd_check_theorem_51(&BirthDeathRates::parse(text).unwrap(), 10_000, &cfg).unwrap()
        };
        let r = check("bd:lam=linear,mu=linear");
        assert_eq!(r.overall, Verdict::Pass, "{r:#?}");
        assert_eq!(r.conclusion.as_deref(), Some(CONCLUSION_51));
        let r = check("bd:lam=quadratic,mu=quadratic");
        assert_eq!(r.condition("Thm51.b").unwrap().verdict, Verdict::Fail);
        let r = check("bd:lam=2,mu=1");
        assert_eq!(r.condition("Thm51.a").unwrap().verdict, Verdict::Fail);
        assert!(r.conclusion.is_none());
        assert!(
            bd_check_theorem_51(&BirthDeathRates::parse("lam=1,mu=1").unwrap(), 50, &cfg).is_err()
        );
    }
}
