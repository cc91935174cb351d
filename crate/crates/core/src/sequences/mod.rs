//! Jacobi coefficient sequences.
//!
//! A [`SequencePair`] is the pair `{a_n > 0}` (off-diagonal) and `{b_n}`
//! (diagonal) defining the semi-infinite matrix
//!
//! ```text
//! b_0 a_0
//! a_0 b_1 a_1
//!     a_1 b_2 a_2
//!         ...
//! ```
//!
//! Values are evaluated on demand by index. Every accessor validates the
//! returned value (`a_n` positive and finite, `b_n` finite), so downstream
//! code never sees a malformed coefficient.
//!
//! Families are described with a flat mini-language, see [`parse_family`]
//! for the grammar and [`catalog`] for the available families.

pub mod catalog;
mod iterlog;
mod parse;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::io::format_f64;

pub use catalog::instantiate;
pub use iterlog::{iterated_log, iterlog_cutoff, iterlog_g, iterlog_g_prime};
pub use parse::{parse_family, FamilySpec, ParamValue};

/// Source of raw coefficients. Implementors need not validate; [`SequencePair`]
/// checks every value it hands out.
pub trait Coefficients: Send + Sync + fmt::Debug {
    fn off_diagonal(&self, n: usize) -> Result<f64>;
    fn diagonal(&self, n: usize) -> Result<f64>;
}

/// Lazily evaluable Jacobi data `({a_n}, {b_n})`. Cheap to clone.
#[derive(Clone, Debug)]
pub struct SequencePair {
    inner: Arc<dyn Coefficients>,
}

impl SequencePair {
    pub fn new<C: Coefficients + 'static>(coefficients: C) -> Self {
        SequencePair {
            inner: Arc::new(coefficients),
        }
    }

    /// Builds a pair from closures. Validation still happens on access.
    pub fn from_fn<A, B>(a: A, b: B) -> Self
    where
        A: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        SequencePair::new(FnCoefficients {
            a: Box::new(a),
            b: Box::new(b),
        })
    }

    /// Finite explicit table. `a` may be one shorter than `b` (a finite
    /// section has one fewer off-diagonal entry than diagonal entries).
    pub fn from_table(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = a
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::domain(format!(
                "table entry a[{i}] = {v} is not positive"
            )));
        }
        if let Some((i, v)) = b.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!(
                "table entry b[{i}] = {v} is not finite"
            )));
        }
        Ok(SequencePair::new(catalog::Table { a, b }))
    }

    /// Reads a table from CSV with header `n,a,b` (the `b` column is optional
    /// and defaults to zero). Rows must be listed in index order starting at 0.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let headers = reader.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let a_col = col("a").ok_or_else(|| Error::domain("table CSV needs an `a` column"))?;
        let b_col = col("b");
        let n_col = col("n");
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if let Some(nc) = n_col {
                let n: usize = parse_cell(&record, nc, row)?;
                if n != row {
                    return Err(Error::domain(format!("table row {row} has index {n}")));
                }
            }
            a.push(parse_cell(&record, a_col, row)?);
            b.push(match b_col {
                Some(bc) => parse_cell(&record, bc, row)?,
                None => 0.0,
            });
        }
        SequencePair::from_table(a, b)
    }

    /// Off-diagonal entry `a_n`.
    pub fn a(&self, n: usize) -> Result<f64> {
        let v = self.inner.off_diagonal(n)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!(
                "a_{n} = {v} is not a positive finite number"
            )))
        }
    }

    /// Diagonal entry `b_n`.
    pub fn b(&self, n: usize) -> Result<f64> {
        let v = self.inner.diagonal(n)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("b_{n} = {v} is not finite")))
        }
    }

    /// `a_{n-1}` with the convention `a_{-1} = 0`.
    pub fn a_prev(&self, n: usize) -> Result<f64> {
        if n == 0 {
            Ok(0.0)
        } else {
            self.a(n - 1)
        }
    }

    /// `a_0..a_{len-1}`.
    pub fn a_prefix(&self, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|n| self.a(n)).collect()
    }

    /// `b_0..b_{len-1}`.
    pub fn b_prefix(&self, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|n| self.b(n)).collect()
    }

    /// Writes `n,a,b` rows for `n < len`, readable by [`SequencePair::from_csv`].
    pub fn write_csv<W: std::io::Write>(&self, out: W, len: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "a", "b"])?;
        for n in 0..len {
            w.write_record([
                n.to_string(),
                format_f64(self.a(n)?),
                format_f64(self.b(n)?),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_cell<T: std::str::FromStr>(
    record: &csv::StringRecord,
    col: usize,
    row: usize,
) -> Result<T> {
    let cell = record.get(col).unwrap_or("");
    cell.parse().map_err(|_| {
        Error::domain(format!(
            "cannot parse `{cell}` in CSV row {row}, column {col}"
        ))
    })
}

struct FnCoefficients {
    a: Box<dyn Fn(usize) -> f64 + Send + Sync>,
    b: Box<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl fmt::Debug for FnCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnCoefficients")
    }
}

impl Coefficients for FnCoefficients {
    fn off_diagonal(&self, n: usize) -> Result<f64> {
        Ok((self.a)(n))
    }

    fn diagonal(&self, n: usize) -> Result<f64> {
        Ok((self.b)(n))
    }
}

type WeightFn = dyn Fn(usize) -> Result<f64> + Send + Sync;

/// Positive weight sequence `{α_n}` used by the commutator diagnostics, with
/// the convention `α_{-1} = 0`.
#[derive(Clone)]
pub struct WeightSequence {
    f: Arc<WeightFn>,
    label: String,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("label", &self.label)
            .finish()
    }
}

impl WeightSequence {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> Result<f64> + Send + Sync + 'static,
    {
        WeightSequence {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// `α_n = a_n`.
    pub fn matching(seq: &SequencePair) -> Self {
        let seq = seq.clone();
        WeightSequence::from_fn("a", move |n| seq.a(n))
    }

    /// `α_n ≡ 1`.
    pub fn ones() -> Self {
        WeightSequence::from_fn("one", |_| Ok(1.0))
    }

    /// `α_n = n g_K(n) / a_n` for `n ≥ N`, and `α_n = 1` below the cutoff
    /// `N` = smallest index with `log^{(K)}(N) > 0`.
    pub fn iterlog(seq: &SequencePair, k: u32) -> Self {
        let cutoff = iterlog_cutoff(k);
        let seq = seq.clone();
        WeightSequence::from_fn(format!("iterlog:{k}"), move |n| {
            if n < cutoff {
                Ok(1.0)
            } else {
                let x = n as f64;
                Ok(x * iterlog_g(k, x)? / seq.a(n)?)
            }
        })
    }

    pub fn from_table(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::domain(format!(
                "weight table entry {i} = {v} is not positive"
            )));
        }
        let len = values.len();
        Ok(WeightSequence::from_fn("table", move |n| {
            values
                .get(n)
                .copied()
                .ok_or(Error::OutOfRange { index: n, len })
        }))
    }

    /// Reads weights from CSV with header `n,alpha` (or a single `alpha` column).
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let headers = reader.headers()?.clone();
        let col = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case("alpha"))
            .ok_or_else(|| Error::domain("weight CSV needs an `alpha` column"))?;
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            values.push(parse_cell(&record?, col, row)?);
        }
        WeightSequence::from_table(values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `α_n`, checked positive.
    pub fn at(&self, n: usize) -> Result<f64> {
        let v = (self.f)(n)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!(
                "α_{n} = {v} is not a positive finite number"
            )))
        }
    }

    /// `α_{n-1}` with `α_{-1} = 0`.
    pub fn prev(&self, n: usize) -> Result<f64> {
        if n == 0 {
            Ok(0.0)
        } else {
            self.at(n - 1)
        }
    }
}

/// User-facing selection of the weight sequence: `a`, `one`, `iterlog:K`
/// or `table:<path>`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum WeightChoice {
    MatchA,
    One,
    IterLog(u32),
    Table(String),
}

impl WeightChoice {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "a" => Ok(WeightChoice::MatchA),
            "one" | "1" => Ok(WeightChoice::One),
            _ => {
                if let Some(k) = text.strip_prefix("iterlog:") {
                    let k = k.strip_prefix("K=").unwrap_or(k);
                    k.parse()
                        .map(WeightChoice::IterLog)
                        .map_err(|_| Error::syntax(8, format!("expected integer K in `{text}`")))
                } else if let Some(path) = text.strip_prefix("table:") {
                    if path.is_empty() {
                        Err(Error::syntax(6, "missing table path"))
                    } else {
                        Ok(WeightChoice::Table(path.to_string()))
                    }
                } else {
                    Err(Error::syntax(0, format!("unknown weight choice `{text}`")))
                }
            }
        }
    }

    pub fn resolve(&self, seq: &SequencePair) -> Result<WeightSequence> {
        match self {
            WeightChoice::MatchA => Ok(WeightSequence::matching(seq)),
            WeightChoice::One => Ok(WeightSequence::ones()),
            WeightChoice::IterLog(k) => Ok(WeightSequence::iterlog(seq, *k)),
            WeightChoice::Table(path) => WeightSequence::from_csv(path),
        }
    }
}

impl fmt::Display for WeightChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightChoice::MatchA => f.write_str("a"),
            WeightChoice::One => f.write_str("one"),
            WeightChoice::IterLog(k) => write!(f, "iterlog:{k}"),
            WeightChoice::Table(p) => write!(f, "table:{p}"),
        }
    }
}
