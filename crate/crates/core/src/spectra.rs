//! Finite sections of the Jacobi matrix and their spectra.
//!
//! The N×N leading principal submatrix is diagonalized by bisection on Sturm
//! counts (the number of negative pivots of `T - x I = L D Lᵀ`). Counting is
//! also what [`density_report`] uses, so per-bin eigenvalue counts never need
//! a full eigensolve.
//!
//! A vanishing pivot is replaced by `+ε·scale`, where `ε` is the machine
//! epsilon and `scale = max(1, max|b_i|, max a_i)`. A positive replacement
//! keeps the count "strictly below `x`" when `x` is itself an eigenvalue.
//!
//! Finite sections only give evidence about the infinite matrix. In
//! particular they can have eigenvalues inside spectral gaps of the operator
//! (the `pow-shifted` family, whose operator has the gap `(-1, 1)`, is a
//! standing example), so bin counts away from the bulk should be read with
//! care, and the reported Gershgorin interval is the only hard bound.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::sequences::SequencePair;

/// Leading N×N principal submatrix: diagonal `b_0..b_{N-1}`, off-diagonal
/// `a_0..a_{N-2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truncation {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl Truncation {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Precondition("a truncation needs N ≥ 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::Precondition(format!(
                "{} diagonal entries need {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                offdiag.len()
            )));
        }
        if let Some((i, v)) = offdiag
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::domain(format!(
                "off-diagonal entry a_{i} = {v} is not positive"
            )));
        }
        if let Some((i, v)) = diag.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!(
                "diagonal entry b_{i} = {v} is not finite"
            )));
        }
        Ok(Truncation { diag, offdiag })
    }

    /// Order N.
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let radius = |i: usize| {
            let left = if i > 0 { self.offdiag[i - 1] } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i] } else { 0.0 };
            left + right
        };
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r = radius(i);
            (lo.min(self.diag[i] - r), hi.max(self.diag[i] + r))
        })
    }

    /// `max(1, max|b_i|, max a_i)`.
    pub fn scale(&self) -> f64 {
        self.diag
            .iter()
            .map(|v| v.abs())
            .chain(self.offdiag.iter().copied())
            .fold(1.0, f64::max)
    }

    /// Default bisection tolerance `1e-12 · max(1, spectral radius bound)`, the
    /// bound being the larger Gershgorin endpoint in absolute value.
    pub fn default_tolerance(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        1e-12 * lo.abs().max(hi.abs()).max(1.0)
    }

    /// Bisection tolerance for Gauss nodes, `ε · max(1, spectral radius bound)`.
    /// Weights of nearly coincident nodes are sensitive to node errors, so
    /// nodes are bisected to full working precision.
    pub fn node_tolerance(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        f64::EPSILON * lo.abs().max(hi.abs()).max(1.0)
    }

    fn pivmin(&self) -> f64 {
        f64::EPSILON * self.scale()
    }
}

/// Copies `b_0..b_{N-1}` and `a_0..a_{N-2}`.
pub fn truncate(seq: &SequencePair, n: usize) -> Result<Truncation> {
    if n == 0 {
        return Err(Error::Precondition("a truncation needs N ≥ 1".into()));
    }
    Truncation::new(seq.b_prefix(n)?, seq.a_prefix(n - 1)?)
}

/// Number of eigenvalues of `t` strictly below `x`.
pub fn sturm_count(t: &Truncation, x: f64) -> usize {
    sturm_count_with(t, x, t.pivmin())
}

fn sturm_count_with(t: &Truncation, x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let mut a2_prev = 0.0;
    for (i, &b) in t.diag.iter().enumerate() {
        q = (b - x) - a2_prev / q;
        if q.abs() < pivmin || q.is_nan() {
            q = pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        if let Some(a) = t.offdiag.get(i) {
            a2_prev = a * a;
        }
    }
    count
}

/// Eigenvalues (ascending) and optionally Gauss weights of a truncation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSpectrum {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl TruncationSpectrum {
    /// CSV with header `k,eigenvalue,weight` and 1-based `k`; the weight
    /// column is present only when weights were computed.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.weights {
            Some(weights) => {
                w.write_record(["k", "eigenvalue", "weight"])?;
                for (k, (x, wt)) in self.eigenvalues.iter().zip(weights).enumerate() {
                    w.write_record([(k + 1).to_string(), format_f64(*x), format_f64(*wt)])?;
                }
            }
            None => {
                w.write_record(["k", "eigenvalue"])?;
                for (k, x) in self.eigenvalues.iter().enumerate() {
                    w.write_record([(k + 1).to_string(), format_f64(*x)])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// All eigenvalues by bisection to absolute tolerance `tol`.
pub fn eigenvalues(t: &Truncation, tol: f64) -> Result<TruncationSpectrum> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Precondition(format!(
            "bisection tolerance {tol} must be positive"
        )));
    }
    let pivmin = t.pivmin();
    let (glo, ghi) = t.gershgorin();
    let pad = tol + 4.0 * f64::EPSILON * t.scale() * t.order() as f64;
    let (lo0, hi0) = (glo - pad, ghi + pad);
    let eigenvalues = (0..t.order())
        .into_par_iter()
        .map(|k| {
            let (mut lo, mut hi) = (lo0, hi0);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count_with(t, mid, pivmin) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    Ok(TruncationSpectrum {
        n: t.order(),
        eigenvalues,
        weights: None,
    })
}

/// Nodes and weights of the N-point Gauss discretization of the spectral
/// measure: `weight_k = 1 / Σ_{j<N} p_j(x_k)²`.
///
/// The vector `(p_0(x_k), .., p_{N-1}(x_k))` is evaluated through a twisted
/// factorization of `T - x_k I`: the top part comes from the forward pivots,
/// the bottom part from the backward pivots, meeting at the index `r` that
/// minimizes `|γ_r|`. Each half is then computed in its growing direction, so
/// the trace is accurate even where plain forward recursion would amplify
/// rounding errors. Magnitudes are accumulated in log space.
pub fn gauss_measure(t: &Truncation) -> Result<TruncationSpectrum> {
    gauss_measure_with(t, t.node_tolerance())
}

pub fn gauss_measure_with(t: &Truncation, tol: f64) -> Result<TruncationSpectrum> {
    let mut spectrum = eigenvalues(t, tol)?;
    let pivmin = t.pivmin();
    let weights = spectrum
        .eigenvalues
        .par_iter()
        .map(|&x| gauss_weight(t, x, pivmin))
        .collect();
    spectrum.weights = Some(weights);
    Ok(spectrum)
}

fn gauss_weight(t: &Truncation, x: f64, pivmin: f64) -> f64 {
    let n = t.order();
    if n == 1 {
        return 1.0;
    }
    let guard = |q: f64| {
        if q.abs() < pivmin || q.is_nan() {
            pivmin
        } else {
            q
        }
    };
    let (b, a) = (&t.diag, &t.offdiag);
    let mut fwd = vec![0.0; n];
    fwd[0] = guard(b[0] - x);
    for j in 1..n {
        fwd[j] = guard((b[j] - x) - a[j - 1] * a[j - 1] / fwd[j - 1]);
    }
    let mut bwd = vec![0.0; n];
    bwd[n - 1] = guard(b[n - 1] - x);
    for j in (0..n - 1).rev() {
        bwd[j] = guard((b[j] - x) - a[j] * a[j] / bwd[j + 1]);
    }
    let r = (0..n)
        .min_by(|&i, &j| {
            let gi = (fwd[i] + bwd[i] - (b[i] - x)).abs();
            let gj = (fwd[j] + bwd[j] - (b[j] - x)).abs();
            gi.total_cmp(&gj)
        })
        .unwrap_or(0);
    // ln|z_j| with z_r = 1
    let mut ln_z = vec![0.0; n];
    for j in (0..r).rev() {
        ln_z[j] = ln_z[j + 1] + (a[j] / fwd[j]).abs().ln();
    }
    for j in r + 1..n {
        ln_z[j] = ln_z[j - 1] + (a[j - 1] / bwd[j]).abs().ln();
    }
    let peak = ln_z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_norm_sq = 2.0 * peak
        + ln_z
            .iter()
            .map(|l| (2.0 * (l - peak)).exp())
            .sum::<f64>()
            .ln();
    (2.0 * ln_z[0] - ln_norm_sq).exp()
}

/// One bin `[lo, hi)` of a density report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Per-bin eigenvalue counts of the N×N truncation over a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub window: (f64, f64),
    pub bin: f64,
    pub gershgorin: (f64, f64),
    pub bins: Vec<DensityBin>,
}

impl DensityReport {
    /// CSV with header `bin_lo,bin_hi,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        for b in &self.bins {
            w.write_record([format_f64(b.lo), format_f64(b.hi), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Bins without any eigenvalue.
    pub fn empty_bins(&self) -> impl Iterator<Item = &DensityBin> {
        self.bins.iter().filter(|b| b.count == 0)
    }
}

/// Eigenvalue counts of the N×N truncation in bins of width `bin` covering
/// `[x_lo, x_hi)`; the last bin is clipped at `x_hi`.
pub fn density_report(
    seq: &SequencePair,
    n: usize,
    window: (f64, f64),
    bin: f64,
) -> Result<DensityReport> {
    let t = truncate(seq, n)?;
    density_report_for(&t, window, bin)
}

pub fn density_report_for(t: &Truncation, window: (f64, f64), bin: f64) -> Result<DensityReport> {
    let (x_lo, x_hi) = window;
    if !(bin > 0.0 && bin.is_finite()) {
        return Err(Error::Precondition(format!(
            "bin width {bin} must be positive"
        )));
    }
    if !(x_lo.is_finite() && x_hi.is_finite()) || x_hi < x_lo {
        return Err(Error::Precondition(format!(
            "window [{x_lo}, {x_hi}] is not an interval"
        )));
    }
    let span = (x_hi - x_lo) / bin;
    let bins_needed = if span > 0.0 {
        (span * (1.0 - 1e-12)).ceil() as usize
    } else {
        0
    };
    let edges: Vec<f64> = (0..=bins_needed)
        .map(|k| {
            if k == bins_needed {
                x_hi
            } else {
                x_lo + k as f64 * bin
            }
        })
        .collect();
    let counts: Vec<usize> = edges.par_iter().map(|&x| sturm_count(t, x)).collect();
    let bins = edges
        .windows(2)
        .zip(counts.windows(2))
        .map(|(e, c)| DensityBin {
            lo: e[0],
            hi: e[1],
            count: c[1] - c[0],
        })
        .collect();
    Ok(DensityReport {
        n: t.order(),
        window,
        bin,
        gershgorin: t.gershgorin(),
        bins,
    })
}
