//! Iterated logarithms and the products `g_j(x) = ∏_{i=1}^{j} log^{(i)}(x)`.

use crate::error::{Error, Result};

/// `log^{(i)}(x)` with `log^{(0)}(x) = x`. Errors if an intermediate value
/// is not positive (the next logarithm would be undefined).
pub fn iterated_log(i: u32, x: f64) -> Result<f64> {
    let mut v = x;
    for level in 0..i {
        if !(v > 0.0) {
            return Err(Error::domain(format!(
                "log^({level})({x}) = {v} is not positive"
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// `g_j(x) = ∏_{i=1}^{j} log^{(i)}(x)`, with `g_0 ≡ 1`.
///
/// Every factor must be strictly positive.
pub fn iterlog_g(j: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "iterlog_g argument {x} is not finite"
        )));
    }
    let mut level = x;
    let mut product = 1.0;
    for i in 1..=j {
        if !(level > 0.0) {
            return Err(Error::domain(format!("log^({})({x}) is undefined", i)));
        }
        level = level.ln();
        if !(level > 0.0) {
            return Err(Error::domain(format!(
                "log^({i})({x}) = {level} is not positive"
            )));
        }
        product *= level;
    }
    Ok(product)
}

/// Closed-form derivative `g_K'(x) = g_K(x) Σ_{j=1}^{K} 1/(x g_j(x))`.
pub fn iterlog_g_prime(k: u32, x: f64) -> Result<f64> {
    let g_k = iterlog_g(k, x)?;
    let mut sum = 0.0;
    let mut g_j = 1.0;
    let mut level = x;
    for _ in 1..=k {
        level = level.ln();
        g_j *= level;
        sum += 1.0 / (x * g_j);
    }
    Ok(g_k * sum)
}

/// Smallest integer `N ≥ 1` with `log^{(K)}(N) > 0` (all intermediate levels
/// positive), i.e. the first index where `g_K` is defined and positive.
pub fn iterlog_cutoff(k: u32) -> usize {
    (1usize..)
        .find(|&n| iterlog_g(k, n as f64).is_ok())
        .expect("g_K is eventually defined")
}
