//! High-SNR slopes and power offsets of ergodic rates over IID Gaussian channels.
//!
//! Rates follow `S (ln snr - L)` in nats, with the per-antenna scaling
//! `snr / n_T`. `j_moment` is reported in bits; everything else is natural log.

use std::f64::consts::{LN_10, LOG2_E};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shortening::BlockSpec;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeOffset {
    pub s_inf: f64,
    /// Undefined when the slope is zero.
    pub l_inf: Option<f64>,
}

pub fn slope_full(n_r: usize, n_t: usize) -> usize {
    n_r.min(n_t)
}

pub fn slope_mmse(n_r: usize, n_t: usize) -> usize {
    if n_r >= n_t {
        n_t
    } else {
        0
    }
}

pub fn slope_cs(n_r: usize, n_t: usize, k: usize) -> usize {
    if n_r >= n_t {
        n_t
    } else if n_r + k >= n_t {
        n_r
    } else {
        0
    }
}

pub fn slope_block(n_r: usize, n_t: usize, blocks: &BlockSpec) -> usize {
    if n_r >= n_t {
        return n_t;
    }
    let deficit = n_t - n_r;
    blocks
        .sizes()
        .iter()
        .filter(|&&km| km > deficit)
        .map(|&km| km - deficit)
        .sum()
}

/// `psi(j) = H_{j-1} - gamma` for integer `j >= 1`.
pub fn digamma(j: usize) -> Result<f64> {
    if j < 1 {
        return Err(Error::InvalidParameter("digamma needs j >= 1".into()));
    }
    Ok((1..j).map(|k| 1.0 / k as f64).sum::<f64>() - EULER_GAMMA)
}

/// `E[ln det]` of the smaller Gram matrix of an IID `n_r x m` channel.
/// `m = 0` gives 0.
pub fn j_moment_nats(n_r: usize, m: usize) -> Result<f64> {
    if n_r == 0 {
        return Err(Error::InvalidParameter("n_R must be >= 1".into()));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let (big, small) = if n_r >= m { (n_r, m) } else { (m, n_r) };
    (0..small).map(|l| digamma(big - l)).sum()
}

/// `E[log2 det]` of the smaller Gram matrix, in bits.
pub fn j_moment(n_r: usize, n_t: usize) -> Result<f64> {
    if n_t == 0 {
        return Err(Error::InvalidParameter("n_T must be >= 1".into()));
    }
    Ok(LOG2_E * j_moment_nats(n_r, n_t)?)
}

/// Offset of the full-complexity receiver, in nats of `ln snr`.
pub fn offset_full(n_r: usize, n_t: usize) -> Result<f64> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::InvalidParameter("antenna counts must be >= 1".into()));
    }
    let s = slope_full(n_r, n_t) as f64;
    Ok((n_t as f64).ln() - j_moment_nats(n_r, n_t)? / s)
}

/// Offset of the optimal memory-`K` receiver; defined only when its slope is positive.
pub fn offset_cs(n_r: usize, n_t: usize, k: usize) -> Result<f64> {
    if n_t == 0 || n_r == 0 || k >= n_t {
        return Err(Error::InvalidParameter(format!(
            "need n_R, n_T >= 1 and K < n_T, got ({n_r}, {n_t}, {k})"
        )));
    }
    let s = slope_cs(n_r, n_t, k);
    if s == 0 {
        return Err(Error::ZeroSlope);
    }
    let s = s as f64;
    let tail = n_t - k;
    Ok((n_t as f64).ln() - j_moment_nats(n_r, n_t)? / s
        + tail as f64 * j_moment_nats(n_r, tail - 1)? / s
        - (tail - 1) as f64 * j_moment_nats(n_r, tail)? / s)
}

/// `offset_cs - offset_full` written directly with digamma values.
pub fn offset_gap_digamma(n_r: usize, n_t: usize, k: usize) -> Result<f64> {
    if k >= n_t {
        return Err(Error::InvalidParameter(format!("K={k} must be < n_T={n_t}")));
    }
    let s = slope_cs(n_r, n_t, k);
    if s == 0 {
        return Err(Error::ZeroSlope);
    }
    let tail = n_t - k;
    let mut sum = 0.0;
    for l in 0..tail {
        sum += digamma(n_r - l)?;
    }
    let last = digamma(n_r + 1 - tail)?;
    Ok((sum - tail as f64 * last) / s as f64)
}

/// Slope and offset from the last two points of a `(snr_db, rate_nats)` curve.
pub fn estimate_slope_offset(curve: &[(f64, f64)]) -> Result<SlopeOffset> {
    if curve.len() < 2 {
        return Err(Error::DegenerateCurve(format!(
            "need at least two points, got {}",
            curve.len()
        )));
    }
    let (db0, r0) = curve[curve.len() - 2];
    let (db1, r1) = curve[curve.len() - 1];
    if ![db0, r0, db1, r1].iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateCurve("non-finite point".into()));
    }
    let x0 = db0 * LN_10 / 10.0;
    let x1 = db1 * LN_10 / 10.0;
    if x1 == x0 {
        return Err(Error::DegenerateCurve("last two points share an SNR".into()));
    }
    let s = (r1 - r0) / (x1 - x0);
    if s.abs() <= 1e-12 * (1.0 + r1.abs()) {
        return Ok(SlopeOffset {
            s_inf: 0.0,
            l_inf: None,
        });
    }
    Ok(SlopeOffset {
        s_inf: s,
        l_inf: Some(x1 - r1 / s),
    })
}
