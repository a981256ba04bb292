//! Channel models for `y = H x + n` with unit-variance inputs and noise density `N0`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, ensure_finite, max_abs, ComplexMatrix, C64};

/// Small 3x4 real channel with a band-1 optimum that is indefinite at `N0 = 1`.
pub const SAMPLE_3X4: &str = "3 4
0 1 1 1
1 1 2 1
1 -1 0 0
";

/// Where a channel matrix came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelSource {
    Iid,
    Kronecker { alpha: f64 },
    Isi { beta: f64, taps: usize },
    File { path: PathBuf },
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub h: ComplexMatrix,
    pub n0: f64,
    pub source: ChannelSource,
}

impl Channel {
    pub fn new(h: ComplexMatrix, n0: f64, source: ChannelSource) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "channel must be at least 1x1, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::InvalidParameter(format!("N0 must be positive, got {n0}")));
        }
        ensure_finite(&h)?;
        Ok(Channel { h, n0, source })
    }

    pub fn explicit(h: ComplexMatrix, n0: f64) -> Result<Self> {
        Self::new(h, n0, ChannelSource::Explicit)
    }

    pub fn with_n0(mut self, n0: f64) -> Result<Self> {
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::InvalidParameter(format!("N0 must be positive, got {n0}")));
        }
        self.n0 = n0;
        Ok(self)
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    /// `G = H^H H`.
    pub fn gram(&self) -> ComplexMatrix {
        self.h.adjoint() * &self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSpec {
    pub alpha: f64,
    pub n: usize,
}

impl KroneckerSpec {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "correlation alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("correlation size must be >= 1".into()));
        }
        Ok(KroneckerSpec { alpha, n })
    }

    /// Toeplitz correlation with entries `alpha^|i-j|`.
    pub fn correlation(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |r, c| {
            c64(self.alpha.powi(r.abs_diff(c) as i32), 0.0)
        })
    }

    /// Hermitian positive definite square root of the correlation matrix.
    pub fn correlation_sqrt(&self) -> ComplexMatrix {
        let eig = SymmetricEigen::new(self.correlation());
        let v = &eig.eigenvectors;
        let mut scaled = v.clone();
        for (j, lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        scaled * v.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsiSpec {
    pub beta: f64,
    pub n_t: usize,
    pub taps: usize,
}

impl IsiSpec {
    pub const DEFAULT_TAPS: usize = 129;

    pub fn new(beta: f64, n_t: usize, taps: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth beta must lie in (0, 1], got {beta}"
            )));
        }
        if n_t == 0 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        if taps.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "tap count must be odd, got {taps}"
            )));
        }
        Ok(IsiSpec { beta, n_t, taps })
    }
}

/// Draws an `n_r x n_t` matrix of unit-variance circular complex Gaussians.
pub fn sample_iid<R: Rng + ?Sized>(rng: &mut R, n_r: usize, n_t: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill order is part of the reproducibility contract.
    ComplexMatrix::from_fn(n_r, n_t, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(s * re, s * im)
    })
}

/// `Phi^{1/2} H_w Phi^{1/2}` given a precomputed square root.
pub fn sample_kronecker<R: Rng + ?Sized>(rng: &mut R, phi_sqrt: &ComplexMatrix) -> ComplexMatrix {
    let n = phi_sqrt.nrows();
    let hw = sample_iid(rng, n, n);
    phi_sqrt * hw * phi_sqrt
}

pub fn gaussian_iid(n_r: usize, n_t: usize, seed: u64) -> Result<Channel> {
    if n_r == 0 || n_t == 0 {
        return Err(Error::InvalidParameter("channel dimensions must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Channel::new(sample_iid(&mut rng, n_r, n_t), 1.0, ChannelSource::Iid)
}

/// Square Kronecker-correlated channel; `n_r` and `n_t` must match.
pub fn kronecker_mimo(n_r: usize, n_t: usize, alpha: f64, seed: u64) -> Result<Channel> {
    if n_r != n_t {
        return Err(Error::DimensionMismatch(format!(
            "Kronecker model needs a square channel, got {n_r}x{n_t}"
        )));
    }
    let spec = KroneckerSpec::new(alpha, n_t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = sample_kronecker(&mut rng, &spec.correlation_sqrt());
    Channel::new(h, 1.0, ChannelSource::Kronecker { alpha })
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Centered taps `sqrt(beta) sinc(beta m)` for `m = -(T-1)/2 ..= (T-1)/2`.
pub fn isi_taps(beta: f64, taps: usize) -> Vec<f64> {
    let half = (taps / 2) as i64;
    (-half..=half)
        .map(|m| beta.sqrt() * sinc(beta * m as f64))
        .collect()
}

/// Tall `(n_t + T - 1) x n_t` convolution matrix of the truncated ideal low-pass response.
pub fn isi_channel(spec: &IsiSpec) -> Result<Channel> {
    let spec = IsiSpec::new(spec.beta, spec.n_t, spec.taps)?;
    let h = isi_taps(spec.beta, spec.taps);
    let energy: f64 = h.iter().map(|v| v * v).sum();
    if (energy - 1.0).abs() > 0.01 {
        log::warn!(
            "truncated response with {} taps has energy {energy:.4}; expected about 1",
            spec.taps
        );
    }
    let rows = spec.n_t + spec.taps - 1;
    let mut m = ComplexMatrix::zeros(rows, spec.n_t);
    for col in 0..spec.n_t {
        for (i, tap) in h.iter().enumerate() {
            m[(col + i, col)] = c64(*tap, 0.0);
        }
    }
    Channel::new(
        m,
        1.0,
        ChannelSource::Isi {
            beta: spec.beta,
            taps: spec.taps,
        },
    )
}

/// Smallest `L` such that `H^H H` vanishes (relative `1e-12`) beyond the `L`-th off-diagonal.
pub fn memory_of(channel: &Channel) -> usize {
    gram_memory(&channel.gram())
}

pub fn gram_memory(g: &ComplexMatrix) -> usize {
    let tol = 1e-12 * max_abs(g);
    let n = g.nrows();
    let mut memory = 0;
    for r in 0..n {
        for c in 0..n {
            if g[(r, c)].norm() > tol {
                memory = memory.max(r.abs_diff(c));
            }
        }
    }
    memory
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the text channel format: a `nR nT` header, then `nR` rows of `nT`
/// entries such as `1.5-0.25i`. Everything after `#` on a line is ignored.
pub fn parse_channel(text: &str, n0: f64, source: ChannelSource) -> Result<Channel> {
    let mut header: Option<(usize, usize)> = None;
    let mut rows: Vec<Vec<C64>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<(usize, &str)> = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        match header {
            None => {
                if tokens.len() != 2 {
                    return Err(parse_error(
                        line_no,
                        tokens[0].0,
                        "header must be two integers \"nR nT\"",
                    ));
                }
                let mut dims = [0usize; 2];
                for (slot, (col, tok)) in dims.iter_mut().zip(&tokens) {
                    *slot = tok.parse().map_err(|_| {
                        parse_error(line_no, *col, format!("invalid dimension \"{tok}\""))
                    })?;
                    if *slot == 0 {
                        return Err(parse_error(line_no, *col, "dimensions must be >= 1"));
                    }
                }
                header = Some((dims[0], dims[1]));
            }
            Some((n_r, n_t)) => {
                if rows.len() == n_r {
                    return Err(Error::DimensionMismatch(format!(
                        "line {line_no}: more than the declared {n_r} rows"
                    )));
                }
                if tokens.len() != n_t {
                    return Err(Error::DimensionMismatch(format!(
                        "line {line_no}: expected {n_t} entries, found {}",
                        tokens.len()
                    )));
                }
                let mut row = Vec::with_capacity(n_t);
                for (col, tok) in tokens {
                    let z: C64 = tok.parse().map_err(|_| {
                        parse_error(line_no, col, format!("invalid complex entry \"{tok}\""))
                    })?;
                    if !z.re.is_finite() || !z.im.is_finite() {
                        return Err(parse_error(line_no, col, "entry is not finite"));
                    }
                    row.push(z);
                }
                rows.push(row);
            }
        }
    }

    let Some((n_r, n_t)) = header else {
        return Err(parse_error(1, 1, "missing \"nR nT\" header"));
    };
    if rows.len() != n_r {
        return Err(Error::DimensionMismatch(format!(
            "declared {n_r} rows, found {}",
            rows.len()
        )));
    }
    let h = ComplexMatrix::from_fn(n_r, n_t, |r, c| rows[r][c]);
    Channel::new(h, n0, source)
}

/// Whitespace tokens with their 1-based character columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut char_col = 0;
    let mut start_col = 0;
    for (byte, ch) in line.char_indices() {
        char_col += 1;
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((start_col, &line[s..byte]));
            }
        } else if start.is_none() {
            start = Some(byte);
            start_col = char_col;
        }
    }
    if let Some(s) = start {
        out.push((start_col, &line[s..]));
    }
    out
}

pub fn load_channel(path: impl AsRef<Path>, n0: f64) -> Result<Channel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_channel(
        &text,
        n0,
        ChannelSource::File {
            path: path.to_path_buf(),
        },
    )
}

/// Renders `H` in the text format. Entries use exponent notation, which round-trips exactly.
pub fn format_channel(h: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", h.nrows(), h.ncols());
    for r in 0..h.nrows() {
        let row: Vec<String> = (0..h.ncols()).map(|c| format_complex(h[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{}{:e}i", z.re, sign, z.im.abs())
}

pub fn save_channel(channel: &Channel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_channel(&channel.h))?;
    Ok(())
}
