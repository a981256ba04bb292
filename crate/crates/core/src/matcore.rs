//! Dense complex linear algebra and band-structured operators.
//!
//! Band and submatrix routines use 1-based inclusive indices: `(i, j)` names
//! rows and columns `i..=j`. Storage is the usual 0-based `nalgebra` layout.

use nalgebra::{Cholesky, Complex, DMatrix, SymmetricEigen, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Pivots below this fraction of the largest pivot are treated as singular.
const SINGULAR_PIVOT_TOL: f64 = 1e-14;

/// Receiver memory: the number of off-diagonals kept on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BandSpec(pub usize);

impl BandSpec {
    pub fn new(k: usize) -> Self {
        BandSpec(k)
    }

    /// Validates `k <= n - 1` for an `n`-dimensional target.
    pub fn for_dimension(k: usize, n: usize) -> Result<Self> {
        if n == 0 || k > n - 1 {
            return Err(Error::InvalidParameter(format!(
                "memory K={k} must satisfy 0 <= K <= {}",
                n.saturating_sub(1)
            )));
        }
        Ok(BandSpec(k))
    }

    pub fn memory(self) -> usize {
        self.0
    }
}

/// `P = U diag(D) U^H` with `U` unit upper triangular.
#[derive(Debug, Clone)]
pub struct UduFactorization {
    pub u: ComplexMatrix,
    pub d: Vec<f64>,
}

impl UduFactorization {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.d.len();
        let mut ud = self.u.clone();
        for j in 0..n {
            let dj = self.d[j];
            ud.column_mut(j).iter_mut().for_each(|z| *z *= dj);
        }
        &ud * self.u.adjoint()
    }
}

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Builds a complex matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |r, c| c64(entries[r * cols + c], 0.0))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let z = m[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

/// `(M + M^H) / 2`.
pub fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Checks `max|M - M^H| <= tol * max|M|` and returns the symmetrized matrix.
pub fn hermitian_part(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let asymmetry = max_abs_diff(m, &m.adjoint());
    if asymmetry > HERMITIAN_TOL * max_abs(m) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(symmetrize(m))
}

/// `C_j^i`: rows and columns `i..=j` (1-based).
pub fn principal_submatrix(c: &ComplexMatrix, i: usize, j: usize) -> Result<ComplexMatrix> {
    let n = ensure_square(c)?;
    if i < 1 || i > j || j > n {
        return Err(Error::IndexOutOfRange(format!(
            "submatrix {i}..={j} of a {n}x{n} matrix"
        )));
    }
    let len = j - i + 1;
    Ok(c.view((i - 1, i - 1), (len, len)).into_owned())
}

/// `P_j^i[X]`: an `n x n` zero matrix with `X` placed at rows/cols `i..`.
pub fn embed(x: &ComplexMatrix, i: usize, n: usize) -> Result<ComplexMatrix> {
    let m = ensure_square(x)?;
    if i < 1 || i + m - 1 > n {
        return Err(Error::IndexOutOfRange(format!(
            "placing a {m}x{m} block at {i} exceeds dimension {n}"
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    out.view_mut((i - 1, i - 1), (m, m)).copy_from(x);
    Ok(out)
}

/// Keeps the central `2K+1` diagonals.
pub fn diag_band(x: &ComplexMatrix, band: BandSpec) -> ComplexMatrix {
    let k = band.memory();
    ComplexMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
        if r.abs_diff(c) <= k {
            x[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Keeps the main diagonal and the first `K` super-diagonals.
pub fn diag_band_upper(x: &ComplexMatrix, band: BandSpec) -> ComplexMatrix {
    let k = band.memory();
    ComplexMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
        if r <= c && c <= r + k {
            x[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Factors a Hermitian positive definite `P` as `U diag(D) U^H`.
///
/// Columns are eliminated from the last one backwards, so `d_n = P_nn` and
/// each earlier pivot is the Schur complement left after removing the
/// trailing block. A non-positive pivot is reported with its 1-based index.
pub fn udu_factor(p: &ComplexMatrix) -> Result<UduFactorization> {
    let p = hermitian_part(p)?;
    let n = p.nrows();
    let mut u = identity(n);
    let mut d = vec![0.0; n];
    let scale = max_abs(&p).max(f64::MIN_POSITIVE);

    for j in (0..n).rev() {
        let mut dj = p[(j, j)].re;
        for k in j + 1..n {
            dj -= u[(j, k)].norm_sqr() * d[k];
        }
        if dj.is_nan() || dj <= SINGULAR_PIVOT_TOL * scale {
            return Err(Error::NonPositivePivot {
                index: j + 1,
                pivot: dj,
            });
        }
        d[j] = dj;
        for i in 0..j {
            let mut acc = p[(i, j)];
            for k in j + 1..n {
                acc -= u[(i, k)] * d[k] * u[(j, k)].conj();
            }
            u[(i, j)] = acc / dj;
        }
    }
    Ok(UduFactorization { u, d })
}

/// Inverse of a principal submatrix, or the span that made it singular.
pub(crate) fn inverse_block(c: &ComplexMatrix, i: usize, j: usize) -> Result<ComplexMatrix> {
    let block = principal_submatrix(c, i, j)?;
    invert(&block).ok_or(Error::SingularSubmatrix { start: i, end: j })
}

/// LU inverse that refuses numerically singular input.
pub fn invert(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.nrows();
    if n == 0 {
        return Some(m.clone());
    }
    let lu = LU::new(m.clone());
    let diag = lu.u().diagonal();
    let largest = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smallest = diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if largest == 0.0 || smallest <= SINGULAR_PIVOT_TOL * largest {
        return None;
    }
    let inv = lu.try_inverse()?;
    inv.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then_some(inv)
}

/// `R^{-1}` for the `K`-band extension `R` of a Hermitian `C`.
///
/// Assembled as a sum of embedded inverses of the `(K+1)`-square principal
/// windows of `C`, minus the embedded inverses of their `K`-square overlaps.
/// The result is Hermitian and vanishes outside the central `2K+1` diagonals.
pub fn kband_extension_inverse(c: &ComplexMatrix, band: BandSpec) -> Result<ComplexMatrix> {
    let c = hermitian_part(c)?;
    let n = c.nrows();
    if n == 0 {
        return Ok(c);
    }
    let l = band.memory().min(n - 1);
    let mut r_inv = embed(&inverse_block(&c, 1, 1 + l)?, 1, n)?;
    for start in 2..=n - l {
        r_inv += embed(&inverse_block(&c, start, start + l)?, start, n)?;
        if l >= 1 {
            r_inv -= embed(&inverse_block(&c, start, start + l - 1)?, start, n)?;
        }
    }
    Ok(symmetrize(&r_inv))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let m = hermitian_part(m)?;
    if m.nrows() == 0 {
        return Err(Error::DimensionMismatch("empty matrix has no eigenvalues".into()));
    }
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Cholesky factor of a Hermitian positive definite matrix.
///
/// The complex square root never fails, so definiteness is read off the
/// factor's diagonal: a non-positive pivot shows up as a non-real or
/// non-positive entry there.
fn cholesky_pd(m: &ComplexMatrix) -> Result<Cholesky<C64, nalgebra::Dyn>> {
    let m = hermitian_part(m)?;
    let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
    let ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|z| z.re > 0.0 && z.re.is_finite() && z.im.abs() <= 1e-12 * z.re);
    if !ok {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(chol)
}

/// `log det M` for Hermitian positive definite `M`, from its Cholesky factor.
pub fn logdet_pd(m: &ComplexMatrix) -> Result<f64> {
    let chol = cholesky_pd(m)?;
    Ok(chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|z| 2.0 * z.re.ln())
        .sum())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_pd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let chol = cholesky_pd(m)?;
    Ok(symmetrize(&chol.inverse()))
}
