//! Receiver synthesis: MMSE matrix, banded and block-diagonal optima, and the
//! classical `G_r = F^H F` design by projected gradient ascent.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::matcore::{
    diag_band_upper, embed, hermitian_part, identity, inverse_pd, invert, max_abs, min_eigenvalue,
    principal_submatrix, symmetrize, udu_factor, BandSpec, ComplexMatrix, C64,
};
use crate::rates::gmi_functional;

/// Eigenvalues below this count as strictly negative.
pub const INDEFINITE_THRESHOLD: f64 = -1e-10;

/// Armijo sufficient-increase constant for the classical ascent.
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

/// Partition of the `n_T` symbols into consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    sizes: Vec<usize>,
}

impl BlockSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "block sizes must be a nonempty list of positive integers, got {sizes:?}"
            )));
        }
        Ok(BlockSpec { sizes })
    }

    /// Parses `"3,3"`.
    pub fn parse(text: &str) -> Result<Self> {
        let sizes = text
            .split(',')
            .map(|t| {
                t.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidParameter(format!("invalid block size \"{}\"", t.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn check_dimension(&self, n_t: usize) -> Result<()> {
        if self.total() != n_t {
            return Err(Error::DimensionMismatch(format!(
                "block sizes {:?} sum to {}, expected {n_t}",
                self.sizes,
                self.total()
            )));
        }
        Ok(())
    }

    /// 1-based inclusive index ranges of the blocks.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        let mut start = 1;
        self.sizes
            .iter()
            .map(|&s| {
                let r = (start, start + s - 1);
                start += s;
                r
            })
            .collect()
    }
}

impl std::fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Structure {
    Banded { k: usize },
    Blocks { sizes: Vec<usize> },
    Classical { k: usize },
}

#[derive(Debug, Clone)]
pub struct ReceiverDesign {
    pub h_r: ComplexMatrix,
    pub g_r: ComplexMatrix,
    pub structure: Structure,
    pub lambda_min: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct ClassicalDesign {
    /// Upper triangular with `K` super-diagonals.
    pub f: ComplexMatrix,
    pub achieved_rate: f64,
    /// Objective at the regularized Cholesky start.
    pub initial_rate: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Smallest eigenvalue of the unconstrained banded optimum.
    pub lambda_min: f64,
}

impl ClassicalDesign {
    pub fn target(&self) -> ComplexMatrix {
        symmetrize(&(self.f.adjoint() * &self.f))
    }
}

/// `B = I - H~^H (H~ H~^H + I)^{-1} H~` with `H~ = H / sqrt(N0)`.
pub fn mmse_matrix(channel: &Channel) -> Result<ComplexMatrix> {
    let ht = channel.h.unscale(channel.n0.sqrt());
    let n_r = channel.n_r();
    let inner = inverse_pd(&(&ht * ht.adjoint() + identity(n_r)))?;
    let b = identity(channel.n_t()) - ht.adjoint() * inner * &ht;
    Ok(symmetrize(&b))
}

/// `B + jitter I`, for channels whose `B` has exactly singular windows.
pub fn regularized(b: &ComplexMatrix, jitter: f64) -> ComplexMatrix {
    b + identity(b.nrows()).scale(jitter)
}

/// Optimal banded `G_r` from the unit-upper `U diag(d) U^H` form of `I + G_r`.
///
/// Rows `1..=K` come from factoring the inverse of the leading `K x K` block
/// of `B`. Each later column `k` solves a `K x K` system on the window
/// `k-K..k-1`: `u_k = -B_w^{-1} b_{w,k}`, and `1/d_k` is the Schur complement of
/// that window in the `(K+1)`-square window ending at `k`.
pub fn optimal_target(b: &ComplexMatrix, band: BandSpec) -> Result<ComplexMatrix> {
    let b = hermitian_part(b)?;
    let n = b.nrows();
    let k = BandSpec::for_dimension(band.memory(), n)?.memory();
    let mut u = identity(n);
    let mut d = vec![0.0; n];

    if k > 0 {
        let head = invert(&principal_submatrix(&b, 1, k)?)
            .ok_or(Error::SingularSubmatrix { start: 1, end: k })?;
        let head = udu_factor(&symmetrize(&head))
            .map_err(|_| Error::SingularSubmatrix { start: 1, end: k })?;
        u.view_mut((0, 0), (k, k)).copy_from(&head.u);
        d[..k].copy_from_slice(&head.d);
    }

    for col in k + 1..=n {
        let start = col - k;
        let diag = b[(col - 1, col - 1)].re;
        let schur = if k == 0 {
            diag
        } else {
            let window = principal_submatrix(&b, start, col - 1)?;
            let rhs = b.view((start - 1, col - 1), (k, 1)).into_owned();
            let x = invert(&window)
                .ok_or(Error::SingularSubmatrix {
                    start,
                    end: col - 1,
                })?
                * &rhs;
            for i in 0..k {
                u[(start - 1 + i, col - 1)] = -x[(i, 0)];
            }
            diag - (rhs.adjoint() * x)[(0, 0)].re
        };
        if schur.is_nan() || schur <= 1e-14 * max_abs(&b) {
            return Err(Error::SingularSubmatrix { start, end: col });
        }
        d[col - 1] = 1.0 / schur;
    }

    let mut ud = u.clone();
    for (j, dj) in d.iter().enumerate() {
        ud.column_mut(j).iter_mut().for_each(|z| *z *= *dj);
    }
    let i_plus_g = &ud * u.adjoint();
    Ok(symmetrize(&(i_plus_g - identity(n))))
}

/// `H_r = (I + G_r) H^H (H H^H + N0 I)^{-1}`.
pub fn optimal_front_end(channel: &Channel, g_r: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n_t = channel.n_t();
    if g_r.shape() != (n_t, n_t) {
        return Err(Error::DimensionMismatch(format!(
            "G_r is {}x{}, channel has {n_t} inputs",
            g_r.nrows(),
            g_r.ncols()
        )));
    }
    let h = &channel.h;
    let gram = h * h.adjoint() + identity(channel.n_r()).scale(channel.n0);
    Ok((identity(n_t) + g_r) * h.adjoint() * inverse_pd(&gram)?)
}

/// Block-diagonal optimum: each block of `I + G_r` inverts the matching block of `B`.
pub fn optimal_block_target(b: &ComplexMatrix, blocks: &BlockSpec) -> Result<ComplexMatrix> {
    let b = hermitian_part(b)?;
    let n = b.nrows();
    blocks.check_dimension(n)?;
    let mut g = ComplexMatrix::zeros(n, n);
    for (start, end) in blocks.ranges() {
        let inv = inverse_pd(&principal_submatrix(&b, start, end)?)
            .map_err(|_| Error::SingularSubmatrix { start, end })?;
        g += embed(&(inv - identity(end - start + 1)), start, n)?;
    }
    Ok(symmetrize(&g))
}

pub fn lambda_min_of_target(b: &ComplexMatrix, band: BandSpec) -> Result<f64> {
    min_eigenvalue(&optimal_target(b, band)?)
}

/// Upper `F` with `F^H F = P` for positive semidefinite `P`.
///
/// Pivots at or below `tol` are set to zero together with the rest of their
/// row, which is what a rank-deficient `P` needs.
fn upper_cholesky_psd(p: &ComplexMatrix) -> ComplexMatrix {
    let n = p.nrows();
    let tol = 1e-13 * max_abs(p).max(f64::MIN_POSITIVE);
    let mut f = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let mut pivot = p[(i, i)].re;
        for k in 0..i {
            pivot -= f[(k, i)].norm_sqr();
        }
        if pivot <= tol {
            continue;
        }
        let r = pivot.sqrt();
        f[(i, i)] = C64::new(r, 0.0);
        for j in i + 1..n {
            let mut acc = p[(i, j)];
            for k in 0..i {
                acc -= f[(k, i)].conj() * f[(k, j)];
            }
            f[(i, j)] = acc / r;
        }
    }
    f
}

fn classical_objective(f: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    gmi_functional(&symmetrize(&(f.adjoint() * f)), b)
}

/// Projected gradient of the classical objective, restricted to the support of `F`.
fn projected_gradient(f: &ComplexMatrix, b: &ComplexMatrix, band: BandSpec) -> Result<ComplexMatrix> {
    let n = f.nrows();
    let inner = inverse_pd(&(identity(n) + f.adjoint() * f))?;
    let grad = (f * inner).scale(2.0) - (f * b).scale(2.0);
    Ok(diag_band_upper(&grad, band))
}

/// Best classical receiver `G_r = F^H F` with `F` upper triangular of band `K`.
///
/// Starts from the Cholesky factor of the banded optimum shifted by its most
/// negative eigenvalue, then ascends with backtracking until the largest
/// entry of the projected gradient drops below `eps`.
pub fn classical_shortener(
    b: &ComplexMatrix,
    band: BandSpec,
    eps: f64,
    max_iter: usize,
) -> Result<ClassicalDesign> {
    let b = hermitian_part(b)?;
    let n = b.nrows();
    let g_opt = optimal_target(&b, band)?;
    let lambda_min = min_eigenvalue(&g_opt)?;
    let shift = lambda_min.min(0.0);
    let start = &g_opt - identity(n).scale(shift);
    let mut f = diag_band_upper(&upper_cholesky_psd(&start), band);
    let mut value = classical_objective(&f, &b)?;
    let initial_rate = value;

    if lambda_min >= 0.0 {
        return Ok(ClassicalDesign {
            f,
            achieved_rate: value,
            initial_rate,
            converged: true,
            iterations: 0,
            lambda_min,
        });
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        let grad = projected_gradient(&f, &b, band)?;
        if max_abs(&grad) < eps {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        let slope = grad.norm_squared();
        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial = &f + grad.scale(step);
            if let Ok(v) = classical_objective(&trial, &b) {
                if v >= value + ARMIJO_C * step * slope {
                    accepted = Some((trial, v));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, v)) = accepted else {
            log::debug!("classical ascent stalled after {iterations} iterations");
            break;
        };
        f = next;
        value = v;
        iterations += 1;
    }

    Ok(ClassicalDesign {
        f,
        achieved_rate: value,
        initial_rate,
        converged,
        iterations,
        lambda_min,
    })
}

pub fn design_banded(channel: &Channel, band: BandSpec) -> Result<ReceiverDesign> {
    let b = mmse_matrix(channel)?;
    let g_r = optimal_target(&b, band)?;
    Ok(ReceiverDesign {
        h_r: optimal_front_end(channel, &g_r)?,
        lambda_min: min_eigenvalue(&g_r)?,
        g_r,
        structure: Structure::Banded { k: band.memory() },
        iterations: 0,
    })
}

pub fn design_blocks(channel: &Channel, blocks: &BlockSpec) -> Result<ReceiverDesign> {
    let b = mmse_matrix(channel)?;
    let g_r = optimal_block_target(&b, blocks)?;
    Ok(ReceiverDesign {
        h_r: optimal_front_end(channel, &g_r)?,
        lambda_min: min_eigenvalue(&g_r)?,
        g_r,
        structure: Structure::Blocks {
            sizes: blocks.sizes().to_vec(),
        },
        iterations: 0,
    })
}

pub fn design_classical(
    channel: &Channel,
    band: BandSpec,
    eps: f64,
    max_iter: usize,
) -> Result<(ReceiverDesign, ClassicalDesign)> {
    let b = mmse_matrix(channel)?;
    let classical = classical_shortener(&b, band, eps, max_iter)?;
    let g_r = classical.target();
    let design = ReceiverDesign {
        h_r: optimal_front_end(channel, &g_r)?,
        lambda_min: min_eigenvalue(&g_r)?,
        g_r,
        structure: Structure::Classical { k: band.memory() },
        iterations: classical.iterations,
    };
    Ok((design, classical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gaussian_iid, kronecker_mimo, parse_channel, ChannelSource, SAMPLE_3X4};
    use crate::matcore::{
        diag_band, from_real_rows, kband_extension_inverse, max_abs_diff, trace_re,
    };
    use crate::rates::{gmi_logdet, gmi_mismatched};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Channel {
        parse_channel(SAMPLE_3X4, 1.0, ChannelSource::Explicit).unwrap()
    }

    fn random_channel(rng: &mut ChaCha8Rng, max_t: usize) -> Channel {
        let n_t = rng.random_range(2..=max_t);
        let n_r = rng.random_range(1..=max_t);
        let n0 = 10f64.powf(rng.random_range(-2.0..1.0));
        gaussian_iid(n_r, n_t, rng.random()).unwrap().with_n0(n0).unwrap()
    }

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let err = max_abs_diff(a, b);
        assert!(err <= tol, "max deviation {err:e} > {tol:e}\n{a}\n{b}");
    }

    #[test]
    fn mmse_examples() {
        let ch = Channel::explicit(identity(2), 1.0).unwrap();
        assert_close(&mmse_matrix(&ch).unwrap(), &identity(2).scale(0.5), 1e-15);
        let ch = Channel::explicit(ComplexMatrix::zeros(3, 2), 0.7).unwrap();
        assert_close(&mmse_matrix(&ch).unwrap(), &identity(2), 0.0);

        let ch = sample();
        let ht = ch.h.unscale(ch.n0.sqrt());
        let dual = inverse_pd(&(identity(4) + ht.adjoint() * &ht)).unwrap();
        assert_close(&mmse_matrix(&ch).unwrap(), &dual, 1e-10);
    }

    #[test]
    fn sample_banded_target() {
        let b = mmse_matrix(&sample()).unwrap();
        let g = optimal_target(&b, BandSpec(1)).unwrap();
        let expected = from_real_rows(4, 4, &[
            1.3333, -1.0, 0.0, 0.0, //
            -1.0, 1.9286, 1.25, 0.0, //
            0.0, 1.25, 2.0417, 0.8333, //
            0.0, 0.0, 0.8333, 0.6667,
        ]);
        assert_close(&g, &expected, 1e-4);
        assert!(lambda_min_of_target(&b, BandSpec(1)).unwrap() < 0.0);
    }

    #[test]
    fn sample_block_target() {
        let b = mmse_matrix(&sample()).unwrap();
        let g = optimal_block_target(&b, &BlockSpec::new(vec![2, 2]).unwrap()).unwrap();
        let expected = from_real_rows(4, 4, &[
            1.3333, -1.0, 0.0, 0.0, //
            -1.0, 1.3333, 0.0, 0.0, //
            0.0, 0.0, 1.4167, 0.8333, //
            0.0, 0.0, 0.8333, 0.6667,
        ]);
        assert_close(&g, &expected, 1e-4);
        assert!(min_eigenvalue(&g).unwrap() > -1e-10);
    }

    #[test]
    fn target_trivial_cases() {
        let ch = Channel::explicit(identity(2), 1.0).unwrap();
        let b = mmse_matrix(&ch).unwrap();
        assert_close(&optimal_target(&b, BandSpec(0)).unwrap(), &identity(2), 1e-14);

        let ch = gaussian_iid(4, 5, 12).unwrap();
        let b = mmse_matrix(&ch).unwrap();
        let full = optimal_target(&b, BandSpec(4)).unwrap() + identity(5);
        assert_close(&full, &inverse_pd(&b).unwrap(), 1e-9);
        assert!(optimal_target(&b, BandSpec(5)).is_err());
    }

    #[test]
    fn front_end_examples() {
        let ch = Channel::explicit(identity(3), 1.0).unwrap();
        let hr = optimal_front_end(&ch, &ComplexMatrix::zeros(3, 3)).unwrap();
        assert_close(&hr, &identity(3).scale(0.5), 1e-15);
        let ch = Channel::explicit(ComplexMatrix::zeros(2, 3), 1.0).unwrap();
        let hr = optimal_front_end(&ch, &identity(3)).unwrap();
        assert_eq!(max_abs(&hr), 0.0);
    }

    #[test]
    fn front_end_is_stationary() {
        let ch = gaussian_iid(3, 4, 77).unwrap().with_n0(0.5).unwrap();
        let b = mmse_matrix(&ch).unwrap();
        let g = optimal_target(&b, BandSpec(1)).unwrap();
        let hr = optimal_front_end(&ch, &g).unwrap();
        let base = gmi_mismatched(&ch, &hr, &g).unwrap();
        assert!((base - gmi_logdet(&g).unwrap()).abs() < 1e-9);
        let delta = 1e-4;
        for r in 0..4 {
            for c in 0..3 {
                for dir in [C64::new(delta, 0.0), C64::new(-delta, 0.0), C64::new(0.0, delta), C64::new(0.0, -delta)] {
                    let mut p = hr.clone();
                    p[(r, c)] += dir;
                    let v = gmi_mismatched(&ch, &p, &g).unwrap();
                    assert!(v < base, "perturbing ({r},{c}) raised the rate");
                }
            }
        }
    }

    #[test]
    fn block_trivial_cases() {
        let ch = gaussian_iid(3, 4, 5).unwrap();
        let b = mmse_matrix(&ch).unwrap();
        let whole = optimal_block_target(&b, &BlockSpec::new(vec![4]).unwrap()).unwrap();
        assert_close(&whole, &optimal_target(&b, BandSpec(3)).unwrap(), 1e-9);
        let singles = optimal_block_target(&b, &BlockSpec::new(vec![1; 4]).unwrap()).unwrap();
        assert_close(&singles, &optimal_target(&b, BandSpec(0)).unwrap(), 1e-12);
        for i in 0..4 {
            assert!((singles[(i, i)].re - (1.0 / b[(i, i)].re - 1.0)).abs() < 1e-12);
        }
        assert!(optimal_block_target(&b, &BlockSpec::new(vec![2, 1]).unwrap()).is_err());
    }

    #[test]
    fn block_spec_parsing() {
        let spec = BlockSpec::parse("3, 3").unwrap();
        assert_eq!(spec.sizes(), &[3, 3]);
        assert_eq!(spec.ranges(), vec![(1, 3), (4, 6)]);
        assert_eq!(spec.to_string(), "3,3");
        assert!(BlockSpec::parse("2,0").is_err());
        assert!(BlockSpec::parse("a").is_err());
    }

    #[test]
    fn lambda_min_examples() {
        let ch = Channel::explicit(identity(4).scale(1.7), 0.3).unwrap();
        let b = mmse_matrix(&ch).unwrap();
        for k in 0..4 {
            assert!(lambda_min_of_target(&b, BandSpec(k)).unwrap() >= 0.0);
        }
        let b = mmse_matrix(&gaussian_iid(3, 5, 1).unwrap()).unwrap();
        let lam = lambda_min_of_target(&b, BandSpec(4)).unwrap();
        let direct = min_eigenvalue(&(inverse_pd(&b).unwrap() - identity(5))).unwrap();
        assert!(lam >= -1e-12 && (lam - direct).abs() < 1e-9);
    }

    #[test]
    fn two_route_target_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let ch = random_channel(&mut rng, 8);
            let b = mmse_matrix(&ch).unwrap();
            for k in 0..ch.n_t() {
                let band = BandSpec(k);
                let g = optimal_target(&b, band).unwrap();
                let via_ext = kband_extension_inverse(&b, band).unwrap();
                let i_plus_g = &g + identity(ch.n_t());
                let scale = max_abs(&i_plus_g).max(1.0);
                assert!(max_abs_diff(&i_plus_g, &via_ext) <= 1e-9 * scale);

                let recovered = inverse_pd(&i_plus_g).unwrap();
                assert!(max_abs_diff(&diag_band(&recovered, band), &diag_band(&b, band)) < 1e-9);
                assert!((trace_re(&(&i_plus_g * &b)) - ch.n_t() as f64).abs() < 1e-8);
                assert!(max_abs_diff(&diag_band(&g, band), &g) <= 1e-12 * max_abs(&g));
            }
        }
    }

    #[test]
    fn block_targets_are_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let ch = random_channel(&mut rng, 7);
            let n = ch.n_t();
            let mut sizes = Vec::new();
            let mut left = n;
            while left > 0 {
                let s = rng.random_range(1..=left);
                sizes.push(s);
                left -= s;
            }
            let b = mmse_matrix(&ch).unwrap();
            let g = optimal_block_target(&b, &BlockSpec::new(sizes).unwrap()).unwrap();
            assert!(min_eigenvalue(&g).unwrap() > -1e-10);
        }
    }

    #[test]
    fn banded_optimum_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let ch = random_channel(&mut rng, 5);
            let b = mmse_matrix(&ch).unwrap();
            let n = ch.n_t();
            for k in 0..n {
                let g = optimal_target(&b, BandSpec(k)).unwrap();
                let base = gmi_functional(&g, &b).unwrap();
                for r in 0..n {
                    for c in r..n.min(r + k + 1) {
                        let dirs: &[C64] = if r == c {
                            &[C64::new(1.0, 0.0)]
                        } else {
                            &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]
                        };
                        for dir in dirs {
                            for sign in [1e-5, -1e-5] {
                                let mut p = g.clone();
                                p[(r, c)] += dir * sign;
                                if r != c {
                                    p[(c, r)] += dir.conj() * sign;
                                }
                                let v = gmi_functional(&p, &b).unwrap();
                                assert!(v <= base + 1e-9, "({r},{c}) gained {:e}", v - base);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn classical_without_negative_eigenvalues() {
        let ch = Channel::explicit(identity(3).scale(1.2), 0.5).unwrap();
        let b = mmse_matrix(&ch).unwrap();
        let design = classical_shortener(&b, BandSpec(1), 1e-6, 200).unwrap();
        assert_eq!(design.iterations, 0);
        assert!(design.converged);
        let g = optimal_target(&b, BandSpec(1)).unwrap();
        assert!((design.achieved_rate - gmi_logdet(&g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn classical_on_indefinite_sample() {
        let b = mmse_matrix(&sample()).unwrap();
        let band = BandSpec(1);
        let design = classical_shortener(&b, band, 1e-6, 200).unwrap();
        let optimum = gmi_logdet(&optimal_target(&b, band).unwrap()).unwrap();
        assert!(design.lambda_min < 0.0);
        assert!(design.converged);
        assert!(design.achieved_rate >= design.initial_rate);
        assert!(design.achieved_rate <= optimum + 1e-10);
        assert_eq!(diag_band_upper(&design.f, band), design.f);
    }

    #[test]
    fn classical_on_correlated_channels() {
        let band = BandSpec(1);
        let mut seen = 0;
        for seed in 0..200 {
            let ch = kronecker_mimo(5, 5, 0.5, seed).unwrap().with_n0(10f64.powf(0.5)).unwrap();
            let b = mmse_matrix(&ch).unwrap();
            let design = classical_shortener(&b, band, 1e-6, 200).unwrap();
            if design.lambda_min >= INDEFINITE_THRESHOLD {
                continue;
            }
            seen += 1;
            let optimum = gmi_logdet(&optimal_target(&b, band).unwrap()).unwrap();
            assert!(design.achieved_rate >= 0.99 * optimum);
            assert!(design.achieved_rate <= optimum + 1e-10);
            assert!(design.achieved_rate >= design.initial_rate - 1e-12);
        }
        assert!(seen > 5, "only {seen} indefinite draws");
    }

    #[test]
    fn psd_cholesky_handles_rank_deficiency() {
        let v = from_real_rows(3, 1, &[1.0, 2.0, -1.0]);
        let p = &v * v.adjoint();
        let f = upper_cholesky_psd(&p);
        assert_close(&(f.adjoint() * &f), &p, 1e-12);
    }
}
