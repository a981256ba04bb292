//! Achievable rates in nats per channel use.
//!
//! `l(a, b)` below is `log det(I + Hbar^H Hbar / N0)` where `Hbar` is `H` with
//! columns `a..=b` (1-based) deleted. An empty range (`b < a`) deletes nothing.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_part, identity, inverse_pd, logdet_pd, trace_re, BandSpec, ComplexMatrix,
};
use crate::shortening::{mmse_matrix, optimal_target, BlockSpec};

/// Columns `k..=n` (1-based) to delete from `H`; `n < k` deletes nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRemovalSet {
    pub k: usize,
    pub n: usize,
}

impl ColumnRemovalSet {
    pub fn new(k: usize, n: usize) -> Self {
        ColumnRemovalSet { k, n }
    }

    pub fn none() -> Self {
        ColumnRemovalSet { k: 1, n: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.n < self.k
    }

    fn label(&self) -> String {
        if self.is_empty() {
            "l()".to_string()
        } else {
            format!("l[{},{}]", self.k, self.n)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTerm {
    pub label: String,
    pub value: f64,
}

/// A rate with the signed summands it was assembled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub total: f64,
    pub terms: Vec<RateTerm>,
}

impl Decomposition {
    fn from_terms(terms: Vec<RateTerm>) -> Self {
        let total = terms.iter().map(|t| t.value).sum();
        Decomposition { total, terms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub k: usize,
    pub i_full: f64,
    pub i_mmse: f64,
    pub gmi_functional: f64,
    pub gmi_logdet: f64,
    pub gmi_column_removal: f64,
    pub gmi_chain: f64,
    pub column_removal_terms: Vec<RateTerm>,
    pub chain_terms: Vec<RateTerm>,
}

/// `l(k, n)`: log det of the channel with columns `k..=n` removed.
pub fn removal_logdet(channel: &Channel, set: ColumnRemovalSet) -> Result<f64> {
    removal_logdet_gram(&channel.gram(), channel.n0, set)
}

/// `l(k, n)` from `G = H^H H`: deleting columns of `H` deletes the matching
/// rows and columns of `G`.
pub fn removal_logdet_gram(g: &ComplexMatrix, n0: f64, set: ColumnRemovalSet) -> Result<f64> {
    let n_t = g.nrows();
    if !set.is_empty() && (set.k < 1 || set.n > n_t) {
        return Err(Error::IndexOutOfRange(format!(
            "columns {}..={} of a channel with {n_t} inputs",
            set.k, set.n
        )));
    }
    let kept: Vec<usize> = (1..=n_t)
        .filter(|c| set.is_empty() || *c < set.k || *c > set.n)
        .map(|c| c - 1)
        .collect();
    if kept.is_empty() {
        return Ok(0.0);
    }
    let m = ComplexMatrix::from_fn(kept.len(), kept.len(), |r, c| g[(kept[r], kept[c])]).unscale(n0)
        + identity(kept.len());
    logdet_pd(&m)
}

/// `log det(I + H^H H / N0)`.
pub fn full_rate(channel: &Channel) -> Result<f64> {
    removal_logdet(channel, ColumnRemovalSet::none())
}

/// `log det(I + G_r) - Tr((I + G_r) B) + n_T` for any admissible `G_r`.
pub fn gmi_functional(g_r: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let g_r = hermitian_part(g_r)?;
    let n = g_r.nrows();
    if b.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "G_r is {n}x{n} but B is {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let i_plus_g = identity(n) + g_r;
    Ok(logdet_pd(&i_plus_g)? - trace_re(&(&i_plus_g * b)) + n as f64)
}

/// `log det(I + G_r)`; equals the GMI only at the optimum.
pub fn gmi_logdet(g_r: &ComplexMatrix) -> Result<f64> {
    let n = g_r.nrows();
    logdet_pd(&(identity(n) + g_r))
}

/// GMI of an arbitrary Ungerboeck receiver `(H_r, G_r)` with Gaussian inputs.
///
/// `log det(I+G_r) + 2 Re Tr(H_r H) - Tr(G_r) - Tr((I+G_r)^{-1} H_r (H H^H + N0 I) H_r^H)`.
pub fn gmi_mismatched(channel: &Channel, h_r: &ComplexMatrix, g_r: &ComplexMatrix) -> Result<f64> {
    let n_t = channel.n_t();
    let n_r = channel.n_r();
    if h_r.shape() != (n_t, n_r) || g_r.shape() != (n_t, n_t) {
        return Err(Error::DimensionMismatch(format!(
            "H_r must be {n_t}x{n_r} and G_r {n_t}x{n_t}"
        )));
    }
    let g_r = hermitian_part(g_r)?;
    let i_plus_g = identity(n_t) + &g_r;
    let h = &channel.h;
    let received = h * h.adjoint() + identity(n_r).scale(channel.n0);
    let quad = inverse_pd(&i_plus_g)? * h_r * received * h_r.adjoint();
    Ok(logdet_pd(&i_plus_g)? + 2.0 * trace_re(&(h_r * h)) - trace_re(&g_r) - trace_re(&quad))
}

fn check_memory(channel: &Channel, k: usize) -> Result<()> {
    BandSpec::for_dimension(k, channel.n_t()).map(|_| ())
}

fn term(g: &ComplexMatrix, n0: f64, set: ColumnRemovalSet, sign: f64) -> Result<RateTerm> {
    let value = sign * removal_logdet_gram(g, n0, set)?;
    let prefix = if sign < 0.0 { "-" } else { "+" };
    Ok(RateTerm {
        label: format!("{prefix}{}", set.label()),
        value,
    })
}

/// GMI of the optimal memory-`K` receiver from column-deleted log dets:
/// `l() - sum_{k=1}^{n-K} l[k,k+K] + sum_{k=2}^{n-K} l[k,k+K-1]`.
pub fn gmi_column_removal(channel: &Channel, k: usize) -> Result<Decomposition> {
    check_memory(channel, k)?;
    let n = channel.n_t();
    let (g, n0) = (channel.gram(), channel.n0);
    let mut terms = vec![term(&g, n0, ColumnRemovalSet::none(), 1.0)?];
    for s in 1..=n - k {
        terms.push(term(&g, n0, ColumnRemovalSet::new(s, s + k), -1.0)?);
    }
    for s in 2..=n - k {
        // For K = 0 the set s..=s-1 is empty and the term is l().
        terms.push(term(&g, n0, ColumnRemovalSet::new(s, s + k - 1), 1.0)?);
    }
    Ok(Decomposition::from_terms(terms))
}

/// Rate of the linear MMSE receiver: `n l() - sum_k l[k,k]`.
pub fn mmse_rate(channel: &Channel) -> Result<f64> {
    let n = channel.n_t();
    let (g, n0) = (channel.gram(), channel.n0);
    let mut rate = n as f64 * removal_logdet_gram(&g, n0, ColumnRemovalSet::none())?;
    for s in 1..=n {
        rate -= removal_logdet_gram(&g, n0, ColumnRemovalSet::new(s, s))?;
    }
    Ok(rate)
}

/// `I(Y; X_k | X_a..X_{k-1}) = l[a,k-1] - l[a,k]`.
fn conditional_mi(g: &ComplexMatrix, n0: f64, a: usize, k: usize) -> Result<RateTerm> {
    let value = removal_logdet_gram(g, n0, ColumnRemovalSet::new(a, k - 1))?
        - removal_logdet_gram(g, n0, ColumnRemovalSet::new(a, k))?;
    let label = if a == k {
        format!("I(Y;X{k})")
    } else if a + 1 == k {
        format!("I(Y;X{k}|X{a})")
    } else {
        format!("I(Y;X{k}|X{a}..X{})", k - 1)
    };
    Ok(RateTerm { label, value })
}

/// Chain rule truncated to the `K` most recent symbols. The first `K`
/// symbols condition on every predecessor they have.
pub fn gmi_chain_rule(channel: &Channel, k: usize) -> Result<Decomposition> {
    check_memory(channel, k)?;
    let (g, n0) = (channel.gram(), channel.n0);
    let terms = (1..=channel.n_t())
        .map(|s| conditional_mi(&g, n0, s.saturating_sub(k).max(1), s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition::from_terms(terms))
}

/// Block-diagonal receiver: a full chain rule inside each block and no
/// conditioning across blocks.
pub fn block_rate(channel: &Channel, blocks: &BlockSpec) -> Result<Decomposition> {
    blocks.check_dimension(channel.n_t())?;
    let (g, n0) = (channel.gram(), channel.n0);
    let mut terms = Vec::with_capacity(channel.n_t());
    for (start, end) in blocks.ranges() {
        for s in start..=end {
            terms.push(conditional_mi(&g, n0, start, s)?);
        }
    }
    Ok(Decomposition::from_terms(terms))
}

/// Every rate route for the optimal memory-`K` receiver.
pub fn rate_report(channel: &Channel, k: usize) -> Result<RateReport> {
    check_memory(channel, k)?;
    let b = mmse_matrix(channel)?;
    let g_r = optimal_target(&b, BandSpec(k))?;
    let removal = gmi_column_removal(channel, k)?;
    let chain = gmi_chain_rule(channel, k)?;
    Ok(RateReport {
        k,
        i_full: full_rate(channel)?,
        i_mmse: mmse_rate(channel)?,
        gmi_functional: gmi_functional(&g_r, &b)?,
        gmi_logdet: gmi_logdet(&g_r)?,
        gmi_column_removal: removal.total,
        gmi_chain: chain.total,
        column_removal_terms: removal.terms,
        chain_terms: chain.terms,
    })
}
