//! Identifiability of a covariance subspace from compressed observations.
//!
//! A scheme is a sampler for a basis when the compressed basis matrices stay
//! linearly independent. Non-uniform schemes reduce to the rank of the
//! matrix of basis correlation vectors restricted to the difference set;
//! general schemes use the rank of the vectorized compressed basis. The
//! Toeplitz, circulant and banded subspaces also have closed-form
//! combinatorial characterizations.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::htbasis::{banded_basis, circulant_basis, compress_basis, standard_basis, HTBasis};
use crate::linalg::{complex_rank, real_rank, RankInfo, C64};
use crate::sets::{difference_set, modular_difference_set, periodize, verify_ruler, IndexSet, Ruler};

pub use crate::scheme::SamplingScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RMatrixRank,
    VecRank,
    DeltaSetShortcut,
    ModularDeltaShortcut,
    BandedShortcut,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub method: Method,
    pub rank: usize,
    pub required: usize,
    pub kernel_dim: usize,
    pub tolerance: f64,
    #[serde(rename = "ratio")]
    pub compression_ratio: f64,
}

impl AdmissibilityReport {
    fn new(method: Method, rank: usize, required: usize, tolerance: f64, ratio: f64) -> Self {
        AdmissibilityReport {
            admissible: rank == required,
            method,
            rank,
            required,
            kernel_dim: required - rank,
            tolerance,
            compression_ratio: ratio,
        }
    }
}

fn check_indices(indices: &IndexSet, k: usize) -> Result<()> {
    if indices.is_empty() {
        return domain("index set must be non-empty");
    }
    match indices.largest() {
        Some(m) if m >= k => domain(format!("index {m} outside 0..{k}")),
        _ => Ok(()),
    }
}

/// Rows are the basis correlation vectors at the lags of `Delta(indices)`,
/// followed by their conjugates; the lag-0 row therefore appears twice.
pub fn r_matrix(indices: &IndexSet, basis: &HTBasis) -> Result<DMatrix<C64>> {
    check_indices(indices, basis.ambient())?;
    let lags = difference_set(indices);
    let d = lags.len();
    let vs = basis.vectors();
    Ok(DMatrix::from_fn(2 * d, vs.len(), |i, q| {
        let c = vs[q].as_slice()[lags.as_slice()[i % d]];
        if i < d {
            c
        } else {
            c.conj()
        }
    }))
}

pub fn is_sampler_nonuniform(indices: &IndexSet, basis: &HTBasis) -> Result<AdmissibilityReport> {
    let r = r_matrix(indices, basis)?;
    let q = basis.dim();
    let m = indices.len();
    let ratio = basis.ambient() as f64 / m as f64;
    let info = complex_rank(&r);
    let mut report = AdmissibilityReport::new(Method::RMatrixRank, info.rank, q, info.tolerance, ratio);
    // M(M-1) + 1 distinct lags at most
    if m * (m - 1) + 1 < q {
        report.admissible = false;
    }
    Ok(report)
}

/// Real `2 M_bar^2 x Q` matrix: column `q` is `[Re vec(C_q); Im vec(C_q)]`.
pub fn stacked_matrix(scheme: &SamplingScheme, basis: &HTBasis) -> Result<DMatrix<f64>> {
    let vec = vec_matrix(scheme, basis)?;
    let rows = vec.nrows();
    Ok(DMatrix::from_fn(2 * rows, vec.ncols(), |i, q| {
        let c = vec[(i % rows, q)];
        if i < rows {
            c.re
        } else {
            c.im
        }
    }))
}

/// Complex `M_bar^2 x Q` matrix with columns `vec(C_q)`.
pub fn vec_matrix(scheme: &SamplingScheme, basis: &HTBasis) -> Result<DMatrix<C64>> {
    let compressed = compress_basis(scheme, basis)?;
    let mbar = scheme.compressed_len();
    let mut out = DMatrix::from_element(mbar * mbar, basis.dim(), C64::new(0.0, 0.0));
    for (q, c) in compressed.iter().enumerate() {
        out.column_mut(q).copy_from_slice(c.as_matrix().as_slice());
    }
    Ok(out)
}

/// Rank decision and singular-value margins of the general test.
pub fn general_rank(scheme: &SamplingScheme, basis: &HTBasis) -> Result<RankInfo> {
    Ok(real_rank(&stacked_matrix(scheme, basis)?))
}

pub fn is_sampler_general(scheme: &SamplingScheme, basis: &HTBasis) -> Result<AdmissibilityReport> {
    let info = general_rank(scheme, basis)?;
    Ok(AdmissibilityReport::new(
        Method::VecRank,
        info.rank,
        basis.dim(),
        info.tolerance,
        scheme.compression_ratio(),
    ))
}

/// `Q` minus the complex rank of the vectorized compressed basis.
pub fn kernel_dimension(scheme: &SamplingScheme, basis: &HTBasis) -> Result<usize> {
    let info = complex_rank(&vec_matrix(scheme, basis)?);
    Ok(basis.dim() - info.rank)
}

pub fn is_universal(indices: &IndexSet, k: usize) -> Result<bool> {
    Ok(universal_report(indices, k)?.admissible)
}

/// Shortcut report for the full Toeplitz subspace. The rank is exact:
/// every lag `u > 0` of `Delta(S)` contributes `T_u` and `T~_u`.
pub fn universal_report(indices: &IndexSet, k: usize) -> Result<AdmissibilityReport> {
    check_indices(indices, k)?;
    let lags = difference_set(indices).len();
    let ratio = k as f64 / indices.len() as f64;
    Ok(AdmissibilityReport::new(Method::DeltaSetShortcut, 2 * lags - 1, 2 * k - 1, 0.0, ratio))
}

pub fn is_circulant_admissible(indices: &IndexSet, k: usize) -> Result<bool> {
    Ok(circulant_report(indices, k)?.admissible)
}

/// Shortcut report for the circulant subspace; its rank equals
/// `|Delta_K(S)|`.
pub fn circulant_report(indices: &IndexSet, k: usize) -> Result<AdmissibilityReport> {
    check_indices(indices, k)?;
    let lags = modular_difference_set(indices, k)?.len();
    let ratio = k as f64 / indices.len() as f64;
    Ok(AdmissibilityReport::new(Method::ModularDeltaShortcut, lags, k, 0.0, ratio))
}

pub fn is_banded_admissible(base: &IndexSet, n: usize, l: usize, d: usize) -> Result<bool> {
    Ok(banded_report(base, n, l, d)?.admissible)
}

/// Banded subspace of bandwidth `d` sampled by `periodize(base, N, L)`.
///
/// With `L >= 2` and `N <= d <= N(L-1)` this holds iff `base` is a circular
/// ruler of length `N-1`; with `L = 1` iff `Delta(base)` contains `0..=d`.
/// Other regimes use the rank test on the periodized pattern.
pub fn banded_report(base: &IndexSet, n: usize, l: usize, d: usize) -> Result<AdmissibilityReport> {
    if n == 0 || l == 0 {
        return domain("block length and block count must be positive");
    }
    let k = n * l;
    if d >= k {
        return domain(format!("band {d} exceeds {}", k - 1));
    }
    check_indices(base, n)?;
    let ratio = n as f64 / base.len() as f64;
    let q = 2 * d + 1;
    if l == 1 {
        let inside = difference_set(base).iter().filter(|&u| (1..=d).contains(&u)).count();
        return Ok(AdmissibilityReport::new(Method::BandedShortcut, 1 + 2 * inside, q, 0.0, ratio));
    }
    if (n..=n * (l - 1)).contains(&d) {
        let ruler = Ruler::circular(base.clone(), n - 1)?;
        let rank = if verify_ruler(&ruler) {
            q
        } else {
            // no closed form for the deficiency; take it from the rank test
            is_sampler_nonuniform(&periodize(base, n, l)?, &banded_basis(k, d)?)?.rank
        };
        return Ok(AdmissibilityReport::new(Method::BandedShortcut, rank, q, 0.0, ratio));
    }
    is_sampler_nonuniform(&periodize(base, n, l)?, &banded_basis(k, d)?)
}

/// Convenience: rank tests on the standard and circulant bases.
pub fn rank_universal(indices: &IndexSet, k: usize) -> Result<AdmissibilityReport> {
    is_sampler_nonuniform(indices, &standard_basis(k)?)
}

pub fn rank_circulant(indices: &IndexSet, k: usize) -> Result<AdmissibilityReport> {
    is_sampler_nonuniform(indices, &circulant_basis(k)?)
}
