//! Random periodic compression: minimal block sizes and Monte Carlo checks
//! of the probability-one admissibility threshold `Q <= M^2 B`, where `B`
//! counts the distinct compressed blocks (`2L - 1` in general).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::admissibility::general_rank;
use crate::error::{domain, Error, Result};
use crate::htbasis::{basis_for, BasisKind, HTBasis};
use crate::linalg::C64;
use crate::scheme::SamplingScheme;

/// Covariance subspace targeted by a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    Toeplitz,
    Circulant,
    Banded(usize),
    /// Caller-supplied basis of the given dimension.
    Custom(usize),
}

impl Subspace {
    /// Basis dimension `Q` on an ambient space of size `k`.
    pub fn dim(&self, k: usize) -> usize {
        match *self {
            Subspace::Toeplitz => 2 * k - 1,
            Subspace::Circulant => k,
            Subspace::Banded(d) => 2 * d + 1,
            Subspace::Custom(q) => q,
        }
    }

    /// Number of compressed blocks `Phi B_delta Phi^H` that carry distinct
    /// equations for block length `n` and `l` blocks. Circulant blocks repeat
    /// with period `l`; banded blocks vanish beyond lag `d`.
    pub fn distinct_blocks(&self, n: usize, l: usize) -> usize {
        match *self {
            Subspace::Circulant => l,
            Subspace::Banded(d) => 2 * (l - 1).min(d.div_ceil(n)) + 1,
            Subspace::Toeplitz | Subspace::Custom(_) => 2 * l - 1,
        }
    }

    pub fn kind(&self) -> BasisKind {
        match *self {
            Subspace::Toeplitz => BasisKind::Toeplitz,
            Subspace::Circulant => BasisKind::Circulant,
            Subspace::Banded(d) => BasisKind::Banded(d),
            Subspace::Custom(_) => BasisKind::Custom,
        }
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subspace::Custom(q) => write!(f, "custom:{q}"),
            other => other.kind().fmt(f),
        }
    }
}

impl FromStr for Subspace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(q) = s.strip_prefix("custom:") {
            return q
                .parse()
                .map(Subspace::Custom)
                .map_err(|_| Error::Domain(format!("bad subspace `{s}`")));
        }
        Ok(match s.parse::<BasisKind>()? {
            BasisKind::Toeplitz => Subspace::Toeplitz,
            BasisKind::Circulant => Subspace::Circulant,
            BasisKind::Banded(d) => Subspace::Banded(d),
            BasisKind::Custom => return domain("custom subspace needs its dimension, as custom:Q"),
        })
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionPlan {
    #[serde(rename = "N")]
    pub block_len: usize,
    #[serde(rename = "L")]
    pub blocks: usize,
    pub subspace: Subspace,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "min_M")]
    pub min_m: usize,
    pub ratio: f64,
}

/// Smallest `M` with `M^2 blocks >= Q`.
pub fn min_block_rows(q: usize, blocks: usize) -> usize {
    let w = blocks.max(1);
    let mut m = ((q as f64 / w as f64).sqrt().ceil() as usize).max(1);
    while m > 1 && (m - 1) * (m - 1) * w >= q {
        m -= 1;
    }
    while m * m * w < q {
        m += 1;
    }
    m
}

pub fn plan(block_len: usize, blocks: usize, subspace: Subspace) -> Result<CompressionPlan> {
    if block_len == 0 || blocks == 0 {
        return domain("N and L must be positive");
    }
    let k = block_len * blocks;
    match subspace {
        Subspace::Banded(d) if d >= k => {
            return domain(format!("band {d} exceeds NL-1 = {}", k - 1));
        }
        Subspace::Custom(q) if q == 0 || q > 2 * k - 1 => {
            return domain(format!("custom dimension {q} outside 1..={}", 2 * k - 1));
        }
        _ => {}
    }
    let q = subspace.dim(k);
    let min_m = min_block_rows(q, subspace.distinct_blocks(block_len, blocks));
    if min_m > block_len {
        return domain(format!("no M <= N = {block_len} reaches Q = {q}"));
    }
    Ok(CompressionPlan {
        block_len,
        blocks,
        subspace,
        q,
        min_m,
        ratio: block_len as f64 / min_m as f64,
    })
}

/// `M x N` matrix of i.i.d. standard complex normals `(x + iy)/sqrt(2)`.
pub fn gaussian_phi(m: usize, n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

pub fn draw_scheme(m: usize, n: usize, blocks: usize, seed: u64) -> Result<SamplingScheme> {
    if m == 0 || m > n {
        return domain(format!("need 1 <= M <= N, got M = {m}, N = {n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SamplingScheme::random_periodic(gaussian_phi(m, n, &mut rng), blocks)
}

/// Seed of trial `trial` at block size `m`, independent of execution order.
pub fn trial_seed(master: u64, m: usize, trial: usize) -> u64 {
    let mut z = master ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (trial as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Singular values within this many decades of the rank tolerance make a
/// trial a tolerance event.
pub const MARGIN_DECADES: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRate {
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub admissible: usize,
    pub rate: f64,
    pub tolerance_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub plan: CompressionPlan,
    pub seed: u64,
    pub rates: Vec<ThresholdRate>,
}

impl MonteCarloReport {
    pub fn rate_at(&self, m: usize) -> Option<&ThresholdRate> {
        self.rates.iter().find(|r| r.m == m)
    }
}

/// Admissibility frequencies at `M = min_M - 1` (when positive) and
/// `M = min_M` over `trials` Gaussian draws each.
pub fn monte_carlo_threshold(
    block_len: usize,
    blocks: usize,
    subspace: Subspace,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    let basis = basis_for(subspace.kind(), block_len * blocks)?;
    monte_carlo_with_basis(block_len, blocks, &basis, trials, seed)
}

pub fn monte_carlo_with_basis(
    block_len: usize,
    blocks: usize,
    basis: &HTBasis,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    if trials == 0 {
        return domain("at least one trial is required");
    }
    if basis.ambient() != block_len * blocks {
        return Err(Error::DimensionMismatch {
            expected: block_len * blocks,
            found: basis.ambient(),
        });
    }
    let subspace = match basis.kind() {
        BasisKind::Toeplitz => Subspace::Toeplitz,
        BasisKind::Circulant => Subspace::Circulant,
        BasisKind::Banded(d) => Subspace::Banded(d),
        BasisKind::Custom => Subspace::Custom(basis.dim()),
    };
    let plan = plan(block_len, blocks, subspace)?;
    let ms: Vec<usize> = [plan.min_m - 1, plan.min_m].into_iter().filter(|&m| m >= 1).collect();
    let mut rates = Vec::with_capacity(ms.len());
    for m in ms {
        let outcomes: Vec<(bool, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let scheme = draw_scheme(m, block_len, blocks, trial_seed(seed, m, t))?;
                let info = general_rank(&scheme, basis)?;
                Ok((info.rank == basis.dim(), info.is_marginal(MARGIN_DECADES)))
            })
            .collect::<Result<_>>()?;
        let admissible = outcomes.iter().filter(|o| o.0).count();
        let events = outcomes.iter().filter(|o| o.1).count();
        rates.push(ThresholdRate {
            m,
            trials,
            admissible,
            rate: admissible as f64 / trials as f64,
            tolerance_events: events,
        });
    }
    Ok(MonteCarloReport { plan, seed, rates })
}
