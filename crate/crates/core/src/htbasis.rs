//! Hermitian Toeplitz bases, stored by their correlation vectors (first
//! columns), and their compression through a sampling scheme.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, C64};
use crate::scheme::SamplingScheme;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const J: C64 = C64::new(0.0, 1.0);

/// First column of a Hermitian Toeplitz matrix. The lag-0 entry is real.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector(Vec<C64>);

impl CorrelationVector {
    pub fn new(c: Vec<C64>) -> Result<Self> {
        match c.first() {
            None => domain("correlation vector must be non-empty"),
            Some(c0) if c0.im != 0.0 => domain("lag-0 entry must be real"),
            Some(_) => Ok(CorrelationVector(c)),
        }
    }

    /// `value` at lag `lag`, zero elsewhere.
    fn unit(size: usize, lag: usize, value: C64) -> Self {
        let mut c = vec![ZERO; size];
        c[lag] = value;
        CorrelationVector(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    /// Entry `(m, n)` of the expanded matrix.
    #[inline]
    pub fn entry(&self, m: usize, n: usize) -> C64 {
        if m >= n {
            self.0[m - n]
        } else {
            self.0[n - m].conj()
        }
    }

    pub fn scaled_add(&self, alpha: f64, other: &CorrelationVector) -> CorrelationVector {
        CorrelationVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b * alpha)
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Toeplitz,
    Circulant,
    Banded(usize),
    Custom,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKind::Toeplitz => f.write_str("toeplitz"),
            BasisKind::Circulant => f.write_str("circulant"),
            BasisKind::Banded(d) => write!(f, "banded:{d}"),
            BasisKind::Custom => f.write_str("custom"),
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toeplitz" => Ok(BasisKind::Toeplitz),
            "circulant" => Ok(BasisKind::Circulant),
            "custom" => Ok(BasisKind::Custom),
            _ => match s.strip_prefix("banded:").map(str::parse) {
                Some(Ok(d)) => Ok(BasisKind::Banded(d)),
                _ => domain(format!("unknown subspace `{s}`")),
            },
        }
    }
}

/// Ordered set of real-linearly independent Hermitian Toeplitz matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HTBasis {
    vectors: Vec<CorrelationVector>,
    ambient: usize,
    kind: BasisKind,
}

impl HTBasis {
    /// Validates a caller-supplied basis: equal lengths, at most `2K-1`
    /// elements, independent over the reals.
    pub fn custom(vectors: Vec<CorrelationVector>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return domain("a basis needs at least one vector");
        };
        let k = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: v.len(),
            });
        }
        if vectors.len() > 2 * k - 1 {
            return domain(format!(
                "{} vectors exceed the dimension {} of the Toeplitz subspace",
                vectors.len(),
                2 * k - 1
            ));
        }
        // an HT matrix is a real-linear image of its correlation vector, so
        // independence can be read off the stacked [Re; Im] vectors
        let stacked = DMatrix::from_fn(2 * k, vectors.len(), |i, q| {
            let c = vectors[q].0[i % k];
            if i < k {
                c.re
            } else {
                c.im
            }
        });
        let info = linalg::real_rank(&stacked);
        if info.rank < vectors.len() {
            return domain("basis vectors are linearly dependent over the reals");
        }
        Ok(HTBasis {
            vectors,
            ambient: k,
            kind: BasisKind::Custom,
        })
    }

    pub fn vectors(&self) -> &[CorrelationVector] {
        &self.vectors
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Number of basis elements `Q`.
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Real combination `sum_q alpha_q * sigma_q`.
    pub fn combine(&self, alpha: &[f64]) -> Result<CorrelationVector> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: alpha.len(),
            });
        }
        let zero = CorrelationVector(vec![ZERO; self.ambient]);
        Ok(self
            .vectors
            .iter()
            .zip(alpha)
            .fold(zero, |acc, (v, &a)| acc.scaled_add(a, v)))
    }

    pub fn to_record(&self) -> BasisRecord {
        BasisRecord {
            kind: self.kind.to_string(),
            k: self.ambient,
            q: self.dim(),
            vectors: self
                .vectors
                .iter()
                .map(|v| v.0.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }

    pub fn from_record(rec: &BasisRecord) -> Result<Self> {
        if rec.vectors.len() != rec.q {
            return domain(format!("Q = {} but {} vectors given", rec.q, rec.vectors.len()));
        }
        let vectors = rec
            .vectors
            .iter()
            .map(|v| {
                if v.len() != rec.k {
                    return Err(Error::DimensionMismatch {
                        expected: rec.k,
                        found: v.len(),
                    });
                }
                CorrelationVector::new(v.iter().map(|&[re, im]| C64::new(re, im)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        HTBasis::custom(vectors)
    }
}

/// Serialized basis; complex entries are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub kind: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl Serialize for HTBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

/// `I`, `T_1..T_{K-1}`, then `T~_1..T~_{K-1}`. `T_u` has ones on diagonals
/// `+-u`; `T~_u` has `j` on `+u` and `-j` on `-u`, so its first column
/// carries `-j` at row `u`.
pub fn standard_basis(k: usize) -> Result<HTBasis> {
    if k == 0 {
        return domain("ambient size must be at least 1");
    }
    banded(k, k - 1, BasisKind::Toeplitz)
}

/// `I`, `C_k = T_k + T_{K-k}`, `C~_k = T~_k - T~_{K-k}` for
/// `k = 1..=(K-1)/2`, plus `T_{K/2}` when `K` is even.
pub fn circulant_basis(k: usize) -> Result<HTBasis> {
    if k == 0 {
        return domain("ambient size must be at least 1");
    }
    let half = (k - 1) / 2;
    let mut vectors = vec![CorrelationVector::unit(k, 0, ONE)];
    for lag in 1..=half {
        let mut c = vec![ZERO; k];
        c[lag] = ONE;
        c[k - lag] = ONE;
        vectors.push(CorrelationVector(c));
    }
    for lag in 1..=half {
        let mut c = vec![ZERO; k];
        c[lag] = -J;
        c[k - lag] = J;
        vectors.push(CorrelationVector(c));
    }
    if k.is_multiple_of(2) {
        vectors.push(CorrelationVector::unit(k, k / 2, ONE));
    }
    Ok(HTBasis {
        vectors,
        ambient: k,
        kind: BasisKind::Circulant,
    })
}

/// `I`, `T_1..T_d`, `T~_1..T~_d`.
pub fn banded_basis(k: usize, d: usize) -> Result<HTBasis> {
    if k == 0 || d >= k {
        return domain(format!("band {d} out of range for ambient size {k}"));
    }
    banded(k, d, BasisKind::Banded(d))
}

fn banded(k: usize, d: usize, kind: BasisKind) -> Result<HTBasis> {
    let mut vectors = Vec::with_capacity(2 * d + 1);
    vectors.push(CorrelationVector::unit(k, 0, ONE));
    vectors.extend((1..=d).map(|u| CorrelationVector::unit(k, u, ONE)));
    vectors.extend((1..=d).map(|u| CorrelationVector::unit(k, u, -J)));
    Ok(HTBasis {
        vectors,
        ambient: k,
        kind,
    })
}

/// Builds the basis named by `kind` on an ambient space of size `k`.
pub fn basis_for(kind: BasisKind, k: usize) -> Result<HTBasis> {
    match kind {
        BasisKind::Toeplitz => standard_basis(k),
        BasisKind::Circulant => circulant_basis(k),
        BasisKind::Banded(d) => banded_basis(k, d),
        BasisKind::Custom => domain("custom bases must be supplied explicitly"),
    }
}

/// Square Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.0 == self.0.adjoint()
    }
}

/// The `K x K` Hermitian Toeplitz matrix with first column `c`.
pub fn expand(c: &CorrelationVector) -> HermitianMatrix {
    let k = c.len();
    HermitianMatrix(DMatrix::from_fn(k, k, |m, n| c.entry(m, n)))
}

/// `Phi_bar * Sigma_q * Phi_bar^H` for every basis element, in basis order.
pub fn compress_basis(scheme: &SamplingScheme, basis: &HTBasis) -> Result<Vec<HermitianMatrix>> {
    if scheme.ambient() != basis.ambient() {
        return Err(Error::DimensionMismatch {
            expected: basis.ambient(),
            found: scheme.ambient(),
        });
    }
    Ok(basis
        .vectors()
        .iter()
        .map(|c| compress_one(scheme, c))
        .collect())
}

fn compress_one(scheme: &SamplingScheme, c: &CorrelationVector) -> HermitianMatrix {
    match scheme {
        SamplingScheme::NonUniform { indices, .. } => {
            let s = indices.as_slice();
            HermitianMatrix(DMatrix::from_fn(s.len(), s.len(), |i, j| c.entry(s[i], s[j])))
        }
        SamplingScheme::RandomPeriodic { phi, blocks } => {
            let (m, n) = phi.shape();
            let l = *blocks;
            // block (i, j) of Sigma depends on i - j only
            let products: Vec<DMatrix<C64>> = (0..2 * l - 1)
                .map(|t| {
                    let shift = t as isize - (l as isize - 1);
                    let block = DMatrix::from_fn(n, n, |a, b| {
                        let row = a as isize + shift * n as isize;
                        if row >= b as isize {
                            c.as_slice()[(row - b as isize) as usize]
                        } else {
                            c.as_slice()[(b as isize - row) as usize].conj()
                        }
                    });
                    phi * block * phi.adjoint()
                })
                .collect();
            let mut out = DMatrix::from_element(m * l, m * l, ZERO);
            for i in 0..l {
                for j in 0..l {
                    let p = &products[i + l - 1 - j];
                    out.view_mut((i * m, j * m), (m, m)).copy_from(p);
                }
            }
            HermitianMatrix(out)
        }
    }
}
