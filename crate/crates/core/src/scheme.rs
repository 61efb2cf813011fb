//! Linear compression schemes `y = Phi_bar x`.

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::linalg::C64;
use crate::sets::IndexSet;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingScheme {
    /// Keeps the entries at `indices` of a length-`ambient` vector.
    NonUniform { indices: IndexSet, ambient: usize },
    /// Block-diagonal `I_L (x) Phi` with `Phi` of size `M x N`.
    RandomPeriodic { phi: DMatrix<C64>, blocks: usize },
}

impl SamplingScheme {
    pub fn non_uniform(indices: IndexSet, ambient: usize) -> Result<Self> {
        if indices.is_empty() {
            return domain("a sampling set must be non-empty");
        }
        if let Some(m) = indices.largest().filter(|&m| m >= ambient) {
            return domain(format!("index {m} outside 0..{ambient}"));
        }
        Ok(SamplingScheme::NonUniform { indices, ambient })
    }

    /// Keeps every entry.
    pub fn identity(ambient: usize) -> Self {
        SamplingScheme::NonUniform {
            indices: IndexSet::range(ambient),
            ambient,
        }
    }

    pub fn random_periodic(phi: DMatrix<C64>, blocks: usize) -> Result<Self> {
        let (m, n) = phi.shape();
        if m == 0 || blocks == 0 {
            return domain("need at least one row and one block");
        }
        if m > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m,
            });
        }
        Ok(SamplingScheme::RandomPeriodic { phi, blocks })
    }

    /// Length `K` of the uncompressed vector.
    pub fn ambient(&self) -> usize {
        match self {
            SamplingScheme::NonUniform { ambient, .. } => *ambient,
            SamplingScheme::RandomPeriodic { phi, blocks } => phi.ncols() * blocks,
        }
    }

    /// Length `M_bar` of the compressed vector.
    pub fn compressed_len(&self) -> usize {
        match self {
            SamplingScheme::NonUniform { indices, .. } => indices.len(),
            SamplingScheme::RandomPeriodic { phi, blocks } => phi.nrows() * blocks,
        }
    }

    /// `K / M_bar`.
    pub fn compression_ratio(&self) -> f64 {
        self.ambient() as f64 / self.compressed_len() as f64
    }
}
