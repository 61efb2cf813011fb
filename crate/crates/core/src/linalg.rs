//! Numerical rank through singular values.

use nalgebra::{DMatrix, RealField};

pub type C64 = nalgebra::Complex<f64>;

/// Singular-value summary of a rank decision with the default tolerance
/// `max(rows, cols) * eps * sigma_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub tolerance: f64,
    pub sigma_max: f64,
    /// Smallest singular value above the tolerance (0 when rank is 0).
    pub smallest_kept: f64,
    /// Largest singular value at or below the tolerance (0 when none).
    pub largest_dropped: f64,
}

impl RankInfo {
    fn from_singular_values(sv: &[f64], rows: usize, cols: usize) -> Self {
        let sigma_max = sv.iter().copied().fold(0.0, f64::max);
        let tolerance = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
        let mut info = RankInfo {
            rank: 0,
            tolerance,
            sigma_max,
            smallest_kept: 0.0,
            largest_dropped: 0.0,
        };
        let mut kept = f64::INFINITY;
        for &s in sv {
            if s > tolerance {
                info.rank += 1;
                kept = kept.min(s);
            } else {
                info.largest_dropped = info.largest_dropped.max(s);
            }
        }
        if info.rank > 0 {
            info.smallest_kept = kept;
        }
        info
    }

    /// True when a kept singular value lies within `margin` orders of
    /// magnitude above the tolerance. Dropped values are at the round-off
    /// scale `eps * sigma_max` the tolerance is built from, so they cannot
    /// tip the decision.
    pub fn is_marginal(&self, margin: f64) -> bool {
        self.sigma_max > 0.0 && self.rank > 0 && self.smallest_kept < self.tolerance * 10f64.powf(margin)
    }
}

fn rank_of<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> RankInfo
where
    f64: RealField,
{
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return RankInfo::from_singular_values(&[], rows, cols);
    }
    let sv = m.clone().singular_values();
    RankInfo::from_singular_values(sv.as_slice(), rows, cols)
}

pub fn real_rank(m: &DMatrix<f64>) -> RankInfo {
    rank_of(m)
}

pub fn complex_rank(m: &DMatrix<C64>) -> RankInfo {
    rank_of(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(real_rank(&m).rank, 1);
        assert_eq!(real_rank(&DMatrix::<f64>::identity(4, 4)).rank, 4);
        assert_eq!(real_rank(&DMatrix::<f64>::zeros(3, 3)).rank, 0);
        assert_eq!(real_rank(&DMatrix::<f64>::zeros(0, 3)).rank, 0);
        let j = C64::new(0.0, 1.0);
        let c = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), j, j, C64::new(-1.0, 0.0)]);
        assert_eq!(complex_rank(&c).rank, 1);
        // the same columns are independent over the reals
        let stacked = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, -1.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(real_rank(&stacked).rank, 2);
    }

    #[test]
    fn marginal_detection() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-14]));
        let info = real_rank(&m);
        assert_eq!(info.rank, 2);
        assert!(info.is_marginal(2.0));
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-16]));
        let info = real_rank(&m);
        assert_eq!(info.rank, 1);
        assert!(!info.is_marginal(2.0));
        let info = real_rank(&DMatrix::<f64>::identity(3, 3));
        assert!(!info.is_marginal(2.0));
    }
}
