//! Closed-form cardinality and compression-ratio bounds.

use serde::Serialize;

use crate::sets::RulerKind;

/// `max over theta > 0 of 2 (1 - sin(theta) / theta)`.
pub fn leech_tau() -> f64 {
    let theta = leech_argmax();
    2.0 * (1.0 - sinc(theta))
}

/// Location of the global minimum of `sin(x)/x` on `x > 0`.
///
/// For `x > 2*pi`, `|sin(x)/x| < 1/(2*pi) ~ 0.159` while the value near
/// 4.49 is about -0.217, so the minimum lies in `[pi, 2*pi]`, where the
/// function is unimodal.
pub fn leech_argmax() -> f64 {
    use std::f64::consts::PI;
    let (mut a, mut b) = (PI, 2.0 * PI);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    while b - a > 1e-12 {
        if sinc(c) < sinc(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    // polish on tan(x) = x, i.e. x cos x - sin x = 0
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let f = x * x.cos() - x.sin();
        let df = -x * x.sin();
        x -= f / df;
    }
    x
}

fn sinc(x: f64) -> f64 {
    x.sin() / x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub length: usize,
    pub kind: RulerKind,
    pub lower: usize,
    pub upper: usize,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

/// Smallest `m` with `m(m-1)/2 >= length`: the pair-counting bound for
/// linear rulers.
pub fn linear_counting_bound(length: usize) -> usize {
    (1..).find(|&m: &usize| m * (m - 1) / 2 >= length).unwrap()
}

/// Smallest `m` with `m^2 >= tau * length`.
pub fn linear_tau_bound(length: usize) -> usize {
    let t = leech_tau() * length as f64;
    let mut m = t.sqrt().ceil() as usize;
    while m > 0 && ((m - 1) * (m - 1)) as f64 >= t {
        m -= 1;
    }
    while ((m * m) as f64) < t {
        m += 1;
    }
    m
}

/// Smallest `m` with `m(m-1) + 1 >= length + 1`.
pub fn circular_counting_bound(length: usize) -> usize {
    (1..).find(|&m: &usize| m * (m - 1) >= length).unwrap()
}

/// `ceil(sqrt(x))` for integers, exact.
pub fn ceil_sqrt(x: usize) -> usize {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// Minimal linear cardinalities for lengths below the range of the
/// `ceil(sqrt(3 n))` upper bound.
const SMALL_LINEAR: [usize; 3] = [1, 2, 3];

pub fn linear_upper_bound(length: usize) -> usize {
    if length < 3 {
        SMALL_LINEAR[length]
    } else {
        ceil_sqrt(3 * length)
    }
}

/// Upper bound through the half-length linear embedding:
/// `linear_upper_bound(floor((length + 1) / 2))`.
pub fn circular_upper_bound(length: usize) -> usize {
    linear_upper_bound(length.div_ceil(2))
}

pub fn cardinality_bounds(length: usize, kind: RulerKind) -> BoundsReport {
    let n = (length + 1) as f64;
    let (lower, upper, ratio_lower, ratio_upper) = match kind {
        RulerKind::Linear => {
            let lower = linear_counting_bound(length).max(linear_tau_bound(length));
            let upper = linear_upper_bound(length);
            let ratio_upper = if length == 0 {
                1.0
            } else {
                n / (leech_tau() * length as f64).sqrt()
            };
            (lower, upper, n / upper as f64, ratio_upper)
        }
        RulerKind::Circular => {
            let lower = circular_counting_bound(length);
            let upper = circular_upper_bound(length);
            // N / M with M >= 1/2 + sqrt(N - 3/4)
            let ratio_upper = 2.0 * n / (1.0 + (4.0 * n - 3.0).sqrt());
            (lower, upper, n / upper as f64, ratio_upper)
        }
    };
    BoundsReport {
        length,
        kind,
        lower,
        upper,
        ratio_lower,
        ratio_upper,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRatios {
    #[serde(rename = "N")]
    pub block_len: usize,
    #[serde(rename = "L")]
    pub blocks: usize,
    /// Large-`N` limit for universal random sampling.
    pub rho_rs: f64,
    /// Finite-`N` value `sqrt((2L-1) N^2 / (2NL-1))`.
    pub rho_rs_finite: f64,
    pub rho_ns_low: f64,
    pub rho_ns_high: f64,
    pub rho_na: f64,
    pub c_low: f64,
    pub c_high: f64,
}

/// Compression ratios in the large-block regime. The non-uniform constant
/// is only known to lie in `[tau, 3]`, so it is reported as a bracket.
pub fn asymptotic_ratios(block_len: usize, blocks: usize) -> AsymptoticRatios {
    let n = block_len as f64;
    let l = blocks as f64;
    let tau = leech_tau();
    AsymptoticRatios {
        block_len,
        blocks,
        rho_rs: ((2.0 * l - 1.0) * n / (2.0 * l)).sqrt(),
        rho_rs_finite: ((2.0 * l - 1.0) * n * n / (2.0 * n * l - 1.0)).sqrt(),
        rho_ns_low: (n / 3.0).sqrt(),
        rho_ns_high: (n / tau).sqrt(),
        rho_na: (n / 4.0).sqrt(),
        c_low: tau,
        c_high: 3.0,
    }
}
