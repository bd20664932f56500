//! Holomorphic extension along analytic discs.

pub mod approx;
pub mod cauchy;
pub mod continuity;
pub mod isotopy;
pub mod removability;

/// max_k |a_k − b_k|.
pub(crate) fn max_dist(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
