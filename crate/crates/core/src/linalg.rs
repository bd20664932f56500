//! SVD-based rank decisions and real/complex vector plumbing.
//!
//! Vectors of C^n are identified with R^{2n} by interleaving real and
//! imaginary parts: (Re Z₁, Im Z₁, …, Re Z_n, Im Z_n).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

/// Outcome of a thresholded rank computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankDecision {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Some singular value lies within a factor 10 of the threshold.
    pub ambiguous: bool,
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank with threshold `rel_tol · scale`, where `scale` defaults to the
/// largest singular value.
pub fn rank_decision(m: &DMatrix<f64>, rel_tol: f64, scale: Option<f64>) -> RankDecision {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * scale.unwrap_or(smax);
    let rank = s.iter().filter(|&&v| v > threshold && v > 0.0).count();
    let ambiguous = threshold > 0.0
        && s.iter()
            .any(|&v| v > threshold / 10.0 && v < threshold * 10.0);
    RankDecision {
        rank,
        singular_values: s,
        threshold,
        ambiguous,
    }
}

pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    rank_decision(m, rel_tol, None).rank
}

/// Full SVD with square V, padding with zero rows when the matrix is wide.
fn full_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    // nalgebra does not sort; order descending
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)]);
    let s = order.iter().map(|&i| s[i]).collect();
    (u, s, v)
}

/// Orthonormal basis of the column space (threshold relative to σ_max).
pub fn column_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let (u, s, _) = full_svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let k = s.iter().filter(|&&v| v > rel_tol * smax && v > 0.0).count();
    u.columns(0, k).into_owned().rows(0, m.nrows()).into_owned()
}

/// Orthonormal basis of the kernel, as columns. A singular value counts as
/// zero when it is at most `rel_tol · scale` (scale defaults to σ_max).
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64, scale: Option<f64>) -> DMatrix<f64> {
    let c = m.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let (_, s, v) = full_svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = rel_tol * scale.unwrap_or(smax);
    let keep: Vec<usize> = (0..c).filter(|&j| s.get(j).is_none_or(|&v| v <= thr)).collect();
    DMatrix::from_fn(c, keep.len(), |i, j| v[(i, keep[j])])
}

/// |v − QQᵀv| / |v| for an orthonormal column set Q.
pub fn projection_residual(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let n = v.norm();
    if n == 0.0 {
        return 0.0;
    }
    if q.ncols() == 0 {
        return 1.0;
    }
    let proj = q * (q.transpose() * v);
    (v - proj).norm() / n
}

/// Sine of the largest principal angle between span(A) and the subspace
/// with orthonormal basis Q, i.e. how far span(A) is from lying in span(Q).
pub fn containment_gap(q: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let qa = column_basis(a, 1e-12);
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = if q.ncols() == 0 {
        qa.clone()
    } else {
        &qa - q * (q.transpose() * &qa)
    };
    singular_values(&resid).first().copied().unwrap_or(0.0)
}

pub fn to_real(v: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * v.len(), v.iter().flat_map(|z| [z.re, z.im]))
}

pub fn to_complex(v: &DVector<f64>) -> Vec<Complex64> {
    (0..v.len() / 2)
        .map(|i| Complex64::new(v[2 * i], v[2 * i + 1]))
        .collect()
}

/// Multiplication by i in interleaved real coordinates.
pub fn j_rotate(v: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(v.len(), |i, _| if i % 2 == 0 { -v[i + 1] } else { v[i - 1] })
}

/// The real-linear map v ↦ (Re, Im)(A v) as a 2r × 2c real matrix.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = a[(i / 2, j / 2)];
        match (i % 2, j % 2) {
            (0, 0) => z.re,
            (0, 1) => -z.im,
            (1, 0) => z.im,
            _ => z.re,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(numerical_rank(&m, 1e-10), 2);
        let n = null_space(&m, 1e-10, None);
        assert_eq!(n.ncols(), 1);
        assert!((n[(2, 0)].abs() - 1.0).abs() < 1e-14);
        assert_eq!(column_basis(&m, 1e-10).ncols(), 2);
    }

    #[test]
    fn ambiguity_flag() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3e-6]);
        let d = rank_decision(&m, 1e-6, None);
        assert_eq!(d.rank, 2);
        assert!(d.ambiguous);
    }

    #[test]
    fn realify_matches_complex_product() {
        let a = DMatrix::from_row_slice(
            1,
            2,
            &[Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)],
        );
        let v = [Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.7)];
        let direct = a[(0, 0)] * v[0] + a[(0, 1)] * v[1];
        let real = realify(&a) * to_real(&v);
        assert!((real[0] - direct.re).abs() < 1e-15);
        assert!((real[1] - direct.im).abs() < 1e-15);
        let iv: Vec<Complex64> = v.iter().map(|z| z * Complex64::i()).collect();
        assert_eq!(j_rotate(&to_real(&v)), to_real(&iv));
    }

    #[test]
    fn containment() {
        let q = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let inside = DMatrix::from_row_slice(3, 1, &[2.0, 0.0, 0.0]);
        let outside = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!(containment_gap(&q, &inside) < 1e-15);
        assert!((containment_gap(&q, &outside) - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
