//! Orthonormal polynomial basis for box detrending.
//!
//! Every box of size `s` is detrended against the same abscissae `1..=s`,
//! so the basis depends only on `(s, degree)` and is built once per scale
//! and reused across all boxes — this is the main performance lever of the
//! whole analysis. Raw Vandermonde normal equations are unusable here
//! (condition ~ s^(2m) at s ~ 10^4), so the basis is orthonormalized over
//! centered, scaled abscissae instead.

use crate::error::{Error, Result};
use crate::numeric;

/// Orthonormal polynomial columns over the abscissae `1..=len`.
#[derive(Debug, Clone)]
pub struct OrthogonalBasis {
    len: usize,
    degree: usize,
    columns: Vec<Vec<f64>>,
}

impl OrthogonalBasis {
    /// Build the basis for segments of `len` points and a degree-`degree`
    /// trend. Requires `len >= degree + 2`: one more point than the fit
    /// needs, so a residual degree of freedom always remains.
    pub fn new(len: usize, degree: usize) -> Result<Self> {
        if degree > 10 {
            return Err(Error::Param(format!(
                "polynomial degree {degree} too large (max 10)"
            )));
        }
        if len < degree + 2 {
            return Err(Error::Param(format!(
                "segment of {len} points cannot carry a degree-{degree} trend fit \
                 (need at least {})",
                degree + 2
            )));
        }
        // Centered, scaled abscissae in [-1, 1]; the spanned polynomial
        // subspace is unchanged by the affine map.
        let half = (len as f64 - 1.0) / 2.0;
        let scale = if len > 1 { 1.0 / half } else { 1.0 };
        let u: Vec<f64> = (0..len).map(|i| (i as f64 - half) * scale).collect();

        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            let mut v: Vec<f64> = u.iter().map(|&x| x.powi(k as i32)).collect();
            // Modified Gram-Schmidt, run twice; the second pass removes the
            // residue the first leaves for nearly dependent columns.
            for _ in 0..2 {
                for col in &columns {
                    let c = numeric::dot(col, &v);
                    for (vi, ci) in v.iter_mut().zip(col.iter()) {
                        *vi -= c * ci;
                    }
                }
            }
            let norm = numeric::dot(&v, &v).sqrt();
            if !(norm > 0.0) {
                return Err(Error::Param(format!(
                    "degenerate polynomial basis at len {len}, degree {k}"
                )));
            }
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            columns.push(v);
        }
        Ok(Self {
            len,
            degree,
            columns,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Projection coefficients of `segment` onto the orthonormal columns.
    pub fn coefficients(&self, segment: &[f64]) -> Vec<f64> {
        assert_eq!(segment.len(), self.len, "segment length mismatch");
        self.columns
            .iter()
            .map(|col| numeric::dot(col, segment))
            .collect()
    }

    /// Write `segment` minus its least-squares polynomial trend into `out`.
    ///
    /// Projections are subtracted column by column (a Gram-Schmidt sweep on
    /// the data itself), which is slightly more stable than reconstructing
    /// the fitted polynomial and subtracting it in one shot.
    pub fn residuals_into(&self, segment: &[f64], out: &mut [f64]) {
        assert_eq!(segment.len(), self.len, "segment length mismatch");
        assert_eq!(out.len(), self.len, "output length mismatch");
        out.copy_from_slice(segment);
        for col in &self.columns {
            let c = numeric::dot(col, out);
            for (oi, ci) in out.iter_mut().zip(col.iter()) {
                *oi -= c * ci;
            }
        }
    }

    /// Convenience allocation wrapper around [`residuals_into`].
    ///
    /// [`residuals_into`]: Self::residuals_into
    pub fn residuals(&self, segment: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        self.residuals_into(segment, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_columns() {
        let basis = OrthogonalBasis::new(257, 3).unwrap();
        for i in 0..=3 {
            for j in 0..=3 {
                let d = numeric::dot(&basis.columns[i], &basis.columns[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (d - expect).abs() < 1e-13,
                    "column inner product ({i},{j}) = {d}"
                );
            }
        }
    }

    #[test]
    fn exact_polynomial_has_zero_residuals() {
        // Degree-2 input, degree-2 fit: residuals vanish to machine scale.
        let s = 101;
        let basis = OrthogonalBasis::new(s, 2).unwrap();
        let seg: Vec<f64> = (1..=s)
            .map(|i| {
                let t = i as f64;
                3.0 - 0.5 * t + 0.02 * t * t
            })
            .collect();
        let res = basis.residuals(&seg);
        let scale = seg.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for r in res {
            assert!(r.abs() < 1e-10 * scale.max(1.0), "residual {r}");
        }
    }

    #[test]
    fn large_segment_stays_conditioned() {
        // At s ~ 10^4 a raw Vandermonde fit would be hopeless; the
        // orthogonal basis must still null out an exact cubic.
        let s = 12_000;
        let basis = OrthogonalBasis::new(s, 3).unwrap();
        let seg: Vec<f64> = (1..=s)
            .map(|i| {
                let t = i as f64;
                1e3 + t - 1e-4 * t * t + 1e-9 * t * t * t
            })
            .collect();
        let res = basis.residuals(&seg);
        let scale = seg.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for r in res {
            assert!(r.abs() < 1e-9 * scale, "residual {r} vs scale {scale}");
        }
    }

    #[test]
    fn too_short_segment_rejected() {
        assert!(OrthogonalBasis::new(3, 2).is_err());
        assert!(OrthogonalBasis::new(4, 2).is_ok());
    }
}
