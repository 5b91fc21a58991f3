//! Shared fluctuation engine.
//!
//! One pass computes any number of variance and covariance surfaces over
//! the same scale grid. Per scale the polynomial basis is built once, every
//! involved series is detrended once per box, and each requested statistic
//! is a compensated dot product of cached residuals.
//!
//! Determinism contract: scales are distributed over threads, but all
//! reductions inside a scale run in fixed box order with compensated
//! accumulation, so the output is a pure function of (inputs, config)
//! regardless of thread count.

use rayon::prelude::*;

use super::basis::OrthogonalBasis;
use super::{AnalysisConfig, Q_ZERO_EPS};
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};

/// Raw per-statistic grid produced by [`analyze`].
pub(super) struct SurfaceData {
    pub scales: Vec<usize>,
    /// Row-major `(q, s)`.
    pub values: Vec<f64>,
    pub boxes_total: Vec<usize>,
    pub boxes_excluded: Vec<usize>,
}

/// Per-scale slice of every requested statistic's column.
struct ScaleColumn {
    boxes_total: usize,
    /// `[stat][q] -> (value, excluded)`
    moments: Vec<Vec<(f64, usize)>>,
}

pub(super) fn analyze(
    series: &[&[f64]],
    stats: &[(usize, usize)],
    cfg: &AnalysisConfig,
) -> Result<Vec<SurfaceData>> {
    let len = series[0].len();
    let scales = cfg.resolve_scales(len)?;

    let profiles: Vec<Vec<f64>> = series
        .iter()
        .map(|x| {
            if cfg.demean {
                super::profile_demeaned(x)
            } else {
                super::profile(x)
            }
        })
        .collect::<Result<_>>()?;

    let columns: Vec<ScaleColumn> = scales
        .par_iter()
        .map(|&s| scale_column(&profiles, stats, s, len, cfg))
        .collect::<Result<_>>()?;

    let (n_q, n_s) = (cfg.q_values.len(), scales.len());
    let mut out: Vec<SurfaceData> = (0..stats.len())
        .map(|_| SurfaceData {
            scales: scales.clone(),
            values: vec![f64::NAN; n_q * n_s],
            boxes_total: vec![0; n_s],
            boxes_excluded: vec![0; n_q * n_s],
        })
        .collect();
    for (si, col) in columns.into_iter().enumerate() {
        for (stat_i, stat_moments) in col.moments.into_iter().enumerate() {
            let data = &mut out[stat_i];
            data.boxes_total[si] = col.boxes_total;
            for (qi, (value, excluded)) in stat_moments.into_iter().enumerate() {
                data.values[qi * n_s + si] = value;
                data.boxes_excluded[qi * n_s + si] = excluded;
            }
        }
    }
    Ok(out)
}

fn scale_column(
    profiles: &[Vec<f64>],
    stats: &[(usize, usize)],
    s: usize,
    len: usize,
    cfg: &AnalysisConfig,
) -> Result<ScaleColumn> {
    let m_s = len / s;
    if m_s == 0 {
        return Err(Error::Param(format!("scale {s} exceeds series length {len}")));
    }
    let n_boxes = 2 * m_s;
    let basis = OrthogonalBasis::new(s, cfg.degree)?;

    // Residual scratch per series, reused across boxes.
    let mut residuals: Vec<Vec<f64>> = vec![vec![0.0; s]; profiles.len()];
    // f² per statistic per box, in box order.
    let mut f2: Vec<Vec<f64>> = vec![vec![0.0; n_boxes]; stats.len()];

    for nu in 0..n_boxes {
        // First M_s boxes tile from the front, the rest from the back.
        let start = if nu < m_s {
            nu * s
        } else {
            len - (nu - m_s + 1) * s
        };
        let range = start..start + s;
        for (u, profile) in profiles.iter().enumerate() {
            basis.residuals_into(&profile[range.clone()], &mut residuals[u]);
        }
        for (k, &(a, b)) in stats.iter().enumerate() {
            f2[k][nu] = numeric::dot(&residuals[a], &residuals[b]) / s as f64;
        }
    }

    let moments = f2
        .iter()
        .map(|stat_f2| {
            cfg.q_values
                .iter()
                .map(|&q| q_moment(stat_f2, q))
                .collect()
        })
        .collect();
    Ok(ScaleColumn {
        boxes_total: n_boxes,
        moments,
    })
}

/// Fold the per-box `f²` values into `F_q` for one moment order.
///
/// Boxes with `|f²| = 0` are dropped from the sum when `q <= 0` (their
/// power or logarithm diverges) and counted as excluded; the mean runs over
/// the retained boxes. For `q > 0` such boxes contribute an exact zero and
/// stay in. When every box is excluded the value is NaN.
///
/// `q = 0` uses the logarithmic limit `exp{ mean(sign ln|f²|) / 2 }`; for
/// non-negative `f²` this is the classical geometric-mean form, and the
/// signed variant is a convention (flagged to fitting code, which skips
/// q = 0 by default).
fn q_moment(f2: &[f64], q: f64) -> (f64, usize) {
    if q.abs() < Q_ZERO_EPS {
        let mut acc = CompensatedSum::new();
        let mut used = 0usize;
        for &v in f2 {
            if v != 0.0 {
                acc.add(numeric::sign(v) * v.abs().ln());
                used += 1;
            }
        }
        if used == 0 {
            return (f64::NAN, f2.len());
        }
        let value = (acc.value() / (2.0 * used as f64)).exp();
        (value, f2.len() - used)
    } else {
        let half_q = q / 2.0;
        let mut acc = CompensatedSum::new();
        let mut excluded = 0usize;
        for &v in f2 {
            if v == 0.0 {
                if q < 0.0 {
                    excluded += 1;
                }
                // q > 0: |0|^(q/2) = 0 contributes nothing.
                continue;
            }
            acc.add(numeric::sign(v) * v.abs().powf(half_q));
        }
        let used = f2.len() - excluded;
        if used == 0 {
            return (f64::NAN, excluded);
        }
        let mean_q = acc.value() / used as f64;
        let value = numeric::sign(mean_q) * mean_q.abs().powf(1.0 / q);
        (value, excluded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_moment_excludes_zero_boxes_at_negative_q() {
        let f2 = [1.0, 0.0, 4.0, 0.0];
        let (v, excl) = q_moment(&f2, -2.0);
        // mean of {1^-1, 4^-1} = 0.625; F = 0.625^(-1/2)
        assert!((v - 0.625f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(excl, 2);
    }

    #[test]
    fn q_moment_keeps_zero_boxes_at_positive_q() {
        let f2 = [1.0, 0.0, 4.0, 0.0];
        let (v, excl) = q_moment(&f2, 2.0);
        // mean of {1, 0, 4, 0} = 1.25; F = sqrt(1.25)
        assert!((v - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(excl, 0);
    }

    #[test]
    fn q_moment_zero_is_geometric_mean() {
        let f2 = [1.0, 4.0];
        let (v, excl) = q_moment(&f2, 0.0);
        // exp(mean(ln f²)/2) = exp((0 + ln 4)/4) = 4^(1/4) = sqrt(2)
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(excl, 0);
    }

    #[test]
    fn q_moment_all_zero_is_nan() {
        let f2 = [0.0, 0.0];
        let (v, excl) = q_moment(&f2, -1.0);
        assert!(v.is_nan());
        assert_eq!(excl, 2);
    }

    #[test]
    fn q_moment_sign_preserved_for_negative_mean() {
        let f2 = [-4.0, -1.0];
        let (v, _) = q_moment(&f2, 2.0);
        // mean of sign|f²| = -2.5; F = sign * sqrt(2.5)
        assert!((v + 2.5f64.sqrt()).abs() < 1e-15);
    }
}
