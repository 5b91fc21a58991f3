//! Power-law fits of fluctuation surfaces.
//!
//! For each moment order q the fluctuation function is fit as
//! `ln F = exponent · ln s + c` over a scale window. An exponent is only
//! reported where the fit is trustworthy: at least `min_scales` unmasked
//! scales in range and R² at or above the quality gate. Negative MFCCA
//! values are masked before fitting (they have no logarithm); masking
//! flags cells but never alters stored values.

use crate::error::{Error, Result};
use crate::fractal::{AnalysisMode, FluctuationSurface, Q_ZERO_EPS};
use crate::ingest::{QuantityKind, QuantitySeries};
use crate::numeric;

/// Options for [`fit_exponents`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Scale window `[s_lo, s_hi]` (inclusive, in box-size units). `None`
    /// keeps the central part of the grid by trimming the 3 smallest and 3
    /// largest scales.
    pub range: Option<(f64, f64)>,
    /// Minimum R² for an exponent to count as defined.
    pub quality_gate: f64,
    /// Minimum number of unmasked scales in range.
    pub min_scales: usize,
    /// Fit the q = 0 column too. Off by default: its logarithmic-limit
    /// value is a convention, reported in surfaces but kept out of spectra.
    pub include_q0: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            range: None,
            quality_gate: 0.98,
            min_scales: 6,
            include_q0: false,
        }
    }
}

/// Number of scales trimmed from each end of the grid when no explicit fit
/// range is given.
pub const DEFAULT_TRIM: usize = 3;

/// Fit result for one moment order.
#[derive(Debug, Clone, Copy)]
pub struct QFit {
    pub q: f64,
    /// Slope of `ln F` vs `ln s`: h(q) for MFDFA, λ(q) for MFCCA.
    /// NaN when undefined.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Scales that entered the fit.
    pub n_scales: usize,
    /// In-range cells skipped: masked, non-positive, or non-finite F.
    pub masked: usize,
    /// Whether the exponent passes the quality gate.
    pub defined: bool,
}

/// Fitted exponent spectrum of one surface.
#[derive(Debug, Clone)]
pub struct ScalingSpectrum {
    pub mode: AnalysisMode,
    pub fits: Vec<QFit>,
    /// Actual scale window used, in box-size units.
    pub fit_range: (usize, usize),
    pub quality_gate: f64,
}

impl ScalingSpectrum {
    pub fn q_values(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.q).collect()
    }

    /// Exponent at the grid entry equal to `q`, if defined.
    pub fn exponent_at(&self, q: f64) -> Option<f64> {
        self.fits
            .iter()
            .find(|f| f.q.to_bits() == q.to_bits() && f.defined)
            .map(|f| f.exponent)
    }

    /// Spread `max − min` of the defined exponents; `None` when nothing is
    /// defined.
    pub fn delta(&self) -> Option<f64> {
        let defined: Vec<f64> = self
            .fits
            .iter()
            .filter(|f| f.defined)
            .map(|f| f.exponent)
            .collect();
        if defined.is_empty() {
            return None;
        }
        let lo = defined.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = defined.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(hi - lo)
    }

    pub fn defined_count(&self) -> usize {
        self.fits.iter().filter(|f| f.defined).count()
    }

    /// Unnormalized exponent `q · h(q)` (the slope the q-th moment itself
    /// would show when scaling holds). `None` where the fit is undefined.
    pub fn unnormalized_exponent(&self, q: f64) -> Option<f64> {
        self.exponent_at(q).map(|h| q * h)
    }
}

/// Flag negative cells of an MFCCA surface as masked. Values stay in the
/// surface; only fits ignore them.
pub fn mask_negative(surface: &FluctuationSurface) -> Result<FluctuationSurface> {
    if surface.mode() != AnalysisMode::Mfcca {
        return Err(Error::Kind(
            "mask_negative applies to MFCCA surfaces only".into(),
        ));
    }
    let mut out = surface.clone();
    for qi in 0..surface.q_values().len() {
        for si in 0..surface.scales().len() {
            if surface.value(qi, si) < 0.0 {
                out.mask_cell(qi, si);
            }
        }
    }
    Ok(out)
}

/// Least-squares power-law fit per q column.
pub fn fit_exponents(surface: &FluctuationSurface, opts: &FitOptions) -> Result<ScalingSpectrum> {
    let scales = surface.scales();
    if scales.len() < 2 {
        return Err(Error::Shape(format!(
            "need at least 2 scales to fit, surface has {}",
            scales.len()
        )));
    }
    let in_range: Vec<usize> = match opts.range {
        Some((lo, hi)) => {
            if !(lo <= hi) {
                return Err(Error::Param(format!("empty fit range {lo}:{hi}")));
            }
            (0..scales.len())
                .filter(|&si| (scales[si] as f64) >= lo && (scales[si] as f64) <= hi)
                .collect()
        }
        None => {
            if scales.len() > 2 * DEFAULT_TRIM + 2 {
                (DEFAULT_TRIM..scales.len() - DEFAULT_TRIM).collect()
            } else {
                (0..scales.len()).collect()
            }
        }
    };
    if in_range.len() < 2 {
        return Err(Error::Param(
            "fit range keeps fewer than 2 scales of the surface grid".into(),
        ));
    }
    let fit_range = (scales[in_range[0]], scales[*in_range.last().unwrap()]);

    let fits = surface
        .q_values()
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let mut ln_s = Vec::with_capacity(in_range.len());
            let mut ln_f = Vec::with_capacity(in_range.len());
            let mut masked = 0usize;
            for &si in &in_range {
                let f = surface.value(qi, si);
                let usable = !surface.is_masked(qi, si)
                    && f.is_finite()
                    && f > 0.0
                    && surface.boxes_used(qi, si) > 0;
                if usable {
                    ln_s.push((scales[si] as f64).ln());
                    ln_f.push(f.ln());
                } else {
                    masked += 1;
                }
            }
            let q_allowed = opts.include_q0 || q.abs() >= Q_ZERO_EPS;
            match numeric::line_fit(&ln_s, &ln_f) {
                Some(fit) => QFit {
                    q,
                    exponent: fit.slope,
                    intercept: fit.intercept,
                    r_squared: fit.r_squared,
                    n_scales: ln_s.len(),
                    masked,
                    defined: q_allowed
                        && ln_s.len() >= opts.min_scales
                        && fit.r_squared >= opts.quality_gate,
                },
                None => QFit {
                    q,
                    exponent: f64::NAN,
                    intercept: f64::NAN,
                    r_squared: f64::NAN,
                    n_scales: ln_s.len(),
                    masked,
                    defined: false,
                },
            }
        })
        .collect();

    Ok(ScalingSpectrum {
        mode: surface.mode(),
        fits,
        fit_range,
        quality_gate: opts.quality_gate,
    })
}

/// Average generalized Hurst exponent `(h_x(q) + h_y(q)) / 2` per q, defined
/// only where both inputs are defined.
pub fn average_hurst(a: &ScalingSpectrum, b: &ScalingSpectrum) -> Result<Vec<(f64, Option<f64>)>> {
    if a.fits.len() != b.fits.len()
        || a.fits
            .iter()
            .zip(&b.fits)
            .any(|(x, y)| x.q.to_bits() != y.q.to_bits())
    {
        return Err(Error::Shape("q grids differ between spectra".into()));
    }
    Ok(a.fits
        .iter()
        .zip(&b.fits)
        .map(|(x, y)| {
            let value = if x.defined && y.defined {
                Some(0.5 * (x.exponent + y.exponent))
            } else {
                None
            };
            (x.q, value)
        })
        .collect())
}

/// Concatenation of per-instrument series into one long signal.
#[derive(Debug, Clone)]
pub struct JoinedSeries {
    pub kind: QuantityKind,
    pub dt_minutes: u32,
    pub values: Vec<f64>,
    /// End offset of each instrument segment; strictly increasing, last
    /// entry equals `values.len()`.
    pub boundaries: Vec<usize>,
    pub instruments: Vec<String>,
    /// Shortest contributing segment: box sizes above it probe
    /// cross-instrument structure, where fluctuation plots are expected to
    /// flatten.
    pub min_segment_len: usize,
}

impl JoinedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Concatenate series of one quantity kind in the order given by
/// `instrument_order`. Every listed instrument must be present exactly once
/// and all series must share kind and interval length.
pub fn join_series(series: &[QuantitySeries], instrument_order: &[String]) -> Result<JoinedSeries> {
    if series.is_empty() {
        return Err(Error::Shape("no series to join".into()));
    }
    if instrument_order.len() != series.len() {
        return Err(Error::Shape(format!(
            "order lists {} instruments, {} series given",
            instrument_order.len(),
            series.len()
        )));
    }
    let kind = series[0].kind;
    let dt = series[0].grid.dt_minutes;
    let mut values = Vec::new();
    let mut boundaries = Vec::with_capacity(series.len());
    let mut min_segment_len = usize::MAX;
    for id in instrument_order {
        let s = series
            .iter()
            .find(|s| &s.instrument == id)
            .ok_or_else(|| Error::Shape(format!("instrument '{id}' not among the series")))?;
        if s.kind != kind {
            return Err(Error::Shape(format!(
                "kind mismatch: {} is {:?}, expected {:?}",
                id, s.kind, kind
            )));
        }
        if s.grid.dt_minutes != dt {
            return Err(Error::Shape(format!(
                "interval mismatch: {} uses {} min, expected {} min",
                id, s.grid.dt_minutes, dt
            )));
        }
        min_segment_len = min_segment_len.min(s.values.len());
        values.extend_from_slice(&s.values);
        boundaries.push(values.len());
    }
    Ok(JoinedSeries {
        kind,
        dt_minutes: dt,
        values,
        boundaries,
        instruments: instrument_order.to_vec(),
        min_segment_len,
    })
}
