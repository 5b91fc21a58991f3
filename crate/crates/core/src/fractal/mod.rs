//! Detrended fluctuation surfaces.
//!
//! Single-series mode integrates the signal, tiles it with `2 M_s` boxes of
//! size `s` (M_s from each end), removes a degree-`m` polynomial trend per
//! box, and turns the box variances `f²(s, ν)` into fluctuation functions
//!
//! ```text
//! F^q(s) = mean over boxes of [f²(s, ν)]^(q/2),     F_q(s) = [F^q(s)]^(1/q)
//! ```
//!
//! Two-series mode replaces the variance by the signed box covariance of
//! the two detrended signals and carries the sign through both power steps:
//!
//! ```text
//! F^q_xy(s) = mean of sign[f²_xy] |f²_xy|^(q/2),
//! F_qxy(s)  = sign[F^q_xy] |F^q_xy|^(1/q)
//! ```
//!
//! Taking moduli of the detrended signals themselves instead would
//! manufacture spurious multifractal scaling for independent inputs, so the
//! covariance is always computed signed and the sign is reinstated only
//! after the modulus powers. At `q = 2` the two-series form reduces to
//! plain detrended cross-correlation analysis (DCCA).
//!
//! Both modes share one engine: a variance is the covariance of a series
//! with itself, computed through the identical code path, which makes the
//! `mfcca(x, x) == mfdfa(x)` reduction exact to the last bit.

mod basis;
mod engine;

pub use basis::OrthogonalBasis;

use crate::error::{Error, Result};
use crate::numeric;

/// Which fluctuation function a surface holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalysisMode {
    Mfdfa,
    Mfcca,
}

impl AnalysisMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnalysisMode::Mfdfa => "MFDFA",
            AnalysisMode::Mfcca => "MFCCA",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "MFDFA" => Ok(AnalysisMode::Mfdfa),
            "MFCCA" => Ok(AnalysisMode::Mfcca),
            other => Err(Error::Param(format!("unknown analysis mode '{other}'"))),
        }
    }
}

/// Values of `q` closer to zero than this take the logarithmic-limit branch.
pub const Q_ZERO_EPS: f64 = 1e-12;

/// Box-size grid: either derived from the series length or given explicitly.
#[derive(Debug, Clone)]
pub enum ScaleGrid {
    /// Geometrically spaced scales between `max(16, m + 2)` and `L / 4`.
    Auto { count: usize },
    Explicit(Vec<usize>),
}

impl Default for ScaleGrid {
    fn default() -> Self {
        ScaleGrid::Auto { count: 30 }
    }
}

/// Parameters of a fluctuation analysis.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    /// Detrending polynomial degree `m`.
    pub degree: usize,
    /// Moment orders; entries within [`Q_ZERO_EPS`] of zero are treated as
    /// the q = 0 logarithmic limit.
    pub q_values: Vec<f64>,
    pub scales: ScaleGrid,
    /// Subtract the series mean before integrating. With `m >= 1` the
    /// constant offset is removed by the box fits anyway, but demeaning
    /// keeps profile magnitudes small; `false` integrates the raw signal.
    pub demean: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            q_values: default_q_grid(),
            scales: ScaleGrid::default(),
            demean: true,
        }
    }
}

/// The default moment grid: -4 to 4 in steps of 0.5 (17 values).
pub fn default_q_grid() -> Vec<f64> {
    (-8..=8).map(|k| k as f64 * 0.5).collect()
}

impl AnalysisConfig {
    /// Resolve the scale grid for a series of length `len`, enforcing
    /// `s_min >= m + 2` and `s_max <= len / 4` (at least 8 boxes per scale).
    pub fn resolve_scales(&self, len: usize) -> Result<Vec<usize>> {
        let hard_min = self.degree + 2;
        let hard_max = len / 4;
        match &self.scales {
            ScaleGrid::Auto { count } => {
                if *count < 2 {
                    return Err(Error::Param("scale grid needs at least 2 points".into()));
                }
                let s_min = hard_min.max(16);
                if hard_max < s_min {
                    return Err(Error::Param(format!(
                        "series of length {len} too short: s_max = len/4 = {hard_max} \
                         below s_min = {s_min}"
                    )));
                }
                Ok(geometric_grid(s_min, hard_max, *count))
            }
            ScaleGrid::Explicit(scales) => {
                if scales.is_empty() {
                    return Err(Error::Param("empty scale grid".into()));
                }
                let mut scales = scales.clone();
                scales.sort_unstable();
                scales.dedup();
                if scales[0] < hard_min {
                    return Err(Error::Param(format!(
                        "scale {} below minimum {} for degree {}",
                        scales[0], hard_min, self.degree
                    )));
                }
                if *scales.last().unwrap() > hard_max {
                    return Err(Error::Param(format!(
                        "scale {} above len/4 = {}",
                        scales.last().unwrap(),
                        hard_max
                    )));
                }
                Ok(scales)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.q_values.is_empty() {
            return Err(Error::Param("empty q grid".into()));
        }
        if self.q_values.iter().any(|q| !q.is_finite()) {
            return Err(Error::Param("non-finite q value".into()));
        }
        Ok(())
    }
}

/// Geometrically spaced integer grid from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if lo >= hi {
        return vec![lo.min(hi)];
    }
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            (llo + t * (lhi - llo)).exp().round() as usize
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Integrated (cumulatively summed) signal: `out[i] = Σ_{j<=i} x[j]`.
///
/// This is the literal integration step; callers that want the conventional
/// mean-subtracted profile go through [`profile_demeaned`].
pub fn profile(x: &[f64]) -> Result<Vec<f64>> {
    cumulate(x, 0.0)
}

/// Integrated signal with the series mean removed before cumulation.
pub fn profile_demeaned(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in input series".into()));
    }
    cumulate(x, numeric::mean(x))
}

fn cumulate(x: &[f64], offset: f64) -> Result<Vec<f64>> {
    let mut acc = numeric::CompensatedSum::new();
    let mut out = Vec::with_capacity(x.len());
    for &v in x {
        if !v.is_finite() {
            return Err(Error::Data("non-finite value in input series".into()));
        }
        acc.add(v - offset);
        out.push(acc.value());
    }
    Ok(out)
}

/// One detrended box: the residuals of a profile segment after removing
/// its least-squares polynomial trend.
#[derive(Debug, Clone)]
pub struct DetrendedBox {
    residuals: Vec<f64>,
}

impl DetrendedBox {
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

/// Detrend one profile segment with a degree-`degree` polynomial fit over
/// abscissae `1..=s`.
pub fn detrend_box(segment: &[f64], degree: usize) -> Result<DetrendedBox> {
    if segment.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in profile segment".into()));
    }
    let basis = OrthogonalBasis::new(segment.len(), degree)?;
    Ok(DetrendedBox {
        residuals: basis.residuals(segment),
    })
}

/// Mean of squared residuals, `f²(s, ν)`.
pub fn box_variance(b: &DetrendedBox) -> f64 {
    numeric::dot(&b.residuals, &b.residuals) / b.residuals.len() as f64
}

/// Signed mean of residual products, `f²_xy(s, ν)`. Reduces to
/// [`box_variance`] when both boxes are the same.
pub fn box_covariance(a: &DetrendedBox, b: &DetrendedBox) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "box length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(numeric::dot(&a.residuals, &b.residuals) / a.residuals.len() as f64)
}

/// Fluctuation function values on the `(q, s)` grid.
///
/// Values are signed in MFCCA mode. Cells can be masked later by the
/// scaling stage; masking never alters the stored value.
#[derive(Debug, Clone)]
pub struct FluctuationSurface {
    mode: AnalysisMode,
    q_values: Vec<f64>,
    scales: Vec<usize>,
    /// Row-major `(q, s)`.
    values: Vec<f64>,
    masked: Vec<bool>,
    /// `2 M_s` per scale.
    boxes_total: Vec<usize>,
    /// Boxes dropped from the sum per `(q, s)` (zero |f²| under q <= 0).
    boxes_excluded: Vec<usize>,
}

impl FluctuationSurface {
    pub fn from_parts(
        mode: AnalysisMode,
        q_values: Vec<f64>,
        scales: Vec<usize>,
        values: Vec<f64>,
        boxes_total: Vec<usize>,
        boxes_excluded: Vec<usize>,
    ) -> Result<Self> {
        let cells = q_values.len() * scales.len();
        if values.len() != cells || boxes_excluded.len() != cells || boxes_total.len() != scales.len()
        {
            return Err(Error::Shape("surface grid dimensions disagree".into()));
        }
        Ok(Self {
            mode,
            q_values,
            scales,
            values,
            masked: vec![false; cells],
            boxes_total,
            boxes_excluded,
        })
    }

    pub fn mode(&self) -> AnalysisMode {
        self.mode
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    #[inline]
    fn idx(&self, qi: usize, si: usize) -> usize {
        qi * self.scales.len() + si
    }

    pub fn value(&self, qi: usize, si: usize) -> f64 {
        self.values[self.idx(qi, si)]
    }

    pub fn is_masked(&self, qi: usize, si: usize) -> bool {
        self.masked[self.idx(qi, si)]
    }

    pub fn mask_cell(&mut self, qi: usize, si: usize) {
        let i = self.idx(qi, si);
        self.masked[i] = true;
    }

    pub fn masked_count(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }

    /// Total boxes `2 M_s` at scale index `si`.
    pub fn boxes_total(&self, si: usize) -> usize {
        self.boxes_total[si]
    }

    pub fn boxes_excluded(&self, qi: usize, si: usize) -> usize {
        self.boxes_excluded[self.idx(qi, si)]
    }

    pub fn boxes_used(&self, qi: usize, si: usize) -> usize {
        self.boxes_total[si] - self.boxes_excluded(qi, si)
    }

    /// Index of the q grid entry equal to `q` (bit-for-bit via total order).
    pub fn q_index(&self, q: f64) -> Option<usize> {
        self.q_values.iter().position(|&v| v.to_bits() == q.to_bits())
    }
}

/// Single-series fluctuation analysis.
pub fn mfdfa(x: &[f64], cfg: &AnalysisConfig) -> Result<FluctuationSurface> {
    cfg.validate()?;
    let out = engine::analyze(&[x], &[(0, 0)], cfg)?;
    let data = out.into_iter().next().expect("one requested surface");
    FluctuationSurface::from_parts(
        AnalysisMode::Mfdfa,
        cfg.q_values.clone(),
        data.scales,
        data.values,
        data.boxes_total,
        data.boxes_excluded,
    )
}

/// Two-series sign-preserving fluctuation analysis.
pub fn mfcca(x: &[f64], y: &[f64], cfg: &AnalysisConfig) -> Result<FluctuationSurface> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "series length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let out = engine::analyze(&[x, y], &[(0, 1)], cfg)?;
    let data = out.into_iter().next().expect("one requested surface");
    FluctuationSurface::from_parts(
        AnalysisMode::Mfcca,
        cfg.q_values.clone(),
        data.scales,
        data.values,
        data.boxes_total,
        data.boxes_excluded,
    )
}

/// Surfaces for a set of co-indexed series analyzed together.
#[derive(Debug)]
pub struct BundleOutput {
    /// One MFDFA surface per input series, in input order.
    pub autos: Vec<FluctuationSurface>,
    /// One MFCCA surface per requested pair, in request order.
    pub crosses: Vec<FluctuationSurface>,
}

/// Analyze several co-indexed series in one pass: every series is
/// detrended once per box and the residuals are shared by all requested
/// variances and covariances. Equivalent to calling [`mfdfa`] per series
/// and [`mfcca`] per pair, at a fraction of the cost.
pub fn analyze_bundle(
    series: &[&[f64]],
    pairs: &[(usize, usize)],
    cfg: &AnalysisConfig,
) -> Result<BundleOutput> {
    cfg.validate()?;
    if series.is_empty() {
        return Err(Error::Param("empty series set".into()));
    }
    let len = series[0].len();
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::Shape("bundle series lengths differ".into()));
    }
    for &(a, b) in pairs {
        if a >= series.len() || b >= series.len() {
            return Err(Error::Param(format!("pair ({a},{b}) out of range")));
        }
    }
    let mut stats: Vec<(usize, usize)> = (0..series.len()).map(|u| (u, u)).collect();
    stats.extend_from_slice(pairs);
    let out = engine::analyze(series, &stats, cfg)?;

    let mut surfaces = out.into_iter();
    let mut autos = Vec::with_capacity(series.len());
    for _ in 0..series.len() {
        let data = surfaces.next().expect("auto surface");
        autos.push(FluctuationSurface::from_parts(
            AnalysisMode::Mfdfa,
            cfg.q_values.clone(),
            data.scales,
            data.values,
            data.boxes_total,
            data.boxes_excluded,
        )?);
    }
    let mut crosses = Vec::with_capacity(pairs.len());
    for _ in 0..pairs.len() {
        let data = surfaces.next().expect("cross surface");
        crosses.push(FluctuationSurface::from_parts(
            AnalysisMode::Mfcca,
            cfg.q_values.clone(),
            data.scales,
            data.values,
            data.boxes_total,
            data.boxes_excluded,
        )?);
    }
    Ok(BundleOutput { autos, crosses })
}
