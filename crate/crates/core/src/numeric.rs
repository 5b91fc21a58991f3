//! Compensated floating-point primitives.
//!
//! Box sums and fluctuation-function averages run over up to ~10^7 terms;
//! plain accumulation loses digits there, so every reduction in the crate
//! goes through Neumaier-compensated sums. All helpers consume values in a
//! fixed order, which keeps results identical across thread counts.

/// Neumaier variant of Kahan summation: the compensation term also covers
/// the case where the incoming value is larger than the running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a slice.
pub fn sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Compensated arithmetic mean. Returns 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    sum(values) / values.len() as f64
}

/// Compensated dot product; panics on length mismatch.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    let mut acc = CompensatedSum::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc.add(x * y);
    }
    acc.value()
}

/// Sign with `sign(0) = 0`, matching the convention used by the signed
/// fluctuation functions.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit `y = slope * x + intercept` by least squares and report R².
///
/// A perfectly constant `y` counts as a perfect fit (slope 0, R² = 1);
/// returns `None` for fewer than two points or a degenerate x-spread.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    assert_eq!(x.len(), y.len(), "line_fit: length mismatch");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = CompensatedSum::new();
    let mut sxy = CompensatedSum::new();
    for i in 0..n {
        let dx = x[i] - mx;
        sxx.add(dx * dx);
        sxy.add(dx * (y[i] - my));
    }
    let sxx = sxx.value();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy.value() / sxx;
    let intercept = my - slope * mx;

    let mut ss_res = CompensatedSum::new();
    let mut ss_tot = CompensatedSum::new();
    for i in 0..n {
        let r = y[i] - (slope * x[i] + intercept);
        ss_res.add(r * r);
        let d = y[i] - my;
        ss_tot.add(d * d);
    }
    let ss_res = ss_res.value().max(0.0);
    let ss_tot = ss_tot.value().max(0.0);
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        // Constant y: a horizontal line reproduces it exactly.
        1.0
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}
