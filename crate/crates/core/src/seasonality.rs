//! Intraday seasonality estimation and removal.
//!
//! Unsigned quantities (volatility, trading activity, volume) carry a
//! strong U-shaped intraday pattern. The pattern value of slot `j_d` is the
//! arithmetic mean of the quantity at that slot across all trading days;
//! it is removed by division, slot by slot:
//!
//! ```text
//! D(j_d) = Σ_k Z(k, j_d) / N_days,      Z'(k, j_d) = Z(k, j_d) / D(j_d)
//! ```
//!
//! which makes the per-slot day-mean of the detrended series exactly one.
//! Returns are signed and are intentionally rejected here — they pass into
//! downstream analysis untouched.

use crate::error::{Error, Result};
use crate::ingest::{QuantityKind, QuantitySeries};
use crate::numeric::CompensatedSum;

/// Per-slot intraday averages of one unsigned quantity.
#[derive(Debug, Clone)]
pub struct DailyPattern {
    pub kind: QuantityKind,
    values: Vec<f64>,
    pub n_days: usize,
}

impl DailyPattern {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slots(&self) -> usize {
        self.values.len()
    }

    /// Slots whose average is zero: every day is silent there, and
    /// detrending outputs zero at such slots instead of 0/0.
    pub fn zero_slots(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| (v == 0.0).then_some(i))
            .collect()
    }
}

/// Cross-day arithmetic mean of an unsigned quantity at each intraday slot.
pub fn daily_pattern(series: &QuantitySeries) -> Result<DailyPattern> {
    if !series.kind.is_unsigned() {
        return Err(Error::Kind(format!(
            "daily pattern is defined for unsigned quantities, not {}",
            series.kind
        )));
    }
    let slots = series.slots_per_day();
    if slots == 0 || series.values.len() % slots != 0 {
        return Err(Error::Shape(format!(
            "series length {} is not a multiple of {} slots per day",
            series.values.len(),
            slots
        )));
    }
    let n_days = series.values.len() / slots;
    let mut values = Vec::with_capacity(slots);
    for slot in 0..slots {
        let mut acc = CompensatedSum::new();
        for day in 0..n_days {
            acc.add(series.values[day * slots + slot]);
        }
        values.push(acc.value() / n_days as f64);
    }
    Ok(DailyPattern {
        kind: series.kind,
        values,
        n_days,
    })
}

/// Divide out a daily pattern. Slots with a zero pattern (silent on every
/// day) map to zero. The output keeps the grid and is flagged `detrended`.
pub fn detrend_daily(series: &QuantitySeries, pattern: &DailyPattern) -> Result<QuantitySeries> {
    if series.kind != pattern.kind {
        return Err(Error::Kind(format!(
            "pattern is for {}, series is {}",
            pattern.kind, series.kind
        )));
    }
    let slots = series.slots_per_day();
    if pattern.slots() != slots || series.values.len() % slots != 0 {
        return Err(Error::Shape(format!(
            "pattern has {} slots, grid has {}",
            pattern.slots(),
            slots
        )));
    }
    let values = series
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let d = pattern.values[i % slots];
            if d == 0.0 {
                0.0
            } else {
                v / d
            }
        })
        .collect();
    Ok(QuantitySeries {
        kind: series.kind,
        instrument: series.instrument.clone(),
        values,
        grid: series.grid.clone(),
        detrended: true,
    })
}
