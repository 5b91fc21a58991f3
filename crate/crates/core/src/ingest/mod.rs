//! Tick parsing and per-interval aggregation.
//!
//! A trading session grid is `N_days` calendar days × `S` intraday slots of
//! `Δt` minutes. Ticks are assigned to half-open slots `[start, end)`; for
//! each slot `j` the aggregation produces
//!
//! * trading activity `T(j)` — number of trades,
//! * volume `V(j)` — total shares,
//! * return `R(j) = ln p_end(j) − ln p_end(j−1)` with the last known price
//!   carried through empty slots (the price is taken as unchanged between
//!   trades),
//! * volatility `|R(j)|`.
//!
//! Returns never span a day boundary: by default each day's first return is
//! measured against the day's first trade price, so the overnight gap stays
//! out of the intraday scaling. `include_overnight` switches the reference
//! to the previous day's closing price instead.
//!
//! Prices are held as exact decimal micro-units. Two ticks printed with the
//! same decimal price therefore compare equal, and an interval without a
//! price change yields a return of exactly zero — no float-parsing jitter.

mod parse;

pub use parse::{parse_ticks, ParseReport, TickFormatSpec, TimestampFormat};

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const NANOS_PER_MINUTE: i64 = 60_000_000_000;

/// One trade: time, exact decimal price, share count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickRecord {
    /// Nanoseconds since the epoch, in exchange-local wall time.
    pub timestamp_ns: i64,
    /// Price in units of 1e-6 currency; always positive.
    pub price_micros: i64,
    /// Shares; always positive.
    pub shares: u64,
}

impl TickRecord {
    pub fn price(&self) -> f64 {
        self.price_micros as f64 * 1e-6
    }

    pub fn ln_price(&self) -> f64 {
        self.price().ln()
    }

    pub fn datetime(&self) -> NaiveDateTime {
        chrono::DateTime::from_timestamp_nanos(self.timestamp_ns).naive_utc()
    }
}

/// The four per-interval quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantityKind {
    Return,
    Volatility,
    TradingActivity,
    Volume,
}

impl QuantityKind {
    /// Token used in CLI pair lists and table output.
    pub fn token(&self) -> &'static str {
        match self {
            QuantityKind::Return => "R",
            QuantityKind::Volatility => "|R|",
            QuantityKind::TradingActivity => "T",
            QuantityKind::Volume => "V",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "R" => Ok(QuantityKind::Return),
            "|R|" => Ok(QuantityKind::Volatility),
            "T" => Ok(QuantityKind::TradingActivity),
            "V" => Ok(QuantityKind::Volume),
            other => Err(Error::Kind(format!(
                "unknown quantity '{other}' (expected R, |R|, T, or V)"
            ))),
        }
    }

    /// Whether the quantity is non-negative by construction. Only unsigned
    /// quantities carry an intraday pattern worth dividing out.
    pub fn is_unsigned(&self) -> bool {
        !matches!(self, QuantityKind::Return)
    }

    pub fn all() -> [QuantityKind; 4] {
        [
            QuantityKind::Return,
            QuantityKind::Volatility,
            QuantityKind::TradingActivity,
            QuantityKind::Volume,
        ]
    }
}

impl std::fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Trading-session grid: ordered trading days, a daily `[open, close)`
/// window, and the interval length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionCalendar {
    days: Vec<NaiveDate>,
    pub open: NaiveTime,
    pub close: NaiveTime,
    pub dt_minutes: u32,
}

impl SessionCalendar {
    pub fn new(
        days: Vec<NaiveDate>,
        open: NaiveTime,
        close: NaiveTime,
        dt_minutes: u32,
    ) -> Result<Self> {
        if days.is_empty() {
            return Err(Error::Param("calendar has no trading days".into()));
        }
        if days.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Param(
                "trading days must be strictly increasing".into(),
            ));
        }
        if close <= open {
            return Err(Error::Param(format!(
                "session close {close} not after open {open}"
            )));
        }
        if dt_minutes == 0 {
            return Err(Error::Param("interval length must be positive".into()));
        }
        let session_minutes = (close - open).num_minutes() as u32;
        if session_minutes % dt_minutes != 0 {
            return Err(Error::Param(format!(
                "session of {session_minutes} min is not a multiple of dt = {dt_minutes} min"
            )));
        }
        Ok(Self {
            days,
            open,
            close,
            dt_minutes,
        })
    }

    /// Consecutive weekdays starting at `start`; handy for synthetic grids.
    pub fn synthetic(
        start: NaiveDate,
        n_days: usize,
        open: NaiveTime,
        close: NaiveTime,
        dt_minutes: u32,
    ) -> Result<Self> {
        let mut days = Vec::with_capacity(n_days);
        let mut d = start;
        while days.len() < n_days {
            if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
                days.push(d);
            }
            d = d.succ_opt().ok_or_else(|| Error::Param("date overflow".into()))?;
        }
        Self::new(days, open, close, dt_minutes)
    }

    /// Parse a session window like `09:30-16:00`.
    pub fn parse_session(spec: &str) -> Result<(NaiveTime, NaiveTime)> {
        let (a, b) = spec
            .split_once('-')
            .ok_or_else(|| Error::Param(format!("session '{spec}' not in HH:MM-HH:MM form")))?;
        let parse = |s: &str| {
            NaiveTime::parse_from_str(s.trim(), "%H:%M")
                .map_err(|e| Error::Param(format!("bad session time '{s}': {e}")))
        };
        Ok((parse(a)?, parse(b)?))
    }

    /// Read trading dates (one `YYYY-MM-DD` per line, `#` comments allowed).
    pub fn parse_dates<I: IntoIterator<Item = String>>(lines: I) -> Result<Vec<NaiveDate>> {
        let mut days = Vec::new();
        for (i, line) in lines.into_iter().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let d = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|e| Error::Format {
                line: i + 1,
                message: format!("bad date '{line}': {e}"),
            })?;
            days.push(d);
        }
        days.sort_unstable();
        days.dedup();
        Ok(days)
    }

    /// Calendar whose days are the distinct dates with at least one tick
    /// inside the session window.
    pub fn infer_from_ticks(
        ticks: &[TickRecord],
        open: NaiveTime,
        close: NaiveTime,
        dt_minutes: u32,
    ) -> Result<Self> {
        let mut days: Vec<NaiveDate> = ticks
            .iter()
            .filter_map(|t| {
                let dt = t.datetime();
                let time = dt.time();
                (time >= open && time < close).then(|| dt.date())
            })
            .collect();
        days.sort_unstable();
        days.dedup();
        Self::new(days, open, close, dt_minutes)
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn session_minutes(&self) -> u32 {
        (self.close - self.open).num_minutes() as u32
    }

    /// Slots per day `S`.
    pub fn slots_per_day(&self) -> usize {
        (self.session_minutes() / self.dt_minutes) as usize
    }

    /// Total grid length `L = N_days × S`.
    pub fn len(&self) -> usize {
        self.n_days() * self.slots_per_day()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    fn with_days(&self, days: Vec<NaiveDate>) -> Result<Self> {
        Self::new(days, self.open, self.close, self.dt_minutes)
    }

    fn open_ns(&self, day: NaiveDate) -> i64 {
        day.and_time(self.open)
            .and_utc()
            .timestamp_nanos_opt()
            .expect("session timestamp in range")
    }
}

/// One aggregated quantity on a session grid.
#[derive(Debug, Clone)]
pub struct QuantitySeries {
    pub kind: QuantityKind,
    pub instrument: String,
    pub values: Vec<f64>,
    pub grid: Arc<SessionCalendar>,
    /// Set once the intraday pattern has been divided out.
    pub detrended: bool,
}

impl QuantitySeries {
    /// Wrap precomputed values (synthetic pipelines, tests). Length must
    /// match the grid.
    pub fn from_values(
        kind: QuantityKind,
        instrument: impl Into<String>,
        grid: Arc<SessionCalendar>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values on a grid of length {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            kind,
            instrument: instrument.into(),
            values,
            grid,
            detrended: false,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slots_per_day(&self) -> usize {
        self.grid.slots_per_day()
    }

    /// Value at (day, slot).
    pub fn at(&self, day: usize, slot: usize) -> f64 {
        self.values[day * self.slots_per_day() + slot]
    }
}

/// Aggregation switches; the defaults follow the documented conventions.
#[derive(Debug, Clone)]
pub struct AggregateOptions {
    /// Reference the previous day's close for each day's first return
    /// instead of the day's first trade.
    pub include_overnight: bool,
    /// Drop a day whose trailing run of empty slots is at least this long
    /// (an early close leaves a silent afternoon). `None` keeps all days.
    pub partial_day_trailing_empty: Option<usize>,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self {
            include_overnight: false,
            partial_day_trailing_empty: None,
        }
    }
}

/// The four series produced by one aggregation pass.
#[derive(Debug, Clone)]
pub struct QuantityBundle {
    pub returns: QuantitySeries,
    pub volatility: QuantitySeries,
    pub activity: QuantitySeries,
    pub volume: QuantitySeries,
    pub report: AggregateReport,
}

impl QuantityBundle {
    pub fn get(&self, kind: QuantityKind) -> &QuantitySeries {
        match kind {
            QuantityKind::Return => &self.returns,
            QuantityKind::Volatility => &self.volatility,
            QuantityKind::TradingActivity => &self.activity,
            QuantityKind::Volume => &self.volume,
        }
    }
}

/// What the aggregation did with the input.
#[derive(Debug, Clone, Default)]
pub struct AggregateReport {
    pub ticks_used: usize,
    /// Ticks outside every session window.
    pub ticks_filtered: usize,
    /// Calendar days without a single in-session trade.
    pub empty_days: Vec<NaiveDate>,
    /// Days dropped by the partial-session check.
    pub partial_days: Vec<NaiveDate>,
}

/// Aggregate sorted ticks into the four quantity series.
///
/// Days without any in-session trade are dropped (with a note in the
/// report) and the grid shrinks accordingly, so `L = N_days × S` always
/// holds for the output.
pub fn aggregate(
    ticks: &[TickRecord],
    calendar: &SessionCalendar,
    instrument: &str,
    opts: &AggregateOptions,
) -> Result<QuantityBundle> {
    if ticks.windows(2).any(|w| w[0].timestamp_ns > w[1].timestamp_ns) {
        return Err(Error::Param("ticks must be sorted by timestamp".into()));
    }
    let s_per_day = calendar.slots_per_day();
    let slot_ns = calendar.dt_minutes as i64 * NANOS_PER_MINUTE;
    let session_ns = s_per_day as i64 * slot_ns;

    struct DayAccum {
        counts: Vec<u64>,
        volumes: Vec<u64>,
        last_price: Vec<Option<i64>>,
        first_price: i64,
    }

    let windows: Vec<(i64, i64)> = calendar
        .days()
        .iter()
        .map(|&d| {
            let open = calendar.open_ns(d);
            (open, open + session_ns)
        })
        .collect();
    let mut accums: Vec<Option<DayAccum>> = (0..windows.len()).map(|_| None).collect();
    let mut filtered = 0usize;
    let mut used = 0usize;

    // Ticks and days are both sorted, so one pointer sweep assigns ticks
    // to windows.
    let mut day_idx = 0usize;
    for tick in ticks {
        while day_idx < windows.len() && tick.timestamp_ns >= windows[day_idx].1 {
            day_idx += 1;
        }
        if day_idx >= windows.len() || tick.timestamp_ns < windows[day_idx].0 {
            filtered += 1;
            continue;
        }
        let acc = accums[day_idx].get_or_insert_with(|| DayAccum {
            counts: vec![0; s_per_day],
            volumes: vec![0; s_per_day],
            last_price: vec![None; s_per_day],
            first_price: tick.price_micros,
        });
        let slot = ((tick.timestamp_ns - windows[day_idx].0) / slot_ns) as usize;
        acc.counts[slot] += 1;
        acc.volumes[slot] += tick.shares;
        acc.last_price[slot] = Some(tick.price_micros);
        used += 1;
    }

    let mut report = AggregateReport {
        ticks_used: used,
        ticks_filtered: filtered,
        ..AggregateReport::default()
    };

    // Keep days with trades, dropping silent and partial ones.
    let mut active: Vec<(NaiveDate, DayAccum)> = Vec::new();
    for (i, acc) in accums.into_iter().enumerate() {
        let date = calendar.days()[i];
        match acc {
            None => report.empty_days.push(date),
            Some(acc) => {
                if let Some(threshold) = opts.partial_day_trailing_empty {
                    let trailing = acc.counts.iter().rev().take_while(|&&c| c == 0).count();
                    if trailing >= threshold {
                        report.partial_days.push(date);
                        continue;
                    }
                }
                active.push((date, acc));
            }
        }
    }
    if active.is_empty() {
        return Err(Error::Data(
            "no trading day contains any in-session tick".into(),
        ));
    }

    let grid = Arc::new(calendar.with_days(active.iter().map(|(d, _)| *d).collect())?);
    let total = grid.len();
    let mut returns = Vec::with_capacity(total);
    let mut activity = Vec::with_capacity(total);
    let mut volume = Vec::with_capacity(total);

    let mut prev_close: Option<i64> = None;
    for (_, day) in &active {
        let opening_ref = match (opts.include_overnight, prev_close) {
            (true, Some(p)) => p,
            _ => day.first_price,
        };
        let mut p_prev = opening_ref;
        for slot in 0..s_per_day {
            let p_end = day.last_price[slot].unwrap_or(p_prev);
            // Equal decimals short-circuit to an exact zero return.
            let r = if p_end == p_prev {
                0.0
            } else {
                (p_end as f64 * 1e-6).ln() - (p_prev as f64 * 1e-6).ln()
            };
            returns.push(r);
            activity.push(day.counts[slot] as f64);
            volume.push(day.volumes[slot] as f64);
            p_prev = p_end;
        }
        prev_close = Some(p_prev);
    }
    let volatility: Vec<f64> = returns.iter().map(|r| r.abs()).collect();

    let series = |kind, values| QuantitySeries {
        kind,
        instrument: instrument.to_string(),
        values,
        grid: Arc::clone(&grid),
        detrended: false,
    };
    Ok(QuantityBundle {
        returns: series(QuantityKind::Return, returns),
        volatility: series(QuantityKind::Volatility, volatility),
        activity: series(QuantityKind::TradingActivity, activity),
        volume: series(QuantityKind::Volume, volume),
        report,
    })
}
