//! Delimited tick-file parsing.
//!
//! One trade per line. The column layout, delimiter, and timestamp format
//! come from a [`TickFormatSpec`]; malformed lines are counted rather than
//! silently dropped, and the parse fails outright once the malformed
//! fraction passes a threshold.

use std::io::BufRead;

use chrono::NaiveDateTime;

use super::TickRecord;
use crate::error::{Error, Result};

/// Timestamp column interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimestampFormat {
    /// Decimal seconds since the epoch (fractions allowed).
    EpochSeconds,
    /// A chrono datetime format string, e.g. `%Y-%m-%d %H:%M:%S`.
    DateTime(String),
}

/// Column mapping and formats of a tick file.
#[derive(Debug, Clone, PartialEq)]
pub struct TickFormatSpec {
    pub delimiter: char,
    pub timestamp_col: usize,
    pub price_col: usize,
    pub shares_col: usize,
    pub timestamp: TimestampFormat,
    /// Minutes added to epoch timestamps to move them into exchange-local
    /// wall time. Datetime strings are taken as already local.
    pub utc_offset_minutes: i32,
    /// Parse fails when malformed lines exceed this fraction.
    pub malformed_threshold: f64,
    /// Skip the first line.
    pub has_header: bool,
}

impl Default for TickFormatSpec {
    fn default() -> Self {
        Self {
            delimiter: ',',
            timestamp_col: 0,
            price_col: 1,
            shares_col: 2,
            timestamp: TimestampFormat::EpochSeconds,
            utc_offset_minutes: 0,
            malformed_threshold: 0.01,
            has_header: false,
        }
    }
}

impl TickFormatSpec {
    /// Parse a compact spec like
    /// `delim=,;ts=0;price=1;shares=2;tsfmt=epoch;tz=0;header=0`
    /// (`tsfmt` is either `epoch` or a chrono format string). Unset keys
    /// keep their defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out = Self::default();
        for part in spec.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Param(format!("format item '{part}' is not key=value")))?;
            let bad = |what: &str| Error::Param(format!("bad format {what} '{value}'"));
            match key.trim() {
                "delim" => {
                    let mut chars = value.chars();
                    out.delimiter = match (chars.next(), chars.next()) {
                        (Some(c), None) => c,
                        _ if value == "tab" => '\t',
                        _ => return Err(bad("delimiter")),
                    };
                }
                "ts" => out.timestamp_col = value.parse().map_err(|_| bad("ts column"))?,
                "price" => out.price_col = value.parse().map_err(|_| bad("price column"))?,
                "shares" => out.shares_col = value.parse().map_err(|_| bad("shares column"))?,
                "tsfmt" => {
                    out.timestamp = if value == "epoch" {
                        TimestampFormat::EpochSeconds
                    } else {
                        TimestampFormat::DateTime(value.to_string())
                    };
                }
                "tz" => out.utc_offset_minutes = value.parse().map_err(|_| bad("tz offset"))?,
                "threshold" => {
                    out.malformed_threshold = value.parse().map_err(|_| bad("threshold"))?
                }
                "header" => {
                    out.has_header = match value {
                        "1" | "true" | "yes" => true,
                        "0" | "false" | "no" => false,
                        _ => return Err(bad("header flag")),
                    };
                }
                other => return Err(Error::Param(format!("unknown format key '{other}'"))),
            }
        }
        Ok(out)
    }

    fn max_col(&self) -> usize {
        self.timestamp_col.max(self.price_col).max(self.shares_col)
    }
}

/// Outcome counters of one parse pass.
#[derive(Debug, Clone, Default)]
pub struct ParseReport {
    /// Non-blank data lines seen.
    pub total_lines: usize,
    pub parsed: usize,
    pub malformed: usize,
    /// Line number and content of the first malformed line.
    pub first_malformed: Option<(usize, String)>,
}

/// Parse a delimited tick stream into timestamp-sorted records.
///
/// Lines that do not yield a valid record (wrong field count, unparseable
/// numbers, non-positive price or shares) are counted as malformed. The
/// sort is stable, so records sharing a timestamp keep file order.
pub fn parse_ticks<R: BufRead>(
    reader: R,
    format: &TickFormatSpec,
) -> Result<(Vec<TickRecord>, ParseReport)> {
    let mut report = ParseReport::default();
    let mut ticks: Vec<TickRecord> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if format.has_header && i == 0 {
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        report.total_lines += 1;
        match parse_line(trimmed, format) {
            Some(tick) => {
                ticks.push(tick);
                report.parsed += 1;
            }
            None => {
                report.malformed += 1;
                if report.first_malformed.is_none() {
                    report.first_malformed = Some((line_no, trimmed.to_string()));
                }
            }
        }
    }
    if report.total_lines > 0 {
        let fraction = report.malformed as f64 / report.total_lines as f64;
        if fraction > format.malformed_threshold {
            let (line, content) = report
                .first_malformed
                .clone()
                .expect("malformed > 0 implies a first offender");
            return Err(Error::Format {
                line,
                message: format!(
                    "{} of {} lines malformed (threshold {:.2}%), first: '{}'",
                    report.malformed,
                    report.total_lines,
                    format.malformed_threshold * 100.0,
                    content
                ),
            });
        }
    }
    ticks.sort_by_key(|t| t.timestamp_ns);
    Ok((ticks, report))
}

fn parse_line(line: &str, format: &TickFormatSpec) -> Option<TickRecord> {
    let fields: Vec<&str> = line.split(format.delimiter).collect();
    if fields.len() <= format.max_col() {
        return None;
    }
    let timestamp_ns = parse_timestamp(fields[format.timestamp_col].trim(), format)?;
    let price_micros = parse_decimal_scaled(fields[format.price_col].trim(), 6)?;
    if price_micros <= 0 {
        return None;
    }
    let shares: u64 = fields[format.shares_col].trim().parse().ok()?;
    if shares == 0 {
        return None;
    }
    Some(TickRecord {
        timestamp_ns,
        price_micros,
        shares,
    })
}

fn parse_timestamp(field: &str, format: &TickFormatSpec) -> Option<i64> {
    match &format.timestamp {
        TimestampFormat::EpochSeconds => {
            let ns = parse_decimal_scaled(field, 9)?;
            Some(ns + format.utc_offset_minutes as i64 * super::NANOS_PER_MINUTE)
        }
        TimestampFormat::DateTime(fmt) => {
            let dt = NaiveDateTime::parse_from_str(field, fmt).ok()?;
            dt.and_utc().timestamp_nanos_opt()
        }
    }
}

/// Exact decimal parse into an integer of `10^-scale` units. Rejects
/// exponents, more fractional digits than `scale`, and overflow  — the
/// cases where a float detour would silently change the value.
fn parse_decimal_scaled(s: &str, scale: u32) -> Option<i64> {
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    if digits.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.len() > scale as usize {
        return None;
    }
    let mut value: i64 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        let d = c.to_digit(10)? as i64;
        value = value.checked_mul(10)?.checked_add(d)?;
    }
    let pad = scale as usize - frac_part.len();
    for _ in 0..pad {
        value = value.checked_mul(10)?;
    }
    Some(sign * value)
}
