//! Plot-ready delimited text tables.
//!
//! Surfaces are written in long format, one row per `(q, s)` cell, with
//! optional leading key columns (instrument, pair) prepended by the caller.
//! Floats are printed with 17 significant digits, which round-trips every
//! finite f64 bit-exactly; the reader rebuilds a surface that fits and
//! masks identically to the original.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::fractal::{AnalysisMode, FluctuationSurface};
use crate::ingest::QuantityKind;
use crate::numeric;
use crate::scaling::ScalingSpectrum;
use crate::seasonality::DailyPattern;

/// Column separator of all tables.
pub const DELIMITER: char = '\t';

/// Render a float with 17 significant digits (bit-exact round trip).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

const SURFACE_COLUMNS: [&str; 7] = ["mode", "q", "s", "F", "sign", "boxes_used", "boxes_excluded"];

/// Write one surface; `prefix` columns are repeated on every row.
pub fn write_surface<W: Write>(
    w: &mut W,
    surface: &FluctuationSurface,
    prefix: &[(&str, &str)],
) -> io::Result<()> {
    write_surface_header(w, prefix)?;
    write_surface_rows(w, surface, prefix)
}

/// Header for a surface table with the given prefix column names.
pub fn write_surface_header<W: Write>(w: &mut W, prefix: &[(&str, &str)]) -> io::Result<()> {
    let mut cols: Vec<&str> = prefix.iter().map(|(name, _)| *name).collect();
    cols.extend_from_slice(&SURFACE_COLUMNS);
    writeln!(w, "{}", cols.join(&DELIMITER.to_string()))
}

/// Rows only; lets callers stack several surfaces under one header.
pub fn write_surface_rows<W: Write>(
    w: &mut W,
    surface: &FluctuationSurface,
    prefix: &[(&str, &str)],
) -> io::Result<()> {
    let lead: String = prefix
        .iter()
        .map(|(_, value)| format!("{value}{DELIMITER}"))
        .collect();
    for (qi, &q) in surface.q_values().iter().enumerate() {
        for (si, &s) in surface.scales().iter().enumerate() {
            let f = surface.value(qi, si);
            writeln!(
                w,
                "{lead}{}\t{}\t{}\t{}\t{}\t{}\t{}",
                surface.mode().as_str(),
                fmt_float(q),
                s,
                fmt_float(f),
                numeric::sign(f) as i32,
                surface.boxes_used(qi, si),
                surface.boxes_excluded(qi, si),
            )?;
        }
    }
    Ok(())
}

/// Parse a surface table. Rows are grouped by (prefix columns, mode); one
/// surface per group is returned together with its prefix key/value pairs.
pub fn read_surfaces<R: BufRead>(
    reader: R,
) -> Result<Vec<(Vec<(String, String)>, FluctuationSurface)>> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                break t.to_string();
            }
            None => return Err(Error::Format {
                line: 0,
                message: "empty surface table".into(),
            }),
        }
    };
    let names: Vec<&str> = header.split(DELIMITER).collect();
    let canon_start = names
        .iter()
        .position(|&n| n == SURFACE_COLUMNS[0])
        .ok_or_else(|| Error::Format {
            line: 1,
            message: "surface table header lacks a 'mode' column".into(),
        })?;
    if names[canon_start..] != SURFACE_COLUMNS {
        return Err(Error::Format {
            line: 1,
            message: format!(
                "surface columns must end with {:?}, got {:?}",
                SURFACE_COLUMNS,
                &names[canon_start..]
            ),
        });
    }
    let prefix_names: Vec<String> = names[..canon_start].iter().map(|s| s.to_string()).collect();

    struct Cell {
        q: f64,
        s: usize,
        f: f64,
        used: usize,
        excluded: usize,
    }
    let mut groups: BTreeMap<(Vec<String>, String), Vec<Cell>> = BTreeMap::new();

    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split(DELIMITER).collect();
        if fields.len() != names.len() {
            return Err(Error::Format {
                line: line_no,
                message: format!("expected {} columns, got {}", names.len(), fields.len()),
            });
        }
        let bad = |what: &str| Error::Format {
            line: line_no,
            message: format!("bad {what} value"),
        };
        let prefix_vals: Vec<String> =
            fields[..canon_start].iter().map(|s| s.to_string()).collect();
        let mode = fields[canon_start].to_string();
        let cell = Cell {
            q: fields[canon_start + 1].parse().map_err(|_| bad("q"))?,
            s: fields[canon_start + 2].parse().map_err(|_| bad("s"))?,
            f: fields[canon_start + 3].parse().map_err(|_| bad("F"))?,
            used: fields[canon_start + 5].parse().map_err(|_| bad("boxes_used"))?,
            excluded: fields[canon_start + 6]
                .parse()
                .map_err(|_| bad("boxes_excluded"))?,
        };
        groups.entry((prefix_vals, mode)).or_default().push(cell);
    }

    let mut out = Vec::new();
    for ((prefix_vals, mode), cells) in groups {
        let mode = AnalysisMode::parse(&mode)?;
        let mut q_values: Vec<f64> = cells.iter().map(|c| c.q).collect();
        q_values.sort_by(f64::total_cmp);
        q_values.dedup_by(|a, b| a.to_bits() == b.to_bits());
        let mut scales: Vec<usize> = cells.iter().map(|c| c.s).collect();
        scales.sort_unstable();
        scales.dedup();

        let (n_q, n_s) = (q_values.len(), scales.len());
        let mut values = vec![f64::NAN; n_q * n_s];
        let mut excluded = vec![0usize; n_q * n_s];
        let mut totals = vec![0usize; n_s];
        for c in &cells {
            let qi = q_values
                .iter()
                .position(|v| v.to_bits() == c.q.to_bits())
                .expect("q collected above");
            let si = scales.binary_search(&c.s).expect("s collected above");
            values[qi * n_s + si] = c.f;
            excluded[qi * n_s + si] = c.excluded;
            let total = c.used + c.excluded;
            if totals[si] == 0 {
                totals[si] = total;
            } else if totals[si] != total {
                return Err(Error::Format {
                    line: 0,
                    message: format!("inconsistent box counts at scale {}", c.s),
                });
            }
        }
        let prefix = prefix_names
            .iter()
            .cloned()
            .zip(prefix_vals.into_iter())
            .collect();
        out.push((
            prefix,
            FluctuationSurface::from_parts(mode, q_values, scales, values, totals, excluded)?,
        ));
    }
    Ok(out)
}

const SPECTRUM_COLUMNS: [&str; 7] = [
    "mode",
    "q",
    "exponent",
    "r_squared",
    "n_scales",
    "masked",
    "defined",
];

/// Write one spectrum, preceded by a `#` summary line carrying the
/// exponent spread and the fit window.
pub fn write_spectrum<W: Write>(
    w: &mut W,
    spectrum: &ScalingSpectrum,
    prefix: &[(&str, &str)],
) -> io::Result<()> {
    write_spectrum_header(w, prefix)?;
    write_spectrum_rows(w, spectrum, prefix)
}

pub fn write_spectrum_header<W: Write>(w: &mut W, prefix: &[(&str, &str)]) -> io::Result<()> {
    let mut cols: Vec<&str> = prefix.iter().map(|(name, _)| *name).collect();
    cols.extend_from_slice(&SPECTRUM_COLUMNS);
    writeln!(w, "{}", cols.join(&DELIMITER.to_string()))
}

pub fn write_spectrum_rows<W: Write>(
    w: &mut W,
    spectrum: &ScalingSpectrum,
    prefix: &[(&str, &str)],
) -> io::Result<()> {
    let label: String = prefix
        .iter()
        .map(|(k, v)| format!("{k}={v} "))
        .collect::<String>();
    writeln!(
        w,
        "# {label}delta={} fit_range={}:{} gate={} defined={}/{}",
        spectrum
            .delta()
            .map(fmt_float)
            .unwrap_or_else(|| "nan".into()),
        spectrum.fit_range.0,
        spectrum.fit_range.1,
        spectrum.quality_gate,
        spectrum.defined_count(),
        spectrum.fits.len(),
    )?;
    let lead: String = prefix
        .iter()
        .map(|(_, value)| format!("{value}{DELIMITER}"))
        .collect();
    for fit in &spectrum.fits {
        writeln!(
            w,
            "{lead}{}\t{}\t{}\t{}\t{}\t{}\t{}",
            spectrum.mode.as_str(),
            fmt_float(fit.q),
            fmt_float(fit.exponent),
            fmt_float(fit.r_squared),
            fit.n_scales,
            fit.masked,
            if fit.defined { 1 } else { 0 },
        )?;
    }
    Ok(())
}

/// Two-column intraday pattern table: slot index, pattern value.
pub fn write_pattern<W: Write>(
    w: &mut W,
    pattern: &DailyPattern,
    prefix: &[(&str, &str)],
) -> io::Result<()> {
    let mut cols: Vec<&str> = prefix.iter().map(|(name, _)| *name).collect();
    cols.extend_from_slice(&["slot", "pattern"]);
    writeln!(w, "{}", cols.join(&DELIMITER.to_string()))?;
    let lead: String = prefix
        .iter()
        .map(|(_, value)| format!("{value}{DELIMITER}"))
        .collect();
    for (slot, &v) in pattern.values().iter().enumerate() {
        writeln!(w, "{lead}{slot}\t{}", fmt_float(v))?;
    }
    Ok(())
}

/// Long-format aggregated series table.
pub fn write_series<W: Write>(
    w: &mut W,
    kinds_and_values: &[(QuantityKind, &[f64])],
    slots_per_day: usize,
    prefix: &[(&str, &str)],
) -> io::Result<()> {
    let mut cols: Vec<&str> = prefix.iter().map(|(name, _)| *name).collect();
    cols.extend_from_slice(&["kind", "index", "day", "slot", "value"]);
    writeln!(w, "{}", cols.join(&DELIMITER.to_string()))?;
    let lead: String = prefix
        .iter()
        .map(|(_, value)| format!("{value}{DELIMITER}"))
        .collect();
    for (kind, values) in kinds_and_values {
        for (i, &v) in values.iter().enumerate() {
            writeln!(
                w,
                "{lead}{}\t{}\t{}\t{}\t{}",
                kind.token(),
                i,
                i / slots_per_day,
                i % slots_per_day,
                fmt_float(v)
            )?;
        }
    }
    Ok(())
}

/// One value per line; the generator output format.
pub fn write_column<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    for &v in values {
        writeln!(w, "{}", fmt_float(v))?;
    }
    Ok(())
}

/// Two comma-separated columns for generated pairs.
pub fn write_pair_columns<W: Write>(w: &mut W, x: &[f64], y: &[f64]) -> io::Result<()> {
    for (a, b) in x.iter().zip(y.iter()) {
        writeln!(w, "{},{}", fmt_float(*a), fmt_float(*b))?;
    }
    Ok(())
}

/// Read a one-column (or first-of-several-columns) value file.
pub fn read_column<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let first = t.split([',', DELIMITER]).next().unwrap_or(t);
        out.push(first.parse().map_err(|_| Error::Format {
            line: i + 1,
            message: format!("bad numeric value '{first}'"),
        })?);
    }
    Ok(out)
}
