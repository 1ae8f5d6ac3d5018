//! CSV time-series input and output.
//!
//! Files are wide: a `timestamp` column followed by one numeric column per
//! series, one row per sample, on a uniform grid.
//!
//! ```text
//! timestamp,p1,p2
//! 2023-01-01T00:00:00,0.41,0.73
//! 2023-01-01T01:00:00,0.38,0.70
//! ```

use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::types::{TimeSeries, Weather};

pub const TIMESTAMP_COLUMN: &str = "timestamp";
pub const IRRADIANCE_COLUMN: &str = "irradiance_kw_m2";
pub const AMBIENT_COLUMN: &str = "ambient_c";

const FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    let s = s.trim();
    for f in FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, f) {
            return Ok(t);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight"));
    }
    Err(Error::parse(format!("unrecognized timestamp '{s}'")))
}

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S").to_string()
}

/// Reads every value column of a wide CSV, in header order.
pub fn read_series_csv<R: Read>(reader: R) -> Result<Vec<(String, TimeSeries)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some(TIMESTAMP_COLUMN) {
        return Err(Error::parse(format!(
            "first column must be '{TIMESTAMP_COLUMN}'"
        )));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    if names.is_empty() {
        return Err(Error::parse("no value columns"));
    }
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() {
            return Err(Error::parse(format!("column {} has an empty name", i + 2)));
        }
        if names[..i].contains(n) {
            return Err(Error::parse(format!("duplicate column '{n}'")));
        }
    }

    let mut stamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.len() != names.len() + 1 {
            return Err(Error::parse(format!(
                "line {line}: expected {} fields, found {}",
                names.len() + 1,
                rec.len()
            )));
        }
        let t = parse_timestamp(&rec[0]).map_err(|e| Error::parse(format!("line {line}: {e}")))?;
        stamps.push(t);
        for (col, field) in columns.iter_mut().zip(rec.iter().skip(1)) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(format!("line {line}: '{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(format!(
                    "line {line}: non-finite value '{field}'"
                )));
            }
            col.push(v);
        }
    }
    let (start, step) = uniform_grid(&stamps)?;
    names
        .into_iter()
        .zip(columns)
        .map(|(n, values)| Ok((n, TimeSeries::new(start, step, values)?)))
        .collect()
}

/// Start and step of strictly increasing, evenly spaced timestamps.
fn uniform_grid(stamps: &[NaiveDateTime]) -> Result<(NaiveDateTime, f64)> {
    let start = *stamps.first().ok_or_else(|| Error::parse("no data rows"))?;
    let Some(&second) = stamps.get(1) else {
        return Ok((start, 1.0));
    };
    let step = (second - start).num_seconds();
    if step <= 0 {
        return Err(Error::parse("timestamps must be strictly increasing"));
    }
    for (i, w) in stamps.windows(2).enumerate() {
        if (w[1] - w[0]).num_seconds() != step {
            return Err(Error::parse(format!(
                "line {}: sampling step changes from {step} s to {} s",
                i + 3,
                (w[1] - w[0]).num_seconds()
            )));
        }
    }
    Ok((start, step as f64 / 3600.0))
}

/// Writes series sharing one grid as a wide CSV.
pub fn write_series_csv<W: Write>(writer: W, columns: &[(&str, &TimeSeries)]) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::Structure("nothing to write".into()));
    };
    if let Some((name, _)) = columns.iter().find(|(_, s)| !s.aligned_with(first)) {
        return Err(Error::Structure(format!(
            "series '{name}' is on a different grid"
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![TIMESTAMP_COLUMN];
    header.extend(columns.iter().map(|(n, _)| *n));
    w.write_record(&header)?;
    for (i, t) in first.timestamps().enumerate() {
        let mut rec = vec![format_timestamp(t)];
        rec.extend(columns.iter().map(|(_, s)| s.values[i].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a weather CSV with irradiance (kW/m²) and ambient temperature (°C).
pub fn read_weather_csv<R: Read>(reader: R) -> Result<Weather> {
    let mut cols = read_series_csv(reader)?;
    let mut take = |name: &str| {
        cols.iter()
            .position(|(n, _)| n == name)
            .map(|i| cols.swap_remove(i).1)
            .ok_or_else(|| Error::parse(format!("weather file lacks column '{name}'")))
    };
    let irradiance = take(IRRADIANCE_COLUMN)?;
    let ambient = take(AMBIENT_COLUMN)?;
    Ok(Weather {
        irradiance,
        ambient,
    })
}

pub fn write_weather_csv<W: Write>(writer: W, weather: &Weather) -> Result<()> {
    write_series_csv(
        writer,
        &[
            (IRRADIANCE_COLUMN, &weather.irradiance),
            (AMBIENT_COLUMN, &weather.ambient),
        ],
    )
}
