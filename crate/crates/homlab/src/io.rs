//! Readers and writers for the pipeline's data files.
//!
//! Four CSV schemas, each a fixed header plus float rows:
//!
//! * dip curves: `tau_s,c_mean,ci_lo,ci_hi`
//! * spectral filters: `freq_offset_hz,transmission`
//! * fit input: `delta_tau_s,counts`
//! * bare samples: `value`
//! * interferometer scans: `theta_rad,coincidence`
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every bit and reruns diff clean. Parsers
//! are strict: the header must match, every row needs the full column
//! count, and every cell must be a finite number. Errors carry the file
//! path and 1-based line.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::correlator::{DipCurve, DipPoint};
use crate::error::{Error, Result};
use crate::fock::FilterTable;

pub const DIP_CURVE_HEADER: &str = "tau_s,c_mean,ci_lo,ci_hi";
pub const FILTER_HEADER: &str = "freq_offset_hz,transmission";
pub const FIT_DATA_HEADER: &str = "delta_tau_s,counts";
pub const VALUES_HEADER: &str = "value";
pub const MZI_SCAN_HEADER: &str = "theta_rad,coincidence";

/// Strict CSV core: exact header, fixed column count, finite cells.
/// Blank lines are ignored so trailing newlines stay harmless; `\r` is
/// stripped to tolerate CRLF files.
fn parse_rows(text: &str, origin: &str, header: &str, cols: usize) -> Result<Vec<Vec<f64>>> {
    let err = |line: usize, message: String| Error::Table {
        path: origin.to_string(),
        line,
        message,
    };
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line.trim() != header {
                return Err(err(
                    line_no,
                    format!("expected header {header:?}, got {:?}", line.trim()),
                ));
            }
            saw_header = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols {
            return Err(err(
                line_no,
                format!("expected {cols} columns, got {}", cells.len()),
            ));
        }
        let mut row = Vec::with_capacity(cols);
        for cell in cells {
            let cell = cell.trim();
            let value: f64 = cell
                .parse()
                .map_err(|_| err(line_no, format!("{cell:?} is not a number")))?;
            if !value.is_finite() {
                return Err(err(line_no, format!("{cell:?} is not finite")));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if !saw_header {
        return Err(err(1, format!("empty file, expected header {header:?}")));
    }
    Ok(rows)
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

pub fn dip_curve_to_csv(curve: &DipCurve) -> String {
    let mut out = String::from(DIP_CURVE_HEADER);
    out.push('\n');
    for p in curve.points() {
        push_row(&mut out, &[p.tau_s, p.c_mean, p.ci_lo, p.ci_hi]);
    }
    out
}

pub fn parse_dip_curve(text: &str, origin: &str) -> Result<DipCurve> {
    let rows = parse_rows(text, origin, DIP_CURVE_HEADER, 4)?;
    let points = rows
        .into_iter()
        .map(|r| DipPoint {
            tau_s: r[0],
            c_mean: r[1],
            ci_lo: r[2],
            ci_hi: r[3],
        })
        .collect();
    DipCurve::new(points)
}

pub fn write_dip_curve(path: &Path, curve: &DipCurve) -> Result<()> {
    std::fs::write(path, dip_curve_to_csv(curve))?;
    Ok(())
}

pub fn read_dip_curve(path: &Path) -> Result<DipCurve> {
    let text = std::fs::read_to_string(path)?;
    parse_dip_curve(&text, &path.display().to_string())
}

pub fn parse_filter_table(text: &str, origin: &str) -> Result<FilterTable> {
    let rows = parse_rows(text, origin, FILTER_HEADER, 2)?;
    FilterTable::new(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn read_filter_table(path: &Path) -> Result<FilterTable> {
    let text = std::fs::read_to_string(path)?;
    parse_filter_table(&text, &path.display().to_string())
}

pub fn filter_table_to_csv(table: &FilterTable) -> String {
    let mut out = String::from(FILTER_HEADER);
    out.push('\n');
    for (f, t) in table.rows() {
        push_row(&mut out, &[*f, *t]);
    }
    out
}

/// Delay/counts pairs for the curve fitter.
pub fn parse_fit_data(text: &str, origin: &str) -> Result<Vec<(f64, f64)>> {
    let rows = parse_rows(text, origin, FIT_DATA_HEADER, 2)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn read_fit_data(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    parse_fit_data(&text, &path.display().to_string())
}

pub fn fit_data_to_csv(data: &[(f64, f64)]) -> String {
    let mut out = String::from(FIT_DATA_HEADER);
    out.push('\n');
    for (x, y) in data {
        push_row(&mut out, &[*x, *y]);
    }
    out
}

/// One bare sample per row, for the bootstrap utility.
pub fn parse_values(text: &str, origin: &str) -> Result<Vec<f64>> {
    let rows = parse_rows(text, origin, VALUES_HEADER, 1)?;
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_values(&text, &path.display().to_string())
}

pub fn values_to_csv(values: &[f64]) -> String {
    let mut out = String::from(VALUES_HEADER);
    out.push('\n');
    for v in values {
        push_row(&mut out, &[*v]);
    }
    out
}

pub fn mzi_scan_to_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from(MZI_SCAN_HEADER);
    out.push('\n');
    for (theta, c) in points {
        push_row(&mut out, &[*theta, *c]);
    }
    out
}

pub fn write_mzi_scan(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    std::fs::write(path, mzi_scan_to_csv(points))?;
    Ok(())
}

pub fn parse_mzi_scan(text: &str, origin: &str) -> Result<Vec<(f64, f64)>> {
    let rows = parse_rows(text, origin, MZI_SCAN_HEADER, 2)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

/// Pretty JSON plus a trailing newline, for the report files.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> DipCurve {
        DipCurve::new(vec![
            DipPoint {
                tau_s: -1e-3,
                c_mean: 0.1 + 0.2,
                ci_lo: 0.29,
                ci_hi: 0.31,
            },
            DipPoint {
                tau_s: 0.0,
                c_mean: 1e-300,
                ci_lo: 0.0,
                ci_hi: 2e-300,
            },
            DipPoint {
                tau_s: 1e-3,
                c_mean: 0.30000000000000004,
                ci_lo: 0.3,
                ci_hi: 0.30000000000000104,
            },
        ])
        .unwrap()
    }

    #[test]
    fn dip_curve_round_trip_is_bit_exact() {
        let original = curve();
        let text = dip_curve_to_csv(&original);
        assert!(text.starts_with("tau_s,c_mean,ci_lo,ci_hi\n"));
        let back = parse_dip_curve(&text, "mem").unwrap();
        assert_eq!(back, original);
    }

    #[test]
    fn headers_are_enforced_with_line_numbers() {
        let e = parse_dip_curve("tau,c\n0,0,0,0\n", "f.csv").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("f.csv:1"), "{msg}");
        assert!(msg.contains("expected header"), "{msg}");
        let e = parse_values("", "g.csv").unwrap_err();
        assert!(e.to_string().contains("empty file"), "{}", e);
    }

    #[test]
    fn malformed_rows_name_the_offending_line() {
        let text = "tau_s,c_mean,ci_lo,ci_hi\n0,1,1,1\n1,2,2\n";
        let e = parse_dip_curve(text, "f.csv").unwrap_err();
        assert!(e.to_string().contains("f.csv:3"), "{}", e);
        let text = "tau_s,c_mean,ci_lo,ci_hi\n0,one,1,1\n";
        let e = parse_dip_curve(text, "f.csv").unwrap_err();
        assert!(e.to_string().contains("not a number"), "{}", e);
        let text = "tau_s,c_mean,ci_lo,ci_hi\n0,inf,1,1\n";
        let e = parse_dip_curve(text, "f.csv").unwrap_err();
        assert!(e.to_string().contains("not finite"), "{}", e);
    }

    #[test]
    fn crlf_and_blank_lines_are_tolerated() {
        let text = "value\r\n1.5\r\n\r\n2.5\r\n";
        assert_eq!(parse_values(text, "mem").unwrap(), vec![1.5, 2.5]);
    }

    #[test]
    fn filter_tables_parse_into_interpolable_form() {
        let text = "freq_offset_hz,transmission\n-1e9,0\n0,1\n1e9,0\n";
        let table = parse_filter_table(text, "mem").unwrap();
        assert_eq!(table.transmission_at(0.0), 1.0);
        assert!((table.transmission_at(0.5e9) - 0.5).abs() < 1e-12);
        let back = parse_filter_table(&filter_table_to_csv(&table), "mem").unwrap();
        assert_eq!(filter_table_to_csv(&back), filter_table_to_csv(&table));
        let e = parse_filter_table("freq_offset_hz,transmission\n0,1\n0,1\n", "mem");
        assert!(e.is_err());
    }

    #[test]
    fn fit_data_and_values_round_trip() {
        let data = vec![(-2e-12, 950.0), (0.0, 14.5), (2e-12, 951.25)];
        let back = parse_fit_data(&fit_data_to_csv(&data), "mem").unwrap();
        assert_eq!(back, data);
        let values = vec![0.1, -3.75, 42.0];
        let back = parse_values(&values_to_csv(&values), "mem").unwrap();
        assert_eq!(back, values);
        let scan = vec![(0.0, 1.0), (std::f64::consts::FRAC_PI_2, 0.5)];
        let back = parse_mzi_scan(&mzi_scan_to_csv(&scan), "mem").unwrap();
        assert_eq!(back, scan);
    }

    #[test]
    fn json_reports_land_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        #[derive(Serialize)]
        struct Report {
            visibility: f64,
        }
        write_json(&path, &Report { visibility: 0.52 }).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"visibility\": 0.52"), "{text}");
        assert!(text.ends_with('\n'));
    }
}
