//! CSV emission and parsing.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! every value parses back to the identical `f64`. Rows keep the order of
//! the source data, which is itself deterministic.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cpa::CpaReport;
use crate::dynamics::TimeTrace;
use crate::stability::Stability;
use crate::sweep::{BoundaryMap, CurvePoint, HysteresisCurve};

use super::Units;

pub const SWEEP_HEADER: [&str; 5] = [
    "input_intensity",
    "n_c",
    "output_intensity",
    "stability",
    "branch_id",
];
pub const BOUNDARY_HEADER: [&str; 4] = ["beta", "g_c", "delta_tls_c", "feasible"];
pub const EVOLVE_HEADER: [&str; 3] = ["t", "n_c", "out_intensity"];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("row {row}: cannot parse {field} from {value:?}")]
    Field {
        row: usize,
        field: &'static str,
        value: String,
    },
}

/// 17 significant digits; NaN and infinities use Rust's spelling.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_sweep<W: Write>(
    curve: &HysteresisCurve,
    out: W,
    units: Units,
) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for p in &curve.points {
        w.write_record([
            fmt_f64(units.rate(p.input_intensity)),
            fmt_f64(p.n_c),
            fmt_f64(units.rate(p.output_intensity)),
            p.stability.as_str().to_string(),
            p.branch_id.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_boundary<W: Write>(map: &BoundaryMap, out: W, units: Units) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUNDARY_HEADER)?;
    for k in 0..map.axis.len() {
        w.write_record([
            fmt_f64(units.rate(map.axis[k])),
            fmt_f64(units.rate(map.g_c_curve[k])),
            fmt_f64(units.rate(map.delta_c_curve[k])),
            map.region_mask[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(trace: &TimeTrace, out: W, units: Units) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVOLVE_HEADER)?;
    for k in 0..trace.times.len() {
        w.write_record([
            fmt_f64(units.time(trace.times[k])),
            fmt_f64(trace.n_c[k]),
            fmt_f64(units.rate(trace.out_intensity[k])),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(key, value)` pairs of a CPA report, rates scaled by `units`.
pub fn cpa_fields(r: &CpaReport, units: Units) -> Vec<(&'static str, String)> {
    let opt = |x: Option<f64>| x.map(|v| fmt_f64(units.rate(v))).unwrap_or_default();
    vec![
        ("beta", fmt_f64(units.rate(r.beta))),
        ("g_c", fmt_f64(units.rate(r.g_c))),
        ("delta_tls_c", fmt_f64(units.rate(r.delta_tls_c))),
        ("coupling_ratio", fmt_f64(r.coupling_ratio)),
        ("n_c_cpa", fmt_f64(r.n_c_cpa)),
        ("delta_c_required", fmt_f64(units.rate(r.delta_c_required))),
        ("input_intensity", fmt_f64(units.rate(r.input_intensity))),
        ("omega_d_cpa", fmt_f64(units.rate(r.omega_d_cpa))),
        ("feasible", r.feasible.to_string()),
        (
            "reasons",
            r.reasons
                .iter()
                .map(|v| v.tag())
                .collect::<Vec<_>>()
                .join(";"),
        ),
        ("residual_out", fmt_f64(units.rate(r.residual_out))),
        (
            "stability",
            r.stability
                .map(|s| s.as_str().to_string())
                .unwrap_or_default(),
        ),
        (
            "branch_location",
            r.branch_location
                .map(|b| b.as_str().to_string())
                .unwrap_or_default(),
        ),
        ("window_lo", opt(r.bistable_window.map(|w| w.lo))),
        ("window_hi", opt(r.bistable_window.map(|w| w.hi))),
    ]
}

/// One header row of keys and one row of values.
pub fn write_cpa<W: Write>(r: &CpaReport, out: W, units: Units) -> Result<(), CsvError> {
    let fields = cpa_fields(r, units);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(fields.iter().map(|(k, _)| *k))?;
    w.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
    w.flush()?;
    Ok(())
}

/// File name for the trace at pump mismatch `delta`, e.g.
/// `evolve_delta_0.01.csv`.
pub fn trace_file_name(stem: &str, delta: f64, ext: &str) -> String {
    format!("{stem}_delta_{delta}.{ext}")
}

pub fn trace_path(dir: &Path, stem: &str, delta: f64) -> PathBuf {
    dir.join(trace_file_name(stem, delta, "csv"))
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), CsvError> {
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(CsvError::Header {
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    row: usize,
    name: &'static str,
) -> Result<T, CsvError> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| CsvError::Field {
        row,
        field: name,
        value: raw.to_string(),
    })
}

pub fn read_sweep<R: Read>(input: R) -> Result<Vec<CurvePoint>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &SWEEP_HEADER)?;
    r.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec?;
            Ok(CurvePoint {
                input_intensity: field(&rec, 0, row, "input_intensity")?,
                n_c: field(&rec, 1, row, "n_c")?,
                output_intensity: field(&rec, 2, row, "output_intensity")?,
                stability: field::<Stability>(&rec, 3, row, "stability")?,
                branch_id: field(&rec, 4, row, "branch_id")?,
            })
        })
        .collect()
}

/// `(beta, g_c, delta_tls_c, feasible)` rows.
pub fn read_boundary<R: Read>(input: R) -> Result<Vec<(f64, f64, f64, bool)>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &BOUNDARY_HEADER)?;
    r.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec?;
            Ok((
                field(&rec, 0, row, "beta")?,
                field(&rec, 1, row, "g_c")?,
                field(&rec, 2, row, "delta_tls_c")?,
                field(&rec, 3, row, "feasible")?,
            ))
        })
        .collect()
}

/// `(t, n_c, out_intensity)` rows.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<(f64, f64, f64)>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &EVOLVE_HEADER)?;
    r.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec?;
            Ok((
                field(&rec, 0, row, "t")?,
                field(&rec, 1, row, "n_c")?,
                field(&rec, 2, row, "out_intensity")?,
            ))
        })
        .collect()
}

/// Key/value pairs of a CPA file.
pub fn read_cpa<R: Read>(input: R) -> Result<Vec<(String, String)>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    let keys: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let values = r.records().next().transpose()?.unwrap_or_default();
    Ok(keys
        .into_iter()
        .zip(
            values
                .iter()
                .map(str::to_string)
                .chain(std::iter::repeat(String::new())),
        )
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            2.0f64.sqrt() * 1e-300,
            6.02214076e23,
            -0.0,
            5e-324,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn file_names_carry_delta() {
        assert_eq!(
            trace_file_name("evolve", 0.01, "csv"),
            "evolve_delta_0.01.csv"
        );
        assert_eq!(trace_file_name("evolve", 1.0, "svg"), "evolve_delta_1.svg");
    }
}
