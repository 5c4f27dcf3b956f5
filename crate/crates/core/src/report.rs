//! Canonical JSON and CSV rendering of reports.
//!
//! JSON objects are written with sorted keys and every float with 17
//! significant digits (`{:.16e}`), so equal values always give identical
//! bytes and every float round-trips.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::chords::InequalityReport;
use crate::{Error, Result};

/// Canonical pretty-printed JSON, terminated by a newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| Error::InvalidInput(format!("unserializable report: {e}")))?;
    Ok(canonical_value(&v))
}

/// Canonical rendering of an already built JSON value.
pub fn canonical_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// 17 significant digits; non-finite values become `null`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn indent(out: &mut String, level: usize) {
    out.extend(std::iter::repeat_n("  ", level));
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|i| !i.is_array() && !i.is_object());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if flat {
                    if k > 0 {
                        out.push(' ');
                    }
                } else {
                    out.push('\n');
                    indent(out, level + 1);
                }
                write_value(out, item, level + 1);
            }
            if !flat {
                out.push('\n');
                indent(out, level);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(out, level + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[key], level + 1);
            }
            out.push('\n');
            indent(out, level);
            out.push('}');
        }
    }
}

/// A report type with a fixed CSV layout.
pub trait CsvRecord {
    const HEADER: &'static str;
    fn csv_row(&self) -> String;
}

impl CsvRecord for InequalityReport {
    const HEADER: &'static str = InequalityReport::CSV_HEADER;

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            format_float(self.p),
            format_float(self.length),
            format_float(self.lhs),
            format_float(self.rhs),
            format_float(self.deficit),
            self.holds
        )
    }
}

/// Header line plus one row per record, newline-terminated.
pub fn to_csv<R: CsvRecord>(records: &[R]) -> String {
    let mut out = String::from(R::HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chords::check_dp;
    use crate::geometry::regular_polygon;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, std::f64::consts::PI] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let parsed: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(parsed, x);
        }
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn keys_sorted_and_stable() {
        let r = check_dp(&regular_polygon(4, 4.0, 2).unwrap(), 1, 2.0).unwrap();
        let a = to_canonical_json(&r).unwrap();
        assert_eq!(a, to_canonical_json(&r).unwrap());
        let keys: Vec<usize> = [
            "\"L\"",
            "\"N\"",
            "\"deficit\"",
            "\"holds\"",
            "\"lhs\"",
            "\"m\"",
            "\"p\"",
            "\"rhs\"",
        ]
        .iter()
        .map(|k| a.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{a}");
        let back: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(back["lhs"].as_f64().unwrap(), r.lhs);
        assert_eq!(back["N"].as_u64().unwrap(), 4);
    }

    #[test]
    fn csv_layout() {
        let r = check_dp(&regular_polygon(4, 4.0, 2).unwrap(), 2, 2.0).unwrap();
        let csv = to_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "N,m,p,L,lhs,rhs,deficit,holds");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[0], "4");
        assert_eq!(row[7], "true");
    }
}
