//! JSON loop specifications.
//!
//! ```text
//! {"type":"regular","N":6,"L":6.0,"dim":2}
//! {"type":"polygon","L":4.0,"points":[[0,0],[1,0],[1,1],[0,1]]}
//! {"type":"fourier","dim":2,"L":6.2831853,"coeffs":[{"n":1,"re":[1,0],"im":[0,1]}]}
//! {"type":"rhomboid","theta":1.0472,"side":1.0}
//! {"type":"random","seed":7,"M":8,"decay":3.0,"L":6.2831853,"dim":2}
//! ```
//!
//! `dim` defaults to 2 where optional. A fourier loop with `L` is rescaled
//! to that arc length; without it the coefficients are kept as given.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::geometry::{
    random_fourier_loop, regular_polygon, rhomboid, ArcLengthMap, FourierLoop, PointConfiguration,
};
use crate::{Error, Result};

pub const MAX_BEADS: usize = 1_000_000;
pub const MAX_MODE: usize = 100_000;
pub const MAX_DIM: usize = 64;

/// A parsed loop: either explicit beads or a smooth closed curve.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopSpec {
    Points(PointConfiguration),
    Curve(FourierLoop),
}

impl LoopSpec {
    pub fn dim(&self) -> usize {
        match self {
            LoopSpec::Points(c) => c.dim(),
            LoopSpec::Curve(c) => c.dim(),
        }
    }

    /// Beads of the spec; curves are sampled at `n` equidistant arc-length
    /// marks.
    pub fn configuration(&self, n: Option<usize>) -> Result<PointConfiguration> {
        match (self, n) {
            (LoopSpec::Points(c), None) => Ok(c.clone()),
            (LoopSpec::Points(c), Some(n)) if n == c.len() => Ok(c.clone()),
            (LoopSpec::Points(c), Some(n)) => Err(Error::InvalidInput(format!(
                "the loop has {} beads but N = {n} was requested",
                c.len()
            ))),
            (LoopSpec::Curve(_), None) => Err(Error::InvalidInput(
                "a fourier loop needs a bead count N to be sampled".into(),
            )),
            (LoopSpec::Curve(c), Some(n)) => {
                if n == 0 || n > MAX_BEADS {
                    return Err(Error::InvalidInput(format!(
                        "N = {n} outside 1..={MAX_BEADS}"
                    )));
                }
                crate::geometry::sample_equidistant(c, n, 1e-12)
            }
        }
    }
}

fn err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Spec(format!("field `{field}`: {msg}"))
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    kind: &'a str,
}

impl<'a> Fields<'a> {
    fn check_allowed(&self, allowed: &[&str]) -> Result<()> {
        for key in self.obj.keys() {
            if key != "type" && !allowed.contains(&key.as_str()) {
                return Err(err(key, format!("unknown field for type `{}`", self.kind)));
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> Result<&'a Value> {
        self.obj
            .get(name)
            .ok_or_else(|| err(name, format!("missing (required for type `{}`)", self.kind)))
    }

    fn real(&self, name: &str) -> Result<f64> {
        real_value(self.get(name)?, name)
    }

    fn positive(&self, name: &str) -> Result<f64> {
        let x = self.real(name)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(err(name, format!("must be positive, got {x}")))
        }
    }

    fn count(&self, name: &str, min: usize, max: usize) -> Result<usize> {
        count_value(self.get(name)?, name, min, max)
    }

    fn optional_count(&self, name: &str, min: usize, max: usize, default: usize) -> Result<usize> {
        match self.obj.get(name) {
            None => Ok(default),
            Some(v) => count_value(v, name, min, max),
        }
    }
}

fn real_value(v: &Value, name: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(err(name, format!("expected a finite number, got {v}"))),
    }
}

fn count_value(v: &Value, name: &str, min: usize, max: usize) -> Result<usize> {
    let k = v
        .as_u64()
        .ok_or_else(|| err(name, format!("expected a nonnegative integer, got {v}")))?;
    if k < min as u64 || k > max as u64 {
        return Err(err(name, format!("{k} outside {min}..={max}")));
    }
    Ok(k as usize)
}

fn real_array(v: &Value, name: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| err(name, format!("expected an array of numbers, got {v}")))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| real_value(x, &format!("{name}[{i}]")))
        .collect()
}

fn relabel(e: Error, field: &str) -> Error {
    match e {
        Error::Spec(msg) => Error::Spec(msg),
        other => err(field, other),
    }
}

/// Parses and validates a loop specification.
pub fn parse_loop_spec(text: &str) -> Result<LoopSpec> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("malformed JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Spec("expected a JSON object".into()))?;
    let kind = obj
        .get("type")
        .ok_or_else(|| err("type", "missing"))?
        .as_str()
        .ok_or_else(|| err("type", "expected a string"))?;
    let f = Fields { obj, kind };
    match kind {
        "regular" => {
            f.check_allowed(&["N", "L", "dim"])?;
            let n = f.count("N", 2, MAX_BEADS)?;
            let length = f.positive("L")?;
            let dim = f.optional_count("dim", 2, MAX_DIM, 2)?;
            Ok(LoopSpec::Points(regular_polygon(n, length, dim)?))
        }
        "polygon" => {
            f.check_allowed(&["L", "points"])?;
            let length = f.positive("L")?;
            let raw = f.get("points")?;
            let rows = raw
                .as_array()
                .ok_or_else(|| err("points", "expected an array of points"))?;
            if rows.is_empty() || rows.len() > MAX_BEADS {
                return Err(err("points", format!("needs 1..={MAX_BEADS} points")));
            }
            let points: Vec<Vec<f64>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| real_array(r, &format!("points[{i}]")))
                .collect::<Result<_>>()?;
            let dim = points[0].len();
            if !(2..=MAX_DIM).contains(&dim) {
                return Err(err(
                    "points[0]",
                    format!("dimension {dim} outside 2..={MAX_DIM}"),
                ));
            }
            if let Some(i) = points.iter().position(|p| p.len() != dim) {
                return Err(err(
                    &format!("points[{i}]"),
                    format!("has {} coordinates, expected {dim}", points[i].len()),
                ));
            }
            PointConfiguration::new(dim, length, &points)
                .map(LoopSpec::Points)
                .map_err(|e| relabel(e, "points"))
        }
        "fourier" => {
            f.check_allowed(&["dim", "L", "coeffs"])?;
            let dim = f.count("dim", 2, MAX_DIM)?;
            let length = match obj.get("L") {
                None => None,
                Some(_) => Some(f.positive("L")?),
            };
            let raw = f.get("coeffs")?;
            let entries = raw
                .as_array()
                .ok_or_else(|| err("coeffs", "expected an array of modes"))?;
            let mut coeffs = Vec::with_capacity(entries.len());
            for (i, e) in entries.iter().enumerate() {
                let name = format!("coeffs[{i}]");
                let o = e
                    .as_object()
                    .ok_or_else(|| err(&name, "expected an object with n, re, im"))?;
                if let Some(k) = o.keys().find(|k| !["n", "re", "im"].contains(&k.as_str())) {
                    return Err(err(&format!("{name}.{k}"), "unknown field"));
                }
                let n = o
                    .get("n")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| err(&format!("{name}.n"), "expected an integer"))?;
                if n.unsigned_abs() > MAX_MODE as u64 {
                    return Err(err(&format!("{name}.n"), format!("|n| exceeds {MAX_MODE}")));
                }
                let part = |key: &str| -> Result<Vec<f64>> {
                    let field = format!("{name}.{key}");
                    let v = real_array(o.get(key).ok_or_else(|| err(&field, "missing"))?, &field)?;
                    if v.len() != dim {
                        return Err(err(
                            &field,
                            format!("has {} entries, expected {dim}", v.len()),
                        ));
                    }
                    Ok(v)
                };
                let re = part("re")?;
                let im = part("im")?;
                let c = re
                    .iter()
                    .zip(&im)
                    .map(|(&a, &b)| Complex64::new(a, b))
                    .collect();
                coeffs.push((n, c));
            }
            let curve = FourierLoop::from_signed(dim, &coeffs).map_err(|e| relabel(e, "coeffs"))?;
            let curve = match length {
                None => curve,
                Some(l) => {
                    let total = ArcLengthMap::new(&curve, 1e-13)
                        .map_err(|e| relabel(e, "coeffs"))?
                        .total();
                    curve.scaled(l / total)
                }
            };
            Ok(LoopSpec::Curve(curve))
        }
        "rhomboid" => {
            f.check_allowed(&["theta", "side"])?;
            let theta = f.real("theta")?;
            let side = f.positive("side")?;
            rhomboid(theta, side)
                .map(LoopSpec::Points)
                .map_err(|e| relabel(e, "theta"))
        }
        "random" => {
            f.check_allowed(&["seed", "M", "decay", "L", "dim"])?;
            let seed = f
                .get("seed")?
                .as_u64()
                .ok_or_else(|| err("seed", "expected a nonnegative integer"))?;
            let modes = f.count("M", 1, MAX_MODE)?;
            let decay = f.real("decay")?;
            let length = f.positive("L")?;
            let dim = f.optional_count("dim", 2, MAX_DIM, 2)?;
            random_fourier_loop(seed, modes, decay, dim, length)
                .map(LoopSpec::Curve)
                .map_err(|e| relabel(e, "M"))
        }
        other => Err(err("type", format!("unknown loop type `{other}`"))),
    }
}

/// `{"type":"polygon","L":…,"points":[…]}` for a configuration.
pub fn polygon_spec(cfg: &PointConfiguration) -> Value {
    json!({
        "type": "polygon",
        "L": cfg.length(),
        "points": cfg.points().map(|p| p.to_vec()).collect::<Vec<_>>(),
    })
}

/// `{"type":"fourier",…}` listing the positive modes of a loop.
pub fn fourier_spec(curve: &FourierLoop) -> Value {
    let coeffs: Vec<Value> = (1..=curve.max_mode() as i64)
        .map(|n| {
            let c = curve.coeff(n);
            json!({
                "n": n,
                "re": c.iter().map(|z| z.re).collect::<Vec<_>>(),
                "im": c.iter().map(|z| z.im).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"type": "fourier", "dim": curve.dim(), "coeffs": coeffs})
}
