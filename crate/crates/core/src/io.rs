//! Problem files and report tables.
//!
//! Problem files are JSON:
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "kind": "linear",
//!   "objective": {"linear": {"c": [1, 2], "d0": 0}},
//!   "constraints": [{"h": [-1, 0], "d": 0}],
//!   "box": {"lower": [0, null], "upper": [1, 5]},
//!   "discrete_points": [[0, 0], [1, 1]]
//! }
//! ```
//!
//! `objective` may also be `{"quadratic": {"A": [[..]], "b": [..]}}`,
//! `{"expression": "x1^2 + x2"}`, or a list of objectives. A `null` box
//! entry is an infinite side.

use std::io::{Read, Write};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::model::{
    BoxBounds, ConstraintSet, HalfSpace, LinearObjective, Objective, ProblemKind, ProblemSpec, QuadraticObjective,
};
use crate::sampler::{LandauProfile, SweepData, SweepRow};
use crate::transform::MomentReport;

pub const TRANSFORM_SWEEP_HEADER: [&str; 5] = ["beta", "T", "logZ", "mean_O", "var_O"];
pub const SAMPLE_SWEEP_HEADER: [&str; 5] = ["beta", "T", "mean_O", "stderr_O", "var_O"];
pub const LANDAU_HEADER: [&str; 4] = ["bin_lo", "bin_hi", "count", "betaF"];

/// 17 significant digits, enough to reload the exact double.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.16e}")
}

fn number(v: &Value, field: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::schema(field, format!("expected a number, found {v}")))
}

fn vector(v: &Value, field: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::schema(field, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{field}[{i}]")))
        .collect()
}

fn vector_of_len(v: &Value, field: &str, n: usize) -> Result<Vec<f64>> {
    let out = vector(v, field)?;
    if out.len() != n {
        return Err(Error::schema(field, format!("expected {n} entries, found {}", out.len())));
    }
    Ok(out)
}

fn bound_side(v: &Value, field: &str, n: usize, fill: f64) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::schema(field, "expected an array"))?;
    if arr.len() != n {
        return Err(Error::schema(field, format!("expected {n} entries, found {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| if x.is_null() { Ok(fill) } else { number(x, &format!("{field}[{i}]")) })
        .collect()
}

fn parse_objective(v: &Value, field: &str, n: usize) -> Result<Objective> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::schema(field, "expected an object"))?;
    if obj.len() != 1 {
        return Err(Error::schema(field, "expected exactly one of `linear`, `quadratic`, `expression`"));
    }
    let (key, body) = obj.iter().next().unwrap();
    let sub = format!("{field}.{key}");
    match key.as_str() {
        "linear" => {
            let c = vector_of_len(body.get("c").unwrap_or(&Value::Null), &format!("{sub}.c"), n)?;
            let d0 = match body.get("d0") {
                None | Some(Value::Null) => 0.0,
                Some(d) => number(d, &format!("{sub}.d0"))?,
            };
            LinearObjective::new(c, d0)
                .map(Objective::from)
                .map_err(|e| Error::schema(sub, e.to_string()))
        }
        "quadratic" => {
            let a_field = format!("{sub}.A");
            let rows = body
                .get("A")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::schema(&a_field, "expected an n×n array"))?;
            if rows.len() != n {
                return Err(Error::schema(&a_field, format!("expected {n} rows, found {}", rows.len())));
            }
            let a = rows
                .iter()
                .enumerate()
                .map(|(i, r)| vector_of_len(r, &format!("{a_field}[{i}]"), n))
                .collect::<Result<Vec<_>>>()?;
            let b = match body.get("b") {
                None | Some(Value::Null) => vec![0.0; n],
                Some(b) => vector_of_len(b, &format!("{sub}.b"), n)?,
            };
            QuadraticObjective::new(a, b)
                .map(Objective::from)
                .map_err(|e| Error::schema(sub, e.to_string()))
        }
        "expression" => {
            let src = body
                .as_str()
                .ok_or_else(|| Error::schema(&sub, "expected a string"))?;
            parse_expression(src, n).map(Objective::from).map_err(|e| match e {
                Error::Schema { message, .. } => Error::schema(&sub, message),
                other => other,
            })
        }
        other => Err(Error::schema(field, format!("unknown objective type `{other}`"))),
    }
}

/// Parse and validate a problem document.
pub fn parse_problem(doc: &str) -> Result<ProblemSpec> {
    let root: Value = serde_json::from_str(doc)?;
    let root = root
        .as_object()
        .ok_or_else(|| Error::schema("<root>", "expected a JSON object"))?;
    let n = match root.get("dimension") {
        None => return Err(Error::schema("dimension", "missing")),
        Some(v) => v
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::schema("dimension", "expected a positive integer"))? as usize,
    };

    let objectives = match root.get("objective") {
        None => return Err(Error::schema("objective", "missing")),
        Some(Value::Array(list)) => {
            if list.is_empty() {
                return Err(Error::schema("objective", "empty objective list"));
            }
            list.iter()
                .enumerate()
                .map(|(i, o)| parse_objective(o, &format!("objective[{i}]"), n))
                .collect::<Result<Vec<_>>>()?
        }
        Some(o) => vec![parse_objective(o, "objective", n)?],
    };

    let mut rows = Vec::new();
    if let Some(c) = root.get("constraints").filter(|c| !c.is_null()) {
        let list = c
            .as_array()
            .ok_or_else(|| Error::schema("constraints", "expected a list of {h, d}"))?;
        for (i, row) in list.iter().enumerate() {
            let f = format!("constraints[{i}]");
            let h = vector_of_len(row.get("h").unwrap_or(&Value::Null), &format!("{f}.h"), n)?;
            let d = number(row.get("d").unwrap_or(&Value::Null), &format!("{f}.d"))?;
            rows.push(HalfSpace::new(h, d).map_err(|e| Error::schema(f, e.to_string()))?);
        }
    }

    let bounds = match root.get("box").filter(|b| !b.is_null()) {
        None => None,
        Some(b) => {
            let lower = bound_side(b.get("lower").unwrap_or(&Value::Null), "box.lower", n, f64::NEG_INFINITY)?;
            let upper = bound_side(b.get("upper").unwrap_or(&Value::Null), "box.upper", n, f64::INFINITY)?;
            Some(BoxBounds::new(lower, upper).map_err(|e| Error::schema("box", e.to_string()))?)
        }
    };
    let constraints = ConstraintSet::new(rows, bounds)?;

    let discrete_points = match root.get("discrete_points").filter(|d| !d.is_null()) {
        None => None,
        Some(d) => {
            let list = d
                .as_array()
                .ok_or_else(|| Error::schema("discrete_points", "expected a list of points"))?;
            Some(
                list.iter()
                    .enumerate()
                    .map(|(i, p)| vector_of_len(p, &format!("discrete_points[{i}]"), n))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };

    let kind = match root.get("kind").filter(|k| !k.is_null()) {
        Some(k) => serde_json::from_value::<ProblemKind>(k.clone()).map_err(|_| {
            Error::schema("kind", format!("expected linear, quadratic, blackbox or discrete, found {k}"))
        })?,
        None if discrete_points.is_some() => ProblemKind::Discrete,
        None => match objectives[0] {
            Objective::Linear(_) => ProblemKind::Linear,
            Objective::Quadratic(_) => ProblemKind::Quadratic,
            Objective::BlackBox(_) => ProblemKind::Blackbox,
        },
    };

    ProblemSpec::new(objectives, constraints, kind, discrete_points).map_err(|e| match e {
        Error::Input(msg) if kind == ProblemKind::Discrete => Error::schema("discrete_points", msg),
        Error::Input(msg) => Error::schema("kind", msg),
        other => other,
    })
}

pub fn read_problem_file(path: &std::path::Path) -> Result<ProblemSpec> {
    parse_problem(&std::fs::read_to_string(path)?)
}

/// Transform sweep table: `beta,T,logZ,mean_O,var_O`.
pub fn write_transform_csv<W: Write>(out: W, rows: &[(f64, MomentReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRANSFORM_SWEEP_HEADER)?;
    for (log_z, r) in rows {
        w.write_record([
            fmt_f64(r.beta),
            fmt_f64(r.temperature),
            fmt_f64(*log_z),
            fmt_f64(r.mean_o),
            fmt_f64(r.std_o * r.std_o),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sampled sweep table: `beta,T,mean_O,stderr_O,var_O` followed by one
/// `cov_ij` column per objective pair.
pub fn write_sweep_csv<W: Write>(out: W, sweep: &SweepData) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n_cov = sweep.rows.first().map_or(0, |r| r.covariances.len());
    let m = objectives_from_pairs(n_cov);
    let mut header: Vec<String> = SAMPLE_SWEEP_HEADER.iter().map(|s| s.to_string()).collect();
    for i in 0..m {
        for j in i + 1..m {
            header.push(format!("cov_{}{}", i + 1, j + 1));
        }
    }
    w.write_record(&header)?;
    for r in &sweep.rows {
        let mut rec = vec![
            fmt_f64(r.beta),
            fmt_f64(r.temperature),
            fmt_f64(r.mean),
            r.stderr.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.variance),
        ];
        rec.extend(r.covariances.iter().map(|&c| fmt_f64(c)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn objectives_from_pairs(pairs: usize) -> usize {
    let mut m = 1;
    while m * (m - 1) / 2 < pairs {
        m += 1;
    }
    m
}

/// Read either sweep table back. `stderr_O` is optional; `T` is recomputed
/// when absent.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<SweepData> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let beta_i = col("beta").ok_or_else(|| Error::schema("beta", "sweep table lacks a `beta` column"))?;
    let mean_i = col("mean_O").ok_or_else(|| Error::schema("mean_O", "sweep table lacks a `mean_O` column"))?;
    let var_i = col("var_O");
    let se_i = col("stderr_O");
    let cov_i: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("cov_"))
        .map(|(i, _)| i)
        .collect();
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |i: usize, name: &str| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::schema(name, format!("row {}: not a number", line + 1)))
        };
        let beta = get(beta_i, "beta")?;
        let stderr = match se_i {
            Some(i) if !rec.get(i).unwrap_or("").trim().is_empty() => Some(get(i, "stderr_O")?),
            _ => None,
        };
        rows.push(SweepRow {
            beta,
            temperature: 1.0 / beta,
            mean: get(mean_i, "mean_O")?,
            stderr,
            variance: match var_i {
                Some(i) => get(i, "var_O")?,
                None => f64::NAN,
            },
            covariances: cov_i.iter().map(|&i| get(i, "cov")).collect::<Result<_>>()?,
        });
    }
    SweepData::new(rows)
}

/// Landau table: `bin_lo,bin_hi,count,betaF`.
pub fn write_landau_csv<W: Write>(out: W, p: &LandauProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LANDAU_HEADER)?;
    for k in 0..p.counts.len() {
        w.write_record([
            fmt_f64(p.edges[k]),
            fmt_f64(p.edges[k + 1]),
            p.counts[k].to_string(),
            fmt_f64(p.beta_f[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Generic numeric table with a fixed header.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush()?;
    Ok(())
}
