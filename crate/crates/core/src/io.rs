//! File formats.
//!
//! Recurrence spec (JSON):
//!
//! ```json
//! {"p": 2, "a": [[5, 0], [-6, 0]], "field": "real", "dim": 1, "norm": "sup"}
//! ```
//!
//! `a` entries may also be plain numbers. `field`, `dim` and `norm` default to
//! `"real"`, `1` and `"sup"`.
//!
//! Sequences (CSV, UTF-8, LF): header `n,comp_0_re,comp_0_im,...`, one row per
//! index starting at 0.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Result, UlamError};
use crate::recurrence::{Field, RecurrenceSpec};
use crate::series::{Norm, Series};
use crate::shadowing::ShadowResult;

fn field_err(field: &str, msg: impl std::fmt::Display) -> UlamError {
    UlamError::InvalidSpec(format!("field `{field}`: {msg}"))
}

fn parse_coefficient(v: &Value, k: usize) -> Result<Complex64> {
    let name = format!("a[{k}]");
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(|| field_err(&name, "not a finite number")),
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0]
                .as_f64()
                .ok_or_else(|| field_err(&name, "real part is not a number"))?;
            let im = parts[1]
                .as_f64()
                .ok_or_else(|| field_err(&name, "imaginary part is not a number"))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(field_err(&name, "expected a number or a [re, im] pair")),
    }
}

pub fn parse_spec(text: &str) -> Result<RecurrenceSpec> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| UlamError::InvalidSpec(format!("malformed JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| UlamError::InvalidSpec("expected a JSON object".into()))?;

    let p = obj
        .get("p")
        .ok_or_else(|| field_err("p", "missing"))?
        .as_u64()
        .filter(|&p| p >= 1)
        .ok_or_else(|| field_err("p", "must be a positive integer"))? as usize;
    let a = obj
        .get("a")
        .ok_or_else(|| field_err("a", "missing"))?
        .as_array()
        .ok_or_else(|| field_err("a", "must be an array"))?;
    if a.len() != p {
        return Err(field_err(
            "a",
            format!("has {} entries but p = {p}", a.len()),
        ));
    }
    let coefficients = a
        .iter()
        .enumerate()
        .map(|(k, v)| parse_coefficient(v, k))
        .collect::<Result<Vec<_>>>()?;

    let field = match obj.get("field") {
        None => Field::Real,
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|_| field_err("field", "must be \"real\" or \"complex\""))?,
    };
    let dim = match obj.get("dim") {
        None => 1,
        Some(v) => {
            v.as_u64()
                .filter(|&d| d >= 1)
                .ok_or_else(|| field_err("dim", "must be a positive integer"))? as usize
        }
    };
    let norm = match obj.get("norm") {
        None => Norm::Sup,
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|_| field_err("norm", "must be \"sup\" or \"euclid\""))?,
    };
    RecurrenceSpec::new(coefficients, field, dim, norm)
}

pub fn spec_to_json(spec: &RecurrenceSpec) -> String {
    let a: Vec<[f64; 2]> = spec.coefficients().iter().map(|c| [c.re, c.im]).collect();
    json!({
        "p": spec.order(),
        "a": a,
        "field": spec.field(),
        "dim": spec.dim(),
        "norm": spec.norm(),
    })
    .to_string()
}

fn csv_err(msg: impl std::fmt::Display) -> UlamError {
    UlamError::InvalidSpec(format!("sequence CSV: {msg}"))
}

fn component_header(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim)
        .flat_map(|c| [format!("{prefix}_{c}_re"), format!("{prefix}_{c}_im")])
        .collect()
}

pub fn read_series<R: Read>(reader: R) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() < 3 || header.len() % 2 == 0 || &header[0] != "n" {
        return Err(csv_err("header must be n,comp_0_re,comp_0_im,..."));
    }
    let dim = (header.len() - 1) / 2;
    let expected = component_header("comp", dim);
    for (got, want) in header.iter().skip(1).zip(&expected) {
        if got != want {
            return Err(csv_err(format!(
                "unexpected column `{got}`, wanted `{want}`"
            )));
        }
    }
    let mut data = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let n: usize = record[0]
            .parse()
            .map_err(|_| csv_err(format!("row {row_idx}: bad index `{}`", &record[0])))?;
        if n != row_idx {
            return Err(csv_err(format!("row {row_idx}: index {n} out of order")));
        }
        for c in 0..dim {
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| csv_err(format!("row {row_idx}: bad value `{s}`")))
            };
            data.push(Complex64::new(
                parse(&record[1 + 2 * c])?,
                parse(&record[2 + 2 * c])?,
            ));
        }
    }
    Series::new(dim, data)
}

fn lf_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer)
}

fn push_point(row: &mut Vec<String>, point: &[Complex64]) {
    for z in point {
        row.push(z.re.to_string());
        row.push(z.im.to_string());
    }
}

pub fn write_series<W: Write>(writer: W, series: &Series) -> Result<()> {
    let mut w = lf_writer(writer);
    let mut header = vec!["n".to_string()];
    header.extend(component_header("comp", series.dim()));
    w.write_record(&header).map_err(csv_err)?;
    for (n, point) in series.points().enumerate() {
        let mut row = vec![n.to_string()];
        push_point(&mut row, point);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    Ok(())
}

/// `n, y_0_re, y_0_im, ..., cert_error, deviation`.
pub fn write_shadow<W: Write>(writer: W, result: &ShadowResult) -> Result<()> {
    let mut w = lf_writer(writer);
    let mut header = vec!["n".to_string()];
    header.extend(component_header("y", result.shadow.dim()));
    header.push("cert_error".into());
    header.push("deviation".into());
    w.write_record(&header).map_err(csv_err)?;
    for (n, point) in result.shadow.values.points().enumerate() {
        let mut row = vec![n.to_string()];
        push_point(&mut row, point);
        row.push(result.cert_error[n].to_string());
        row.push(result.deviation[n].to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_pair_coefficients() {
        let s = parse_spec(r#"{"p": 2, "a": [5, [-6, 0]]}"#).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.coefficients()[1], Complex64::new(-6.0, 0.0));
        assert_eq!(s.field(), Field::Real);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.norm(), Norm::Sup);

        let s =
            parse_spec(r#"{"p":1,"a":[[0,2]],"field":"complex","dim":3,"norm":"euclid"}"#).unwrap();
        assert_eq!(s.coefficients()[0], Complex64::new(0.0, 2.0));
        assert_eq!(s.dim(), 3);
        assert_eq!(s.norm(), Norm::Euclid);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let cases = [
            (r#"{"a": [1]}"#, "`p`"),
            (r#"{"p": 2, "a": [1]}"#, "`a`"),
            (r#"{"p": 1, "a": ["x"]}"#, "`a[0]`"),
            (r#"{"p": 1, "a": [2], "norm": "l1"}"#, "`norm`"),
            (r#"{"p": 1, "a": [2], "field": "quaternion"}"#, "`field`"),
            (r#"{"p": 1, "a": [2], "dim": 0}"#, "`dim`"),
        ];
        for (text, needle) in cases {
            let msg = parse_spec(text).unwrap_err().to_string();
            assert!(msg.contains(needle), "{text}: {msg}");
        }
        assert!(parse_spec("{").is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s = parse_spec(r#"{"p":2,"a":[[1,0.5],[-2,0]],"field":"complex"}"#).unwrap();
        assert_eq!(parse_spec(&spec_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn csv_layout_is_exact() {
        let s = Series::from_points(
            2,
            &[
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, -2.0)],
                vec![Complex64::new(-3.25, 1e-3), Complex64::new(0.0, 0.0)],
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_series(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,comp_0_re,comp_0_im,comp_1_re,comp_1_im\n0,1,0,0.5,-2\n1,-3.25,0.001,0,0\n"
        );
        assert_eq!(read_series(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(read_series("n,x\n0,1\n".as_bytes()).is_err());
        assert!(read_series("n,comp_0_re,comp_0_im\n1,1,0\n".as_bytes()).is_err());
        assert!(read_series("n,comp_0_re,comp_0_im\n0,abc,0\n".as_bytes()).is_err());
    }
}
