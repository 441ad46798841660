//! File formats.
//!
//! - Tomogram grid JSON: `{"thetas":[…],"xs":[…],"w":[[…]…]}`, densities
//!   written with 17 significant digits, plus an optional `"provenance"` key.
//! - Sample CSV: header `theta,x`, one record per line, LF endings,
//!   shortest round-trip floats.
//! - Wigner JSON: `{"qs":[…],"ps":[…],"w":[[…]…],"normalization":"integral_equals_2pi"}`.

use std::fmt::Write as _;
use std::io::{BufRead, BufWriter, Read, Write};

use serde_json::Value;

use crate::error::{Result, TomoError};
use crate::radon::WignerGrid;
use crate::tomogram::{OpticalTomogramGrid, QuadratureRecord, QuadratureSampleSet, SampleMetadata};

/// Header line of the sample CSV format.
pub const SAMPLE_CSV_HEADER: &str = "theta,x";

/// `v` with 17 significant digits in JSON-compatible exponent notation.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_array(out: &mut String, values: &[f64]) -> Result<()> {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(TomoError::InvalidParameter(format!("cannot write non-finite value {v}")));
        }
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_sig17(*v));
    }
    out.push(']');
    Ok(())
}

/// Renders a tomogram grid as JSON text.
pub fn grid_to_json(grid: &OpticalTomogramGrid, provenance: Option<&Value>) -> Result<String> {
    let mut out = String::with_capacity(24 * grid.thetas().len() * grid.xs().len() + 256);
    out.push_str("{\"thetas\":");
    push_array(&mut out, grid.thetas())?;
    out.push_str(",\"xs\":");
    push_array(&mut out, grid.xs())?;
    out.push_str(",\"w\":[");
    for (i, row) in grid.rows().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_array(&mut out, row)?;
    }
    out.push(']');
    if let Some(p) = provenance {
        write!(out, ",\"provenance\":{}", serde_json::to_string(p)?).expect("write to string");
    }
    out.push('}');
    Ok(out)
}

pub fn write_grid_json<W: Write>(grid: &OpticalTomogramGrid, provenance: Option<&Value>, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(grid_to_json(grid, provenance)?.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Parses a tomogram grid; unknown keys such as `provenance` are ignored.
pub fn read_grid_json<R: Read>(input: R) -> Result<OpticalTomogramGrid> {
    serde_json::from_reader(std::io::BufReader::new(input)).map_err(|e| TomoError::Parse(e.to_string()))
}

pub fn write_samples_csv<W: Write>(samples: &QuadratureSampleSet, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(SAMPLE_CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in samples.records() {
        writeln!(out, "{:?},{:?}", r.theta, r.x)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the sample CSV format; the header must be exactly `theta,x`.
pub fn read_samples_csv<R: Read>(input: R, source: &str) -> Result<QuadratureSampleSet> {
    let mut reader = std::io::BufReader::new(input);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    if header.trim_end_matches('\n') != SAMPLE_CSV_HEADER {
        return Err(TomoError::Parse(format!(
            "sample CSV header must be exactly {SAMPLE_CSV_HEADER:?}, found {:?}",
            header.trim_end()
        )));
    }
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_reader(reader);
    let mut records = Vec::new();
    for (line, row) in csv.records().enumerate() {
        let row = row.map_err(|e| TomoError::Parse(e.to_string()))?;
        if row.len() != 2 {
            return Err(TomoError::Parse(format!(
                "line {}: expected 2 fields, found {}",
                line + 2,
                row.len()
            )));
        }
        let field = |i: usize| -> Result<f64> {
            let v: f64 = row[i]
                .parse()
                .map_err(|_| TomoError::Parse(format!("line {}: bad number {:?}", line + 2, &row[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(TomoError::Parse(format!("line {}: non-finite value", line + 2)))
            }
        };
        records.push(QuadratureRecord {
            theta: field(0)?,
            x: field(1)?,
        });
    }
    Ok(QuadratureSampleSet::new(
        records,
        SampleMetadata {
            source: source.to_string(),
            seed: None,
            rng: None,
        },
    ))
}

/// Wigner grid JSON, with an optional `provenance` key.
pub fn wigner_to_json(grid: &WignerGrid, provenance: Option<&Value>) -> Result<String> {
    let mut value = serde_json::to_value(grid)?;
    if let (Some(p), Some(map)) = (provenance, value.as_object_mut()) {
        map.insert("provenance".into(), p.clone());
    }
    Ok(serde_json::to_string(&value)?)
}

pub fn read_wigner_json<R: Read>(input: R) -> Result<WignerGrid> {
    serde_json::from_reader(std::io::BufReader::new(input)).map_err(|e| TomoError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::GaussianState;
    use crate::tomogram::equispaced_thetas;
    use crate::quadrature::linspace;

    #[test]
    fn sig17_formatting() {
        assert_eq!(format_sig17(0.5641895835477563), "5.6418958354775628e-1");
        let v: f64 = format_sig17(0.1).parse().unwrap();
        assert_eq!(v, 0.1);
    }

    #[test]
    fn grid_json_round_trip_is_exact() {
        let g = OpticalTomogramGrid::from_state(
            &GaussianState::coherent(0.4, -0.2).unwrap().into(),
            equispaced_thetas(5),
            linspace(-4.0, 4.0, 33),
        )
        .unwrap();
        let prov = serde_json::json!({"command": "test"});
        let text = grid_to_json(&g, Some(&prov)).unwrap();
        let back = read_grid_json(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["provenance"]["command"], "test");
    }

    #[test]
    fn malformed_grid_json_is_rejected() {
        let text = r#"{"thetas":[0.0],"xs":[0.0,1.0],"w":[[1.0]]}"#;
        assert!(matches!(read_grid_json(text.as_bytes()), Err(TomoError::Parse(_))));
    }

    #[test]
    fn csv_round_trip() {
        let set = QuadratureSampleSet::new(
            vec![
                QuadratureRecord { theta: 0.0, x: -1.25 },
                QuadratureRecord { theta: std::f64::consts::FRAC_PI_4, x: 1e-7 },
            ],
            SampleMetadata::default(),
        );
        let mut buf = Vec::new();
        write_samples_csv(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("theta,x\n"));
        assert!(!text.contains('\r'));
        let back = read_samples_csv(&buf[..], "mem").unwrap();
        assert_eq!(back.records(), set.records());
    }

    #[test]
    fn csv_header_is_checked() {
        assert!(read_samples_csv("x,theta\n0,1\n".as_bytes(), "mem").is_err());
        assert!(read_samples_csv("theta,x\n0,abc\n".as_bytes(), "mem").is_err());
        assert!(read_samples_csv("theta,x\n0,1,2\n".as_bytes(), "mem").is_err());
        assert_eq!(read_samples_csv("theta,x\n".as_bytes(), "mem").unwrap().len(), 0);
    }
}
