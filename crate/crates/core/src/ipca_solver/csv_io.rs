//! Text format for data: a header line `p,q1,...,qk`, then the blocks.
//!
//! Block `i` follows as `p` lines of `q_i` comma-separated numbers. Numbers
//! are written in Rust's shortest round-trip form.

use nalgebra::DMatrix;

use super::SolverError;
use crate::quiver_core::{FloatRepresentation, Orientation};

/// `p,q1,...,qk` for the shape of `rep`.
pub fn shape_header(rep: &FloatRepresentation) -> String {
    rep.dimensions().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_csv(rep: &FloatRepresentation) -> Result<String, SolverError> {
    if rep.orientation() != Orientation::Inward {
        return Err(SolverError::Orientation);
    }
    let mut writer = csv::WriterBuilder::new().flexible(true).has_headers(false).from_writer(Vec::new());
    let format_err = |e: csv::Error| SolverError::Format(e.to_string());
    writer.write_record(rep.dimensions().iter().map(|d| d.to_string())).map_err(format_err)?;
    for block in rep.blocks() {
        for r in 0..block.nrows() {
            writer.write_record(block.row(r).iter().map(|v| v.to_string())).map_err(format_err)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| SolverError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| SolverError::Format(e.to_string()))
}

pub fn read_csv(text: &str) -> Result<FloatRepresentation, SolverError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| SolverError::Format("missing shape header".into()))?
        .map_err(|e| SolverError::Format(e.to_string()))?;
    let dims: Vec<usize> = header
        .iter()
        .map(|f| f.parse().map_err(|_| SolverError::Format(format!("bad dimension {f:?} in header"))))
        .collect::<Result<_, _>>()?;
    if dims.len() < 2 || dims.contains(&0) {
        return Err(SolverError::Format("header needs a positive center and at least one positive leg".into()));
    }
    let p = dims[0];
    let mut blocks = Vec::with_capacity(dims.len() - 1);
    for (i, &q) in dims[1..].iter().enumerate() {
        let mut values = Vec::with_capacity(p * q);
        for r in 0..p {
            let record = records
                .next()
                .ok_or_else(|| SolverError::Format(format!("block {} ends after {r} rows", i + 1)))?
                .map_err(|e| SolverError::Format(e.to_string()))?;
            if record.len() != q {
                return Err(SolverError::Format(format!(
                    "row {} of block {} has {} entries, expected {q}",
                    r + 1,
                    i + 1,
                    record.len()
                )));
            }
            for field in record.iter() {
                let v: f64 = field.parse().map_err(|_| SolverError::Format(format!("bad number {field:?}")))?;
                if !v.is_finite() {
                    return Err(SolverError::NonFinite);
                }
                values.push(v);
            }
        }
        blocks.push(DMatrix::from_row_slice(p, q, &values));
    }
    if let Some(extra) = records.next() {
        let line = extra.map(|r| r.position().map_or(0, |p| p.line())).unwrap_or(0);
        return Err(SolverError::Format(format!("unexpected data after the last block (line {line})")));
    }
    Ok(FloatRepresentation::new(Orientation::Inward, p, blocks)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let b1 = DMatrix::from_row_slice(2, 1, &[0.1, -3.5e-7]);
        let b2 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0 / 3.0, 4.0]);
        let rep = FloatRepresentation::inward(vec![b1, b2]).unwrap();
        let text = write_csv(&rep).unwrap();
        assert!(text.starts_with("2,1,2\n"));
        assert_eq!(read_csv(&text).unwrap(), rep);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(read_csv("1,2\n1\n").is_err());
        assert!(read_csv("1,1\n1\n2\n").is_err());
        assert!(read_csv("").is_err());
    }
}
