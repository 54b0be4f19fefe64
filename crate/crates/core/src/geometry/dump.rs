//! Field dumps: one JSON header line, then little-endian `f64` values.
//!
//! Complex data is interleaved `(re, im)`. Matrix-valued data is stored site by
//! site, each matrix row-major. The header's `components` field is the number
//! of `f64` values per site.

use super::GridDomain;
use crate::error::{PhymError, Result};
use crate::matcalc::{CMat, C64};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub kind: String,
    pub n: usize,
    pub extents: Vec<f64>,
    pub points: Vec<usize>,
    pub dtype: String,
    pub components: usize,
}

impl DumpHeader {
    pub fn for_matrices(d: &GridDomain, r: usize) -> Self {
        DumpHeader {
            kind: format!("{:?}", d.kind).to_lowercase(),
            n: d.n(),
            extents: d.lengths.clone(),
            points: d.points.clone(),
            dtype: "f64le".into(),
            components: 2 * r * r,
        }
    }
}

pub fn write_dump<W: Write>(mut w: W, header: &DumpHeader, field: &[CMat]) -> Result<()> {
    let io = |e: std::io::Error| PhymError::Numeric(format!("dump write failed: {e}"));
    let line = serde_json::to_string(header).map_err(|e| PhymError::Numeric(e.to_string()))?;
    writeln!(w, "{line}").map_err(io)?;
    for m in field {
        for z in m.to_vec() {
            w.write_all(&z.re.to_le_bytes()).map_err(io)?;
            w.write_all(&z.im.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_dump<R: BufRead>(mut r: R) -> Result<(DumpHeader, Vec<CMat>)> {
    let bad = |m: String| PhymError::Validation(format!("dump: {m}"));
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| bad(e.to_string()))?;
    let header: DumpHeader = serde_json::from_str(line.trim_end()).map_err(|e| bad(e.to_string()))?;
    let rank = ((header.components / 2) as f64).sqrt().round() as usize;
    if 2 * rank * rank != header.components {
        return Err(bad(format!("{} components is not a square matrix", header.components)));
    }
    let sites: usize = header.points.iter().product();
    let mut buf = vec![0u8; sites * header.components * 8];
    r.read_exact(&mut buf).map_err(|e| bad(e.to_string()))?;
    let vals: Vec<f64> = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = vals
        .chunks_exact(header.components)
        .map(|c| CMat::from_fn(rank, |i, j| C64::new(c[2 * (i * rank + j)], c[2 * (i * rank + j) + 1])))
        .collect();
    Ok((header, field))
}
