//! Debug dumps of grid fields.
//!
//! CSV: a header `node,theta_1,…,theta_n,c_0,…` and one row per node.
//! Binary: magic `CVLF`, then little-endian `u32` version, `n`, component
//! count and the `n` axis resolutions, followed by the node-major `f64`
//! values. Symmetric tensors store the upper triangle row by row.

use super::field::GridField;
use crate::error::{LabError, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"CVLF";
const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> LabError {
    LabError::Resource(format!("i/o failure: {e}"))
}

pub fn write_csv<F: GridField>(field: &F, out: &mut impl Write) -> Result<()> {
    let chart = field.chart();
    let n = chart.n();
    let nc = F::components(chart);
    let mut header = String::from("node");
    for a in 1..=n {
        header.push_str(&format!(",theta_{a}"));
    }
    for c in 0..nc {
        header.push_str(&format!(",c_{c}"));
    }
    writeln!(out, "{header}").map_err(io_err)?;
    for k in 0..chart.len() {
        let th = chart.node_angles(k);
        let mut row = k.to_string();
        for t in &th[..n] {
            row.push_str(&format!(",{t:?}"));
        }
        for v in field.node(k) {
            row.push_str(&format!(",{v:?}"));
        }
        writeln!(out, "{row}").map_err(io_err)?;
    }
    Ok(())
}

pub fn write_binary<F: GridField>(field: &F, out: &mut impl Write) -> Result<()> {
    let chart = field.chart();
    out.write_all(MAGIC).map_err(io_err)?;
    let mut header = vec![VERSION, chart.n() as u32, F::components(chart) as u32];
    header.extend(chart.dims().iter().map(|&d| d as u32));
    for h in header {
        out.write_all(&h.to_le_bytes()).map_err(io_err)?;
    }
    for v in field.data() {
        out.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

/// Raw content of a binary dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub dims: Vec<usize>,
    pub components: usize,
    pub values: Vec<f64>,
}

pub fn read_binary(input: &mut impl Read) -> Result<FieldDump> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(LabError::Resource("not a field dump".into()));
    }
    let mut word = || -> Result<u32> {
        let mut b = [0u8; 4];
        input.read_exact(&mut b).map_err(io_err)?;
        Ok(u32::from_le_bytes(b))
    };
    let version = word()?;
    if version != VERSION {
        return Err(LabError::Resource(format!("unsupported dump version {version}")));
    }
    let n = word()? as usize;
    let components = word()? as usize;
    let dims = (0..n).map(|_| word().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    let count = dims.iter().product::<usize>() * components;
    let mut values = Vec::with_capacity(count);
    let mut b = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut b).map_err(io_err)?;
        values.push(f64::from_le_bytes(b));
    }
    Ok(FieldDump { dims, components, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Chart, FdOrder, MetricField};
    use std::sync::Arc;

    #[test]
    fn binary_roundtrip_is_lossless() {
        let chart = Arc::new(Chart::new(3, 1.0, &[8, 8, 10], FdOrder::Fourth).unwrap());
        let g = MetricField::round(&chart);
        let mut buf = Vec::new();
        write_binary(g.field(), &mut buf).unwrap();
        let dump = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(dump.dims, vec![8, 8, 10]);
        assert_eq!(dump.components, 6);
        assert_eq!(dump.values, g.field().data());
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let chart = Arc::new(Chart::new(3, 1.0, &[8, 8, 8], FdOrder::Fourth).unwrap());
        let g = MetricField::round(&chart);
        let mut buf = Vec::new();
        write_csv(g.field(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 1 + 3 + 6);
        assert_eq!(lines.count(), chart.len());
    }
}
