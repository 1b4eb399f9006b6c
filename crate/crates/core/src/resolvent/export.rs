//! Table export: plot-ready CSV and a fixed binary layout.
//!
//! Binary layout, all little-endian: `dim: u64`, `steps: u64`, `w: f64`,
//! `horizon: f64`, then `steps + 1` matrices row-major as `(re, im)` f64
//! pairs.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;
use crate::resolvent::OperatorResolventTable;

/// CSV with header `t, s00_re, s00_im, s01_re, ...`; floats printed with 17
/// significant digits so re-runs are byte-identical.
pub fn write_table_csv<W: Write>(table: &OperatorResolventTable, out: &mut W) -> Result<()> {
    let dim = table.dim;
    write!(out, "t")?;
    for i in 0..dim {
        for j in 0..dim {
            write!(out, ",s{i}{j}_re,s{i}{j}_im")?;
        }
    }
    writeln!(out)?;
    for (k, m) in table.matrices.iter().enumerate() {
        write!(out, "{:.16e}", table.grid.point(k))?;
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                write!(out, ",{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_table_binary<W: Write>(table: &OperatorResolventTable, out: &mut W) -> Result<()> {
    out.write_all(&(table.dim as u64).to_le_bytes())?;
    out.write_all(&(table.grid.steps() as u64).to_le_bytes())?;
    out.write_all(&table.w.to_le_bytes())?;
    out.write_all(&table.grid.horizon().to_le_bytes())?;
    for m in &table.matrices {
        for i in 0..table.dim {
            for j in 0..table.dim {
                let z = m[(i, j)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_table_binary<R: Read>(input: &mut R) -> Result<OperatorResolventTable> {
    let mut u64buf = [0u8; 8];
    input.read_exact(&mut u64buf)?;
    let dim = u64::from_le_bytes(u64buf) as usize;
    input.read_exact(&mut u64buf)?;
    let steps = u64::from_le_bytes(u64buf) as usize;
    input.read_exact(&mut u64buf)?;
    let w = f64::from_le_bytes(u64buf);
    input.read_exact(&mut u64buf)?;
    let horizon = f64::from_le_bytes(u64buf);
    if dim == 0 || dim > 1 << 16 {
        return Err(CoreError::InvalidArgument(format!(
            "implausible dimension {dim} in binary header"
        )));
    }
    let grid = TimeGrid::new(horizon, steps)?;
    let mut matrices = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                input.read_exact(&mut u64buf)?;
                let re = f64::from_le_bytes(u64buf);
                input.read_exact(&mut u64buf)?;
                let im = f64::from_le_bytes(u64buf);
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        matrices.push(m);
    }
    OperatorResolventTable::from_matrices(grid, w, 0.0, matrices)
}
