//! Plot-ready CSV for paths: rows at grid times carry values with
//! `is_jump = 0`, one extra row per jump carries the jump time and size with
//! `is_jump = 1`. Floats print with 17 significant digits so identical runs
//! produce identical files.

use std::io::Write;

use crate::error::Result;
use crate::stochastic::{MartingalePath, SolutionPath};

pub fn write_solution_csv<W: Write>(u: &SolutionPath, out: &mut W) -> Result<()> {
    let dim = u.dim();
    write!(out, "t")?;
    for d in 0..dim {
        write!(out, ",u{d}_re,u{d}_im")?;
    }
    writeln!(out, ",is_jump")?;
    let mut jumps = u.jumps.iter().peekable();
    for (k, t) in u.grid.points().enumerate() {
        while let Some(j) = jumps.peek() {
            if j.time <= t {
                write!(out, "{:.16e}", j.time)?;
                for d in 0..dim {
                    write!(out, ",{:.16e},{:.16e}", j.size[d], 0.0)?;
                }
                writeln!(out, ",1")?;
                jumps.next();
            } else {
                break;
            }
        }
        write!(out, "{t:.16e}")?;
        for d in 0..dim {
            let z = u.values[k][d];
            write!(out, ",{:.16e},{:.16e}", z.re, z.im)?;
        }
        writeln!(out, ",0")?;
    }
    Ok(())
}

pub fn write_martingale_csv<W: Write>(l: &MartingalePath, out: &mut W) -> Result<()> {
    let dim = l.dim();
    write!(out, "t")?;
    for d in 0..dim {
        write!(out, ",l{d}")?;
    }
    writeln!(out, ",is_jump")?;
    let mut jumps = l.jumps.iter().peekable();
    for (k, t) in l.grid.points().enumerate() {
        while let Some(j) = jumps.peek() {
            if j.time <= t {
                write!(out, "{:.16e}", j.time)?;
                for d in 0..dim {
                    write!(out, ",{:.16e}", j.size[d])?;
                }
                writeln!(out, ",1")?;
                jumps.next();
            } else {
                break;
            }
        }
        let v = l.value_at_index(k);
        write!(out, "{t:.16e}")?;
        for d in 0..dim {
            write!(out, ",{:.16e}", v[d])?;
        }
        writeln!(out, ",0")?;
    }
    Ok(())
}
