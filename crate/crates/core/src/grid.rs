//! 2-D field export: CSV triples and the `PGRD` binary grid.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"PGRD"            magic
//! u32 nx, u32 ny     axis lengths
//! f64 x0, x1, y0, y1 axis extents (first and last sample)
//! f64 × nx·ny        values, row-major: values[ix·ny + iy]
//! ```

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::lindblad::WignerField;

pub const MAGIC: &[u8; 4] = b"PGRD";

/// A uniformly sampled 2-D real field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x_extent: (f64, f64),
    pub y_extent: (f64, f64),
    pub values: Vec<f64>,
}

impl Grid2D {
    pub fn new(x: &[f64], y: &[f64], values: Vec<f64>) -> io::Result<Self> {
        if x.is_empty() || y.is_empty() || values.len() != x.len() * y.len() {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "grid shape mismatch"));
        }
        Ok(Self {
            nx: x.len(),
            ny: y.len(),
            x_extent: (x[0], x[x.len() - 1]),
            y_extent: (y[0], y[y.len() - 1]),
            values,
        })
    }

    pub fn axis(extent: (f64, f64), n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![extent.0];
        }
        (0..n).map(|k| extent.0 + (extent.1 - extent.0) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn x(&self) -> Vec<f64> {
        Self::axis(self.x_extent, self.nx)
    }

    pub fn y(&self) -> Vec<f64> {
        Self::axis(self.y_extent, self.ny)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        let dims = |n: usize| {
            u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "axis too long"))
        };
        w.write_all(&dims(self.nx)?.to_le_bytes())?;
        w.write_all(&dims(self.ny)?.to_le_bytes())?;
        for v in [self.x_extent.0, self.x_extent.1, self.y_extent.0, self.y_extent.1] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> io::Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "not a PGRD file"));
        }
        let mut u = [0u8; 4];
        r.read_exact(&mut u)?;
        let nx = u32::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let ny = u32::from_le_bytes(u) as usize;
        let mut f = [0u8; 8];
        let mut next = |r: &mut R| -> io::Result<f64> {
            r.read_exact(&mut f)?;
            Ok(f64::from_le_bytes(f))
        };
        let x_extent = (next(&mut r)?, next(&mut r)?);
        let y_extent = (next(&mut r)?, next(&mut r)?);
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            values.push(next(&mut r)?);
        }
        Ok(Self { nx, ny, x_extent, y_extent, values })
    }

    /// `x,y,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W, names: [&str; 3]) -> io::Result<()> {
        writeln!(w, "{},{},{}", names[0], names[1], names[2])?;
        let (x, y) = (self.x(), self.y());
        for (ix, xv) in x.iter().enumerate() {
            for (iy, yv) in y.iter().enumerate() {
                let v = self.values[ix * self.ny + iy];
                writeln!(w, "{},{},{}", format_g(*xv), format_g(*yv), format_g(v))?;
            }
        }
        Ok(())
    }
}

impl From<&WignerField> for Grid2D {
    fn from(w: &WignerField) -> Self {
        Grid2D::new(&w.x_grid, &w.p_grid, w.values.clone()).expect("Wigner field is rectangular")
    }
}

/// C `printf("%.12g")`.
pub fn format_g(v: f64) -> String {
    format_g_prec(v, 12)
}

pub fn format_g_prec(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
