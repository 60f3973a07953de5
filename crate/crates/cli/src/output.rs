//! CSV and binary-grid writers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use paramp_core::grid::{format_g, Grid2D};
use serde::Serialize;

use crate::sweep::{Dataset, Value};

fn cell(v: &Value) -> String {
    match v {
        Value::Num(x) => format_g(*x),
        Value::Int(k) => k.to_string(),
        Value::Text(s) => s.clone(),
        Value::Missing => String::new(),
    }
}

/// Writes `# `-prefixed pretty JSON lines.
pub fn write_metadata<W: Write, T: Serialize>(w: &mut W, meta: &T) -> io::Result<()> {
    let json = serde_json::to_string_pretty(meta).map_err(io::Error::other)?;
    for line in json.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// CSV with the leading commented metadata block. Floats use `%.12g`.
pub fn write_csv<W: Write>(mut w: W, ds: &Dataset) -> io::Result<()> {
    write_metadata(&mut w, &ds.metadata)?;
    let mut out = csv_writer(w);
    out.write_record(ds.metadata.columns.iter().map(|c| c.name.as_str()))?;
    for row in &ds.rows {
        out.write_record(row.iter().map(cell))?;
    }
    out.flush()
}

/// Writes `<name>.csv` and one `.pgrd` file per side field into `dir`.
pub fn write_dataset(dir: &Path, ds: &Dataset) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", ds.metadata.config.name));
    write_csv(io::BufWriter::new(fs::File::create(&path)?), ds)?;
    for (stem, grid) in &ds.fields {
        grid.write_binary(io::BufWriter::new(fs::File::create(dir.join(format!("{stem}.pgrd")))?))?;
    }
    Ok(path)
}

/// A 2-D field as `x,y,value` CSV with a metadata block.
pub fn write_grid_csv<W: Write, T: Serialize>(mut w: W, meta: &T, grid: &Grid2D, names: [&str; 3]) -> io::Result<()> {
    write_metadata(&mut w, meta)?;
    grid.write_csv(w, names)
}

/// Optional matplotlib script: one line per model, `x` against each `ys`.
pub fn plot_script(csv_name: &str, x: &str, ys: &[&str]) -> String {
    let ys = ys.iter().map(|y| format!("{y:?}")).collect::<Vec<_>>().join(", ");
    format!(
        r##"import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else {csv_name:?}, comment="#")
ys = [{ys}]
fig, axes = plt.subplots(len(ys), 1, squeeze=False, figsize=(6, 3 * len(ys)))
for ax, y in zip(axes[:, 0], ys):
    for label, part in df.groupby("model", sort=False):
        ax.plot(part[{x:?}], part[y], label=label)
    ax.set_xlabel({x:?})
    ax.set_ylabel(y)
    ax.legend()
fig.tight_layout()
fig.savefig({png:?})
"##,
        png = csv_name.replace(".csv", ".png")
    )
}
