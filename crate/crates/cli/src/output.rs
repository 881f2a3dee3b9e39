use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use ocrs::{Error, Result};

use crate::{Format, Global};

/// Writes a report to `--out` or stdout, as pretty JSON or as the CSV the
/// closure produces.
pub fn emit<T: Serialize>(g: &Global, report: &T, csv: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut w: Box<dyn Write> = match &g.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    match g.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
        Format::Csv => csv(&mut w)?,
    }
    w.flush()?;
    Ok(())
}

pub fn csv_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io(io::Error::other(e));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
