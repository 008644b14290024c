//! Writers for reports: a file when a path is given, stdout otherwise.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use calu_core::{CaluError, Result};

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CaluError::Config(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for r in rows {
        w.serialize(r)
            .map_err(|e| CaluError::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
