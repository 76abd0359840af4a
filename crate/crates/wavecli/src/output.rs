use crate::error::CliError;
use csv::{Terminator, Writer, WriterBuilder};
use std::fs::File;
use std::path::Path;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    w: Writer<File>,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_path(dir.join(name))?;
        w.write_record(header)?;
        Ok(Self { w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush()?;
        Ok(())
    }
}

/// Two-column name,value file.
pub fn pairs(dir: &Path, name: &str, rows: &[(&str, String)]) -> Result<(), CliError> {
    let mut t = Table::create(dir, name, &["name", "value"])?;
    for (k, v) in rows {
        t.row([k.to_string(), v.clone()])?;
    }
    t.finish()
}
