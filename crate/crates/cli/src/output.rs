//! Output plumbing: stdout-or-file writers and deterministic number
//! formatting for the CSV streams.

use std::fs::File;
use std::io::{self, BufWriter, Write};

pub enum Sink {
    Stdout(io::Stdout),
    File(BufWriter<File>),
}

impl Sink {
    pub fn open(path: Option<&str>) -> io::Result<Sink> {
        Ok(match path {
            Some(p) => Sink::File(BufWriter::new(File::create(p)?)),
            None => Sink::Stdout(io::stdout()),
        })
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(s) => s.write(buf),
            Sink::File(f) => f.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(s) => s.flush(),
            Sink::File(f) => f.flush(),
        }
    }
}

/// Round-trippable decimal rendering (comma-free, dot decimal point).
pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}
