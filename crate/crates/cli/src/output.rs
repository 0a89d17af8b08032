//! Output documents.
//!
//! JSON: `{"meta": {"n", "eps", "seed", "version"}, "records": [...]}`.
//! CSV: one header row, then one row per record. Floats are written as the
//! shortest decimal that round-trips, identically in both formats.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    pub version: &'static str,
}

/// A record that can also be written as a CSV row.
pub trait Row: Serialize {
    fn header(&self) -> Vec<String>;
    fn cells(&self) -> Vec<String>;
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    meta: &'a Meta,
    records: &'a [R],
}

pub fn float(x: f64) -> String {
    serde_json::Value::from(x).to_string()
}

pub fn floats(prefix: &str, xs: &[f64]) -> (Vec<String>, Vec<String>) {
    let names = (1..=xs.len()).map(|i| format!("{prefix}{i}")).collect();
    (names, xs.iter().map(|x| float(*x)).collect())
}

pub fn render<R: Row>(meta: &Meta, records: &[R], format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(&Document { meta, records }).map_err(io::Error::other)?;
            buf.push(b'\n');
            Ok(buf)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let header = records.first().map(Row::header).unwrap_or_default();
            w.write_record(&header)?;
            for r in records {
                w.write_record(r.cells())?;
            }
            w.into_inner().map_err(|e| e.into_error())
        }
    }
}

/// Where a command writes: an explicit file, a file in the default
/// directory, or standard output.
#[derive(Debug, Clone)]
pub enum Target {
    File(PathBuf),
    Stdout,
}

impl Target {
    pub fn resolve(out: Option<PathBuf>, out_dir: Option<PathBuf>, default_name: &str) -> Self {
        match (out, out_dir) {
            (Some(p), _) if p.as_os_str() == "-" => Target::Stdout,
            (Some(p), _) => Target::File(p),
            (None, Some(d)) => Target::File(d.join(default_name)),
            (None, None) => Target::Stdout,
        }
    }

    pub fn write(&self, bytes: &[u8]) -> io::Result<()> {
        match self {
            Target::File(p) => write_file(p, bytes),
            Target::Stdout => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct P {
        a: f64,
        s: String,
    }

    impl Row for P {
        fn header(&self) -> Vec<String> {
            vec!["a".into(), "s".into()]
        }
        fn cells(&self) -> Vec<String> {
            vec![float(self.a), self.s.clone()]
        }
    }

    fn meta() -> Meta {
        Meta { n: 2, eps: 0.1, seed: 7, version: "x" }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -0.1, 1.0, 0.0, 1e-20, 123456.789, std::f64::consts::PI, 1.0 / 3.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.1), "0.1");
    }

    #[test]
    fn csv_quotes_commas() {
        let rows = [P { a: 0.5, s: "x,y".into() }];
        let text = String::from_utf8(render(&meta(), &rows, Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "a,s\n0.5,\"x,y\"\n");
    }

    #[test]
    fn json_has_meta_and_records() {
        let rows = [P { a: 0.5, s: "z".into() }];
        let v: serde_json::Value = serde_json::from_slice(&render(&meta(), &rows, Format::Json).unwrap()).unwrap();
        assert_eq!(v["meta"]["n"], 2);
        assert_eq!(v["meta"]["eps"], 0.1);
        assert_eq!(v["records"][0]["a"], 0.5);
    }

    #[test]
    fn target_resolution() {
        assert!(matches!(Target::resolve(None, None, "a.json"), Target::Stdout));
        assert!(matches!(Target::resolve(Some("-".into()), Some("d".into()), "a.json"), Target::Stdout));
        match Target::resolve(None, Some("d".into()), "a.json") {
            Target::File(p) => assert_eq!(p, PathBuf::from("d/a.json")),
            _ => panic!(),
        }
    }
}
