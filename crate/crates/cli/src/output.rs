//! Deterministic text rendering and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use eitat::lineshape::SpectrumTable;

pub const SCHEMA_VERSION: u32 = 1;

pub const SPECTRUM_COLUMNS: [&str; 8] = [
    "delta_p", "re_r1", "im_r1", "re_r2", "im_r2", "re_total", "im_total", "absorption",
];

/// Shortest decimal that round-trips, `.` separator, independent of locale.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv_line(out: &mut String, fields: &[f64]) {
    let line = fields.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
    out.push_str(&line);
    out.push('\n');
}

pub fn spectrum_fields(row: &eitat::lineshape::SpectrumRow) -> [f64; 8] {
    [
        row.delta_p,
        row.r1.re,
        row.r1.im,
        row.r2.re,
        row.r2.im,
        row.total.re,
        row.total.im,
        row.absorption,
    ]
}

pub fn spectrum_csv(table: &SpectrumTable) -> String {
    let mut out = SPECTRUM_COLUMNS.join(",");
    out.push('\n');
    for row in &table.rows {
        csv_line(&mut out, &spectrum_fields(row));
    }
    out
}

#[derive(Serialize)]
pub struct SpectrumRowJson {
    delta_p: f64,
    re_r1: f64,
    im_r1: f64,
    re_r2: f64,
    im_r2: f64,
    re_total: f64,
    im_total: f64,
    absorption: f64,
}

pub fn spectrum_rows_json(table: &SpectrumTable) -> Vec<SpectrumRowJson> {
    table
        .rows
        .iter()
        .map(|r| {
            let [delta_p, re_r1, im_r1, re_r2, im_r2, re_total, im_total, absorption] = spectrum_fields(r);
            SpectrumRowJson {
                delta_p,
                re_r1,
                im_r1,
                re_r2,
                im_r2,
                re_total,
                im_total,
                absorption,
            }
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Key-value report lines, `key: value`.
pub fn report(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}: {v}");
    }
    out
}

/// Writes to `path` through a temporary sibling and a rename, or to stdout.
pub fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
        Some(path) => {
            let file_name = path
                .file_name()
                .with_context(|| format!("output path {} has no file name", path.display()))?;
            let mut tmp_name = std::ffi::OsString::from(".");
            tmp_name.push(file_name);
            tmp_name.push(format!(".tmp{}", std::process::id()));
            let tmp = path.with_file_name(tmp_name);
            fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, -2.5e-12, 1.0 / 3.0, 123456.789, 1e300] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(0.5), "0.5");
        assert!(!num(1e-7).contains(','));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        emit("a\n", Some(&p)).unwrap();
        emit("b\n", Some(&p)).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
