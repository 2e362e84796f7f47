//! `year,value` CSV files.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::TimeSeries;
use crate::error::{Error, Result};

/// Reads a series; the name is the file stem and the unit is empty.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = std::fs::File::open(path)?;
    read_csv(file, name)
}

pub fn read_csv(reader: impl Read, name: impl Into<String>) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(1, e))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols != ["year", "value"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `year,value`, found `{}`", cols.join(",")),
        });
    }
    let mut rows: BTreeMap<i32, Option<f64>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e)
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let year: i32 = rec[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid year `{}`", &rec[0]),
        })?;
        let value = match &rec[1] {
            "NA" => None,
            v => {
                let x: f64 = v.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid value `{v}`"),
                })?;
                if !x.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value `{v}`"),
                    });
                }
                Some(x)
            }
        };
        if rows.insert(year, value).is_some() {
            return Err(Error::DuplicateYear { year, line });
        }
    }
    let (times, values) = rows.into_iter().unzip();
    TimeSeries::new(name, "", times, values)
}

fn parse_err(line: usize, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Writes with shortest round-trip formatting, `NA` for missing values.
pub fn write_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_series(series, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn write_series(series: &TimeSeries, mut out: impl Write) -> Result<()> {
    writeln!(out, "year,value")?;
    for (t, v) in series.times().iter().zip(series.values()) {
        match v {
            Some(x) => writeln!(out, "{t},{x:?}")?,
            None => writeln!(out, "{t},NA")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_row() {
        let s = read_csv("year,value\n1900,0.5".as_bytes(), "x").unwrap();
        assert_eq!(s.times(), &[1900]);
        assert_eq!(s.get(1900), Some(0.5));
    }

    #[test]
    fn duplicate_year_reports_line() {
        let e = read_csv("year,value\n1900,0.5\n1900,0.7\n".as_bytes(), "x").unwrap_err();
        assert!(matches!(e, Error::DuplicateYear { year: 1900, line: 3 }), "{e:?}");
    }

    #[test]
    fn na_and_bad_values() {
        let s = read_csv("year,value\n1900,NA\n1901,1\n".as_bytes(), "x").unwrap();
        assert_eq!(s.values(), &[None, Some(1.0)]);
        let e = read_csv("year,value\n1900,1\n19x1,2\n".as_bytes(), "x").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = read_csv("yr,value\n1900,1\n".as_bytes(), "x").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = read_csv("year,value\n1900,1,3\n".as_bytes(), "x").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    proptest! {
        #[test]
        fn round_trip(first in 1800i32..2000, vals in prop::collection::vec(prop::option::weighted(0.8, -1e12f64..1e12), 0..50)) {
            let times = (0..vals.len() as i32).map(|i| first + i).collect();
            let s = TimeSeries::new("x", "", times, vals).unwrap();
            let mut buf = Vec::new();
            write_series(&s, &mut buf).unwrap();
            let back = read_csv(buf.as_slice(), "x").unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
