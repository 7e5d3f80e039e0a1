//! CSV and JSON writers for boundary clouds.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CellDiagnostic, ScanConfig, ScanOutcome, ScanStats};
use crate::error::{Error, Result};
use crate::oracle::{BoundaryCloud, BoundaryPoint};

/// Everything the JSON output holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDocument {
    pub cloud: BoundaryCloud,
    pub config: ScanConfig,
    pub stats: ScanStats,
    pub cells: Vec<CellDiagnostic>,
}

fn push_num(out: &mut String, v: f64) {
    // 17 significant digits round-trip every finite double
    write!(out, "{v:.16e}").expect("writing to a String cannot fail");
}

/// The cloud as CSV text: header `f_1..f_m,x_1..x_d,k,V,a_1..a_m,b_1..b_m`,
/// one row per point in the cloud's order.
pub fn csv_string(cloud: &BoundaryCloud, m: usize, d: usize) -> Result<String> {
    let mut cols: Vec<String> = Vec::new();
    cols.extend((1..=m).map(|i| format!("f_{i}")));
    cols.extend((1..=d).map(|i| format!("x_{i}")));
    cols.push("k".into());
    cols.push("V".into());
    cols.extend((1..=m).map(|i| format!("a_{i}")));
    cols.extend((1..=m).map(|i| format!("b_{i}")));
    let mut out = cols.join(",");
    out.push('\n');
    for p in &cloud.points {
        if p.f.len() != m || p.a.len() != m || p.b.len() != m || p.x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.f.len(),
            });
        }
        let mut first = true;
        let mut sep = |out: &mut String| {
            if !first {
                out.push(',');
            }
            first = false;
        };
        for v in p.f.iter().chain(&p.x) {
            sep(&mut out);
            push_num(&mut out, *v);
        }
        sep(&mut out);
        write!(out, "{}", p.k).expect("writing to a String cannot fail");
        for v in std::iter::once(&p.value).chain(&p.a).chain(&p.b) {
            sep(&mut out);
            push_num(&mut out, *v);
        }
        out.push('\n');
    }
    Ok(out)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => Ok(fs::create_dir_all(dir)?),
        _ => Ok(()),
    }
}

pub fn write_csv(path: &Path, cloud: &BoundaryCloud, m: usize, d: usize) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, csv_string(cloud, m, d)?)?;
    Ok(())
}

/// Reads the points of a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<BoundaryPoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Io(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    let m = cols.iter().filter(|c| c.starts_with("f_")).count();
    let d = cols.iter().filter(|c| c.starts_with("x_")).count();
    if m == 0 || cols.len() != 3 * m + d + 2 {
        return Err(Error::Io(format!("{}: unexpected header", path.display())));
    }
    let bad = |line: usize| Error::Io(format!("{}: malformed row {line}", path.display()));
    let mut points = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(n + 2));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(n + 2));
        let nums = |r: std::ops::Range<usize>| fields[r].iter().map(|s| num(s)).collect::<Result<Vec<f64>>>();
        points.push(BoundaryPoint {
            f: nums(0..m)?,
            x: nums(m..m + d)?,
            k: fields[m + d].trim().parse().map_err(|_| bad(n + 2))?,
            value: num(fields[m + d + 1])?,
            a: nums(m + d + 2..2 * m + d + 2)?,
            b: nums(2 * m + d + 2..3 * m + d + 2)?,
        });
    }
    Ok(points)
}

/// Writes the CSV and JSON outputs configured in `cfg.output`; returns the
/// paths written.
pub fn write_outputs(outcome: &ScanOutcome, cfg: &ScanConfig, m: usize, d: usize) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(path) = cfg.output.csv_path() {
        write_csv(&path, &outcome.cloud, m, d)?;
        written.push(path);
    }
    if let Some(path) = cfg.output.json_path() {
        ensure_parent(&path)?;
        let doc = ScanDocument {
            cloud: outcome.cloud.clone(),
            config: cfg.clone(),
            stats: outcome.stats.clone(),
            cells: outcome.cells.clone(),
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> BoundaryCloud {
        BoundaryCloud {
            problem_name: "t".into(),
            config_digest: String::new(),
            dedup_eps: 0.0,
            points: vec![
                BoundaryPoint {
                    f: vec![0.1, -1.0 / 3.0],
                    x: vec![std::f64::consts::PI],
                    a: vec![0.0, -2.5],
                    b: vec![1.0, 0.0],
                    k: 3,
                    value: 1e-300,
                },
                BoundaryPoint {
                    f: vec![2.0, 5.0e17],
                    x: vec![-0.0],
                    a: vec![1.0, 1.0],
                    b: vec![0.6, 0.8],
                    k: 1,
                    value: 0.0,
                },
            ],
        }
    }

    #[test]
    fn header_layout() {
        let text = csv_string(&cloud(), 2, 1).unwrap();
        assert_eq!(text.lines().next().unwrap(), "f_1,f_2,x_1,k,V,a_1,a_2,b_1,b_2");
        assert!(text.lines().nth(1).unwrap().starts_with("1.0000000000000001e-1,"));
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cloud.csv");
        write_csv(&path, &cloud(), 2, 1).unwrap();
        assert_eq!(read_csv(&path).unwrap(), cloud().points);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(csv_string(&cloud(), 3, 1).is_err());
    }

    #[test]
    fn malformed_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "f_1,f_2,x_1,k,V,a_1,a_2,b_1,b_2\n1,2,3\n").unwrap();
        assert!(read_csv(&path).is_err());
        assert!(read_csv(&dir.path().join("missing.csv")).is_err());
    }
}
