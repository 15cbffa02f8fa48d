//! CSV and image emission for evaluation results, plus the plain-text
//! comparison table.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{MetricSummary, RealMap, WelchResult};

/// `metrics.csv`: one row per (method, scenario).
pub fn write_metrics_csv(path: impl AsRef<Path>, rows: &[MetricSummary]) -> Result<()> {
    let mut out = String::from("method,scenario,mean_snr,mean_removal_pct,rmse_total\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.method, r.scenario, r.mean_snr, r.mean_removal_pct, r.rmse_total
        )
        .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One method-pair comparison in `ttest.csv`.
#[derive(Clone, Debug)]
pub struct TTestRow {
    pub metric: String,
    pub method_a: String,
    pub method_b: String,
    pub result: WelchResult,
}

pub fn write_ttest_csv(path: impl AsRef<Path>, rows: &[TTestRow]) -> Result<()> {
    let mut out = String::from("metric,method_a,method_b,t,dof,p\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.metric, r.method_a, r.method_b, r.result.t, r.result.dof, r.result.p
        )
        .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples), min-max scaled.
/// NaN voxels render as 0. The scaling is recorded in a `.txt` sidecar next
/// to the image.
pub fn write_pgm16(path: impl AsRef<Path>, map: &RealMap) -> Result<()> {
    let path = path.as_ref();
    let (rows, cols) = map.shape();
    let finite: Vec<f64> = map.as_slice().iter().cloned().filter(|v| v.is_finite()).collect();
    let min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };

    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(file, "P5\n{cols} {rows}\n65535\n")?;
    for v in map.as_slice() {
        let level = if v.is_finite() {
            (((v - min) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        file.write_all(&level.to_be_bytes())?;
    }
    file.flush()?;

    let sidecar = path.with_extension("txt");
    let text = if finite.is_empty() {
        "min nan\nmax nan\n".to_string()
    } else {
        format!("min {min}\nmax {max}\n")
    };
    std::fs::write(sidecar, text)?;
    Ok(())
}

/// Side-by-side method-by-scenario table of the three scalar metrics.
pub fn format_report_table(rows: &[MetricSummary]) -> String {
    let mut methods: Vec<String> = Vec::new();
    let mut scenarios: Vec<String> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        if !scenarios.contains(&r.scenario) {
            scenarios.push(r.scenario.clone());
        }
    }
    let lookup = |metric: &str, method: &str, scenario: &str| -> String {
        rows.iter()
            .find(|r| r.method == method && r.scenario == scenario)
            .map(|r| {
                let v = match metric {
                    "rmse_total" => r.rmse_total,
                    "mean_snr" => r.mean_snr,
                    _ => r.mean_removal_pct,
                };
                if v.is_finite() {
                    format!("{v:.4}")
                } else {
                    "-".to_string()
                }
            })
            .unwrap_or_else(|| "-".to_string())
    };

    let width = 12usize;
    let mut out = String::new();
    for (metric, title) in [
        ("rmse_total", "RMSE (masked mean, lower is better)"),
        ("mean_snr", "SNR (masked mean, higher is better)"),
        ("mean_removal_pct", "EMI removal % (masked mean, higher is better)"),
    ] {
        writeln!(out, "{title}").expect("string write");
        write!(out, "{:width$}", "method").expect("string write");
        for s in &scenarios {
            write!(out, "{s:>width$}").expect("string write");
        }
        out.push('\n');
        for m in &methods {
            write!(out, "{m:width$}").expect("string write");
            for s in &scenarios {
                let cell = lookup(metric, m, s);
                write!(out, "{cell:>width$}").expect("string write");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Parses `metrics.csv` back into summary rows.
pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricSummary>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::ManifestMismatch(format!(
                "metrics.csv line {}: expected 5 fields, got {}",
                i + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::ManifestMismatch(format!("metrics.csv line {}: bad number {s}", i + 1)))
        };
        rows.push(MetricSummary {
            method: fields[0].to_string(),
            scenario: fields[1].to_string(),
            mean_snr: parse(fields[2])?,
            mean_removal_pct: parse(fields[3])?,
            rmse_total: parse(fields[4])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        let rows = vec![
            MetricSummary {
                method: "stride".into(),
                scenario: "tone".into(),
                mean_snr: 12.5,
                mean_removal_pct: 88.25,
                rmse_total: 0.031,
            },
            MetricSummary {
                method: "editer-a".into(),
                scenario: "tone".into(),
                mean_snr: 9.0,
                mean_removal_pct: 80.0,
                rmse_total: 0.045,
            },
        ];
        write_metrics_csv(&path, &rows).unwrap();
        let back = read_metrics_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].method, "stride");
        assert_eq!(back[1].rmse_total, 0.045);
        let table = format_report_table(&back);
        assert!(table.contains("stride"));
        assert!(table.contains("editer-a"));
        assert!(table.contains("tone"));
    }

    #[test]
    fn pgm_header_and_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pgm");
        let map = RealMap::new(2, 3, vec![0.0, 1.0, 2.0, 3.0, f64::NAN, 5.0]).unwrap();
        write_pgm16(&path, &map).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let pixels = &bytes[header.len()..];
        assert_eq!(pixels.len(), 12);
        // min=0 -> 0, max=5 -> 65535, NaN -> 0
        assert_eq!(u16::from_be_bytes([pixels[0], pixels[1]]), 0);
        assert_eq!(u16::from_be_bytes([pixels[8], pixels[9]]), 0);
        assert_eq!(u16::from_be_bytes([pixels[10], pixels[11]]), 65535);
        let sidecar = std::fs::read_to_string(dir.path().join("map.txt")).unwrap();
        assert!(sidecar.contains("min 0"));
        assert!(sidecar.contains("max 5"));
    }
}
