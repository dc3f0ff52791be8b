//! Result emission: CSV or JSON data files plus optional per-vartheta
//! curve files for plotting.
//!
//! Floats are rendered with 17 significant digits, which round-trips any
//! finite f64 exactly; lines end with `\n` and the encoding is UTF-8 with
//! no locale dependence. Identical (spec, seed) therefore produce
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::OutputFormat;
use super::sweep::{ComparisonRow, RunManifest, CSV_COLUMNS};

/// 17-significant-digit scientific rendering; parses back to the same bits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Top-level object written when the output format is JSON.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepDocument {
    pub manifest: RunManifest,
    pub rows: Vec<ComparisonRow>,
}

/// Render the comparison table as CSV.
pub fn rows_to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::with_capacity(32 + rows.len() * 24 * CSV_COLUMNS.len());
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        let fields = row.fields();
        for (k, value) in fields.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format_float(*value));
        }
        out.push('\n');
    }
    out
}

/// Parse a CSV table produced by [`rows_to_csv`].
pub fn parse_rows_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty CSV".into(),
    })?;
    if header != CSV_COLUMNS.join(",") {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut values = [0.0f64; 15];
        let mut count = 0;
        for (slot, field) in values.iter_mut().zip(line.split(',')) {
            *slot = field.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("`{field}` is not a float"),
            })?;
            count += 1;
        }
        if count != 15 || line.split(',').count() != 15 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected 15 fields, got {}", line.split(',').count()),
            });
        }
        let [vartheta, theta, qm_closed_sg1, qm_closed_sg2, qm_pipeline_sg1, qm_pipeline_sg2, ks_analytic_sg1, ks_analytic_sg2, ks_quad_sg1, ks_quad_sg2, ks_mc_sg1, ks_mc_se1, ks_mc_sg2, ks_mc_se2, mc_zscore_max] =
            values;
        rows.push(ComparisonRow {
            vartheta,
            theta,
            qm_closed_sg1,
            qm_closed_sg2,
            qm_pipeline_sg1,
            qm_pipeline_sg2,
            ks_analytic_sg1,
            ks_analytic_sg2,
            ks_quad_sg1,
            ks_quad_sg2,
            ks_mc_sg1,
            ks_mc_se1,
            ks_mc_sg2,
            ks_mc_se2,
            mc_zscore_max,
        });
    }
    Ok(rows)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the data files for a finished sweep into `out_dir`, creating it
/// if needed. Returns the paths written: `results.csv` or `results.json`,
/// plus one `curve_NNN.csv` per vartheta when curves are requested.
pub fn emit(rows: &[ComparisonRow], manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    match manifest.spec.output_format {
        OutputFormat::Csv => {
            let path = out_dir.join("results.csv");
            write_file(&path, &rows_to_csv(rows))?;
            written.push(path);
        }
        OutputFormat::Json => {
            let doc = SweepDocument {
                manifest: manifest.clone(),
                rows: rows.to_vec(),
            };
            let mut text = serde_json::to_string_pretty(&doc).map_err(|e| {
                Error::InvalidArgument(format!("JSON serialization failed: {e}"))
            })?;
            text.push('\n');
            let path = out_dir.join("results.json");
            write_file(&path, &text)?;
            written.push(path);
        }
    }

    if manifest.spec.emit_curves {
        let per_curve = manifest.spec.theta_grid.len();
        for (k, chunk) in rows.chunks(per_curve).enumerate() {
            let mut text = String::new();
            text.push_str(&format!("# vartheta = {}\n", format_float(chunk[0].vartheta)));
            text.push_str("theta,qm_sg1,qm_sg2,ks_mc_sg1,ks_mc_sg2,ks_mc_se1,ks_mc_se2\n");
            for row in chunk {
                let fields = [
                    row.theta,
                    row.qm_closed_sg1,
                    row.qm_closed_sg2,
                    row.ks_mc_sg1,
                    row.ks_mc_sg2,
                    row.ks_mc_se1,
                    row.ks_mc_se2,
                ];
                let line: Vec<String> = fields.iter().map(|&v| format_float(v)).collect();
                text.push_str(&line.join(","));
                text.push('\n');
            }
            let path = out_dir.join(format!("curve_{k:03}.csv"));
            write_file(&path, &text)?;
            written.push(path);
        }
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{OutputFormat, SweepSpec};
    use crate::harness::sweep::run_sweep;
    use proptest::prelude::*;

    fn spec(format: OutputFormat, curves: bool) -> SweepSpec {
        SweepSpec {
            vartheta_grid: vec![0.3, 0.9, 1.5],
            theta_grid: vec![0.1, 0.7],
            mc_count: 5_000,
            quadrature_nodes: 64,
            seed: 4,
            output_format: format,
            emit_curves: curves,
        }
    }

    #[test]
    fn csv_header_is_fixed() {
        let (rows, _) = run_sweep(&spec(OutputFormat::Csv, false), 1).unwrap();
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(
            "vartheta,theta,qm_closed_sg1,qm_closed_sg2,qm_pipeline_sg1,qm_pipeline_sg2,"
        ));
        assert_eq!(text.lines().count(), 1 + rows.len());
    }

    #[test]
    fn csv_round_trips_exactly() {
        let (rows, _) = run_sweep(&spec(OutputFormat::Csv, false), 1).unwrap();
        let parsed = parse_rows_csv(&rows_to_csv(&rows)).unwrap();
        assert_eq!(rows, parsed);
    }

    #[test]
    fn json_round_trips_exactly() {
        let (rows, manifest) = run_sweep(&spec(OutputFormat::Json, false), 1).unwrap();
        let doc = SweepDocument {
            manifest,
            rows: rows.clone(),
        };
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back: SweepDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(rows, back.rows);
        assert_eq!(doc.manifest.spec, back.manifest.spec);
        assert_eq!(doc.manifest.calibration_phase, back.manifest.calibration_phase);
    }

    #[test]
    fn emit_writes_expected_files() {
        let dir = std::env::temp_dir().join(format!("contextlab-emit-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);

        let (rows, manifest) = run_sweep(&spec(OutputFormat::Csv, true), 1).unwrap();
        let written = emit(&rows, &manifest, &dir).unwrap();
        // results.csv plus one curve per vartheta.
        assert_eq!(written.len(), 1 + 3);
        assert!(dir.join("results.csv").exists());
        for k in 0..3 {
            let text = fs::read_to_string(dir.join(format!("curve_{k:03}.csv"))).unwrap();
            assert!(text.starts_with("# vartheta = "));
            assert_eq!(text.lines().count(), 2 + 2);
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn float_rendering_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_float(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
