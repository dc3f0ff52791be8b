//! Sweep configuration: a line-oriented `key = value` file.
//!
//! Keys: `vartheta_grid`, `theta_grid`, `mc_count`, `quadrature_nodes`,
//! `seed`, `output_format`, `emit_curves`. `#` starts a comment. Angles
//! are radians unless suffixed with `deg`. Grids are comma-separated
//! angles and/or inclusive `start:stop:step` ranges. Unknown keys are
//! rejected so a typo cannot silently fall back to a default.
//!
//! Seed precedence, lowest first: the `CONTEXTLAB_SEED` environment
//! variable, then the config file; the CLI `--seed` flag overrides both.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_SEED_VAR: &str = "CONTEXTLAB_SEED";

const MIN_MC_COUNT: usize = 100;
const MIN_QUADRATURE_NODES: usize = 64;
/// Refuse to expand a range into more points than this.
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFormat::Csv => write!(f, "csv"),
            OutputFormat::Json => write!(f, "json"),
        }
    }
}

/// Everything a sweep needs, resolved and validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub vartheta_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub mc_count: usize,
    pub quadrature_nodes: usize,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub emit_curves: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vartheta_grid.is_empty() {
            return Err(Error::Validation {
                field: "vartheta_grid",
                msg: "grid must contain at least one angle".into(),
            });
        }
        if self.theta_grid.is_empty() {
            return Err(Error::Validation {
                field: "theta_grid",
                msg: "grid must contain at least one angle".into(),
            });
        }
        if self.mc_count < MIN_MC_COUNT {
            return Err(Error::Validation {
                field: "mc_count",
                msg: format!("must be at least {MIN_MC_COUNT}, got {}", self.mc_count),
            });
        }
        if self.quadrature_nodes < MIN_QUADRATURE_NODES {
            return Err(Error::Validation {
                field: "quadrature_nodes",
                msg: format!(
                    "must be at least {MIN_QUADRATURE_NODES}, got {}",
                    self.quadrature_nodes
                ),
            });
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.vartheta_grid.len() * self.theta_grid.len()
    }
}

/// Parse an angle, accepting a trailing `deg` suffix.
pub fn parse_angle(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let (number, degrees) = match text.strip_suffix("deg") {
        Some(prefix) => (prefix.trim_end(), true),
        None => (text, false),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| format!("`{text}` is not an angle"))?;
    if !value.is_finite() {
        return Err(format!("`{text}` is not a finite angle"));
    }
    Ok(if degrees { value * PI / 180.0 } else { value })
}

/// Expand one grid item: a single angle or an inclusive start:stop:step
/// range (endpoints kept within half a step).
fn expand_item(item: &str, out: &mut Vec<f64>) -> std::result::Result<(), String> {
    let parts: Vec<&str> = item.split(':').collect();
    match parts.len() {
        1 => {
            out.push(parse_angle(parts[0])?);
            Ok(())
        }
        3 => {
            let start = parse_angle(parts[0])?;
            let stop = parse_angle(parts[1])?;
            let step = parse_angle(parts[2])?;
            if step <= 0.0 {
                return Err(format!("range `{item}` needs a positive step"));
            }
            if stop < start - 0.5 * step {
                return Err(format!("range `{item}` has stop before start"));
            }
            let mut k = 0usize;
            loop {
                let value = start + k as f64 * step;
                if value > stop + 0.5 * step {
                    break;
                }
                out.push(value);
                k += 1;
                if k > MAX_GRID_POINTS {
                    return Err(format!("range `{item}` expands to too many points"));
                }
            }
            Ok(())
        }
        _ => Err(format!("`{item}` is neither an angle nor start:stop:step")),
    }
}

/// Parse a comma-separated list of grid items.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        expand_item(item, &mut out)?;
    }
    Ok(out)
}

fn parse_bool(text: &str) -> std::result::Result<bool, String> {
    match text.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("`{other}` is not `true` or `false`")),
    }
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(ENV_SEED_VAR) {
        Ok(value) => value.trim().parse::<u64>().map(Some).map_err(|_| Error::Validation {
            field: "seed",
            msg: format!("{ENV_SEED_VAR}=`{value}` is not a 64-bit unsigned integer"),
        }),
        Err(_) => Ok(None),
    }
}

/// Load and validate a sweep spec from a config file.
pub fn load_spec(path: &Path) -> Result<SweepSpec> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_spec(&text)
}

/// Parse a sweep spec from config-file text.
pub fn parse_spec(text: &str) -> Result<SweepSpec> {
    let mut vartheta_grid: Option<Vec<f64>> = None;
    let mut theta_grid: Option<Vec<f64>> = None;
    let mut mc_count: Option<usize> = None;
    let mut quadrature_nodes: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut output_format: Option<OutputFormat> = None;
    let mut emit_curves: Option<bool> = None;
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
        let parse_err = |msg: String| Error::Parse { line, msg };
        match key {
            "vartheta_grid" => vartheta_grid = Some(parse_grid(value).map_err(parse_err)?),
            "theta_grid" => theta_grid = Some(parse_grid(value).map_err(parse_err)?),
            "mc_count" => {
                mc_count = Some(value.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{value}` is not an unsigned integer"),
                })?)
            }
            "quadrature_nodes" => {
                quadrature_nodes = Some(value.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{value}` is not an unsigned integer"),
                })?)
            }
            "seed" => {
                seed = Some(value.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{value}` is not a 64-bit unsigned integer"),
                })?)
            }
            "output_format" => {
                output_format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("`{other}` is not `csv` or `json`"),
                        })
                    }
                })
            }
            "emit_curves" => emit_curves = Some(parse_bool(value).map_err(parse_err)?),
            unknown => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{unknown}`"),
                })
            }
        }
    }

    let missing = |field: &'static str| Error::Validation {
        field,
        msg: "required key is missing".into(),
    };
    let spec = SweepSpec {
        vartheta_grid: vartheta_grid.ok_or_else(|| missing("vartheta_grid"))?,
        theta_grid: theta_grid.ok_or_else(|| missing("theta_grid"))?,
        mc_count: mc_count.ok_or_else(|| missing("mc_count"))?,
        quadrature_nodes: quadrature_nodes.unwrap_or(256),
        seed: match seed {
            Some(s) => s,
            None => seed_from_env()?.unwrap_or(0),
        },
        output_format: output_format.unwrap_or(OutputFormat::Csv),
        emit_curves: emit_curves.unwrap_or(false),
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "vartheta_grid = 0deg:90deg:5deg\ntheta_grid = 0, 30deg\nmc_count = 1000\n";

    #[test]
    fn parses_degree_range() {
        let spec = parse_spec(BASE).unwrap();
        assert_eq!(spec.vartheta_grid.len(), 19);
        assert!((spec.vartheta_grid[0]).abs() < 1e-15);
        assert!((spec.vartheta_grid[18] - PI / 2.0).abs() < 1e-12);
        assert!((spec.vartheta_grid[1] - PI / 36.0).abs() < 1e-12);
        assert_eq!(spec.theta_grid.len(), 2);
        assert!((spec.theta_grid[1] - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn defaults_fill_in() {
        let spec = parse_spec(BASE).unwrap();
        assert_eq!(spec.quadrature_nodes, 256);
        assert_eq!(spec.output_format, OutputFormat::Csv);
        assert!(!spec.emit_curves);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = format!("# a comment\n\n{BASE}seed = 7 # trailing comment\n");
        let spec = parse_spec(&text).unwrap();
        assert_eq!(spec.seed, 7);
    }

    #[test]
    fn small_mc_count_is_a_validation_error() {
        let text = "vartheta_grid = 0.1\ntheta_grid = 0.2\nmc_count = 50\n";
        match parse_spec(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "mc_count"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_theta_grid_is_a_validation_error() {
        let text = "vartheta_grid = 0.1\ntheta_grid =\nmc_count = 1000\n";
        match parse_spec(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "theta_grid"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_line_number() {
        let text = format!("{BASE}mc_cout = 99\n");
        match parse_spec(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("mc_cout"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = format!("{BASE}seed = 1\nseed = 2\n");
        assert!(matches!(parse_spec(&text), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let text = "vartheta_grid = 0.1\nnot a key value line\n";
        assert!(matches!(parse_spec(text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn range_with_negative_step_is_rejected() {
        assert!(parse_grid("1:0:-0.5").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn mixed_grid_items() {
        let grid = parse_grid("0.5, 10deg:30deg:10deg, 1.0").unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid[0] - 0.5).abs() < 1e-15);
        assert!((grid[2] - 20.0 * PI / 180.0).abs() < 1e-12);
        assert!((grid[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_node_floor_is_enforced() {
        let text = format!("{BASE}quadrature_nodes = 32\n");
        match parse_spec(&text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "quadrature_nodes"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
