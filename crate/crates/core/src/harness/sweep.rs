//! Sweep execution: one comparison row per (vartheta, theta) grid point.
//!
//! Every row evaluates the subensemble means five ways: quantum closed
//! form, quantum pipeline, hidden-variable closed form, hidden-variable
//! quadrature, and hidden-variable Monte Carlo with standard errors. Each
//! row's Monte Carlo draws from its own (seed, row-index) stream, so the
//! worker count changes scheduling and nothing else.

use std::f64::consts::FRAC_PI_6;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{
    calibrate_phase, closed_form_means, simulate_pipeline, subensemble_mean_from_state,
    ArrayConfig, Port,
};
use crate::ks::{
    analytic_expectation, ks_subensemble_means_with_model, quadrature_expectation, ResponseModel,
};
use crate::qubit::{spin_axis, spin_theta_observable};
use crate::stream::SeededStream;

use super::config::SweepSpec;

/// One sweep point with every evaluation route side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub vartheta: f64,
    pub theta: f64,
    pub qm_closed_sg1: f64,
    pub qm_closed_sg2: f64,
    pub qm_pipeline_sg1: f64,
    pub qm_pipeline_sg2: f64,
    pub ks_analytic_sg1: f64,
    pub ks_analytic_sg2: f64,
    pub ks_quad_sg1: f64,
    pub ks_quad_sg2: f64,
    pub ks_mc_sg1: f64,
    pub ks_mc_se1: f64,
    pub ks_mc_sg2: f64,
    pub ks_mc_se2: f64,
    pub mc_zscore_max: f64,
}

/// CSV column names, in field order.
pub const CSV_COLUMNS: [&str; 15] = [
    "vartheta",
    "theta",
    "qm_closed_sg1",
    "qm_closed_sg2",
    "qm_pipeline_sg1",
    "qm_pipeline_sg2",
    "ks_analytic_sg1",
    "ks_analytic_sg2",
    "ks_quad_sg1",
    "ks_quad_sg2",
    "ks_mc_sg1",
    "ks_mc_se1",
    "ks_mc_sg2",
    "ks_mc_se2",
    "mc_zscore_max",
];

impl ComparisonRow {
    pub fn fields(&self) -> [f64; 15] {
        [
            self.vartheta,
            self.theta,
            self.qm_closed_sg1,
            self.qm_closed_sg2,
            self.qm_pipeline_sg1,
            self.qm_pipeline_sg2,
            self.ks_analytic_sg1,
            self.ks_analytic_sg2,
            self.ks_quad_sg1,
            self.ks_quad_sg2,
            self.ks_mc_sg1,
            self.ks_mc_se1,
            self.ks_mc_sg2,
            self.ks_mc_se2,
            self.mc_zscore_max,
        ]
    }

    /// Largest z-score of the Monte Carlo estimates against the quantum
    /// closed forms, recomputed from the stored fields.
    pub fn zscore(&self) -> f64 {
        let z = |diff: f64, se: f64| {
            if se > 0.0 {
                diff.abs() / se
            } else if diff.abs() < 1e-15 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        z(self.ks_mc_sg1 - self.qm_closed_sg1, self.ks_mc_se1)
            .max(z(self.ks_mc_sg2 - self.qm_closed_sg2, self.ks_mc_se2))
    }
}

/// Everything needed to reproduce and audit a run. Per-row wall-clock
/// timings are diagnostics only: they stay out of the emitted data files,
/// which are fully determined by (spec, seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: SweepSpec,
    pub calibration_phase: f64,
    pub library_version: String,
    pub row_count: usize,
    pub total_particles: u64,
    #[serde(skip)]
    pub row_timings_ms: Vec<f64>,
}

/// Run a sweep with the standard response model.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<(Vec<ComparisonRow>, RunManifest)> {
    run_sweep_with_model(spec, workers, ResponseModel::Standard)
}

/// Run a sweep with an explicit response model. `SignFlipped` exists so
/// the suite can prove it notices a wrong model.
pub fn run_sweep_with_model(
    spec: &SweepSpec,
    workers: usize,
    model: ResponseModel,
) -> Result<(Vec<ComparisonRow>, RunManifest)> {
    spec.validate()?;
    let phase = calibrate_phase(FRAC_PI_6)?;

    let tasks: Vec<(usize, f64, f64)> = spec
        .vartheta_grid
        .iter()
        .flat_map(|&vt| spec.theta_grid.iter().map(move |&th| (vt, th)))
        .enumerate()
        .map(|(idx, (vt, th))| (idx, vt, th))
        .collect();

    let workers = workers.max(1).min(tasks.len().max(1));
    let mut computed: Vec<(usize, ComparisonRow, f64)> = if workers == 1 {
        tasks
            .iter()
            .map(|&(idx, vt, th)| compute_row(spec, phase, model, idx, vt, th))
            .collect::<Result<_>>()?
    } else {
        let chunk_size = tasks.len().div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = tasks
                .chunks(chunk_size)
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|&(idx, vt, th)| compute_row(spec, phase, model, idx, vt, th))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut all = Vec::with_capacity(tasks.len());
            for handle in handles {
                all.extend(handle.join().expect("sweep worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };

    computed.sort_by_key(|&(idx, _, _)| idx);
    let rows: Vec<ComparisonRow> = computed.iter().map(|&(_, row, _)| row).collect();
    let timings: Vec<f64> = computed.iter().map(|&(_, _, ms)| ms).collect();

    let manifest = RunManifest {
        spec: spec.clone(),
        calibration_phase: phase,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        row_count: rows.len(),
        total_particles: rows.len() as u64 * spec.mc_count as u64,
        row_timings_ms: timings,
    };
    Ok((rows, manifest))
}

fn compute_row(
    spec: &SweepSpec,
    phase: f64,
    model: ResponseModel,
    idx: usize,
    vartheta: f64,
    theta: f64,
) -> Result<(usize, ComparisonRow, f64)> {
    let start = Instant::now();

    let closed = closed_form_means(vartheta, theta);

    let joint = simulate_pipeline(&ArrayConfig::new(vartheta, theta, phase));
    let qm_pipeline_sg1 = subensemble_mean_from_state(&joint, Port::Three, theta)?;
    let qm_pipeline_sg2 = subensemble_mean_from_state(&joint, Port::Four, theta)?;

    let obs = spin_theta_observable(theta);
    let up = spin_axis(vartheta);
    let down = -up;
    let ks_analytic_sg1 = 0.5 * analytic_expectation(&obs, &down);
    let ks_analytic_sg2 = 0.5 * analytic_expectation(&obs, &up);
    let ks_quad_sg1 = 0.5 * quadrature_expectation(&obs, &down, spec.quadrature_nodes)?;
    let ks_quad_sg2 = 0.5 * quadrature_expectation(&obs, &up, spec.quadrature_nodes)?;

    let mut stream = SeededStream::new(spec.seed, idx as u64);
    let mc = ks_subensemble_means_with_model(model, vartheta, theta, spec.mc_count, &mut stream)?;

    let mut row = ComparisonRow {
        vartheta,
        theta,
        qm_closed_sg1: closed.sg1,
        qm_closed_sg2: closed.sg2,
        qm_pipeline_sg1,
        qm_pipeline_sg2,
        ks_analytic_sg1,
        ks_analytic_sg2,
        ks_quad_sg1,
        ks_quad_sg2,
        ks_mc_sg1: mc.sg1,
        ks_mc_se1: mc.se1,
        ks_mc_sg2: mc.sg2,
        ks_mc_se2: mc.se2,
        mc_zscore_max: 0.0,
    };
    row.mc_zscore_max = row.zscore();

    Ok((idx, row, start.elapsed().as_secs_f64() * 1e3))
}

/// Aggregate deviations across a set of rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: usize,
    /// max |qm_closed - qm_pipeline|
    pub max_pipeline_dev: f64,
    /// max |qm_closed - ks_analytic|
    pub max_analytic_dev: f64,
    /// max |qm_closed - ks_quad|
    pub max_quadrature_dev: f64,
    /// max Monte Carlo z-score
    pub max_mc_zscore: f64,
    /// fraction of rows whose z-score exceeds 4
    pub frac_zscore_above_4: f64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows:                     {}", self.rows)?;
        writeln!(f, "max |closed - pipeline|:  {:.3e}", self.max_pipeline_dev)?;
        writeln!(f, "max |closed - analytic|:  {:.3e}", self.max_analytic_dev)?;
        writeln!(f, "max |closed - quadrature|: {:.3e}", self.max_quadrature_dev)?;
        writeln!(f, "max MC z-score:           {:.3}", self.max_mc_zscore)?;
        write!(
            f,
            "rows with z > 4:          {:.2}%",
            100.0 * self.frac_zscore_above_4
        )
    }
}

/// Reduce rows to their worst-case deviations. The z-scores are
/// recomputed from the stored estimates, so a corrupted row is caught
/// even if its cached z-score was not updated.
pub fn summarize(rows: &[ComparisonRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot summarize an empty row set".into(),
        ));
    }
    let mut summary = Summary {
        rows: rows.len(),
        max_pipeline_dev: 0.0,
        max_analytic_dev: 0.0,
        max_quadrature_dev: 0.0,
        max_mc_zscore: 0.0,
        frac_zscore_above_4: 0.0,
    };
    let mut above = 0usize;
    for row in rows {
        summary.max_pipeline_dev = summary
            .max_pipeline_dev
            .max((row.qm_closed_sg1 - row.qm_pipeline_sg1).abs())
            .max((row.qm_closed_sg2 - row.qm_pipeline_sg2).abs());
        summary.max_analytic_dev = summary
            .max_analytic_dev
            .max((row.qm_closed_sg1 - row.ks_analytic_sg1).abs())
            .max((row.qm_closed_sg2 - row.ks_analytic_sg2).abs());
        summary.max_quadrature_dev = summary
            .max_quadrature_dev
            .max((row.qm_closed_sg1 - row.ks_quad_sg1).abs())
            .max((row.qm_closed_sg2 - row.ks_quad_sg2).abs());
        let z = row.zscore();
        summary.max_mc_zscore = summary.max_mc_zscore.max(z);
        if z > 4.0 {
            above += 1;
        }
    }
    summary.frac_zscore_above_4 = above as f64 / rows.len() as f64;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::OutputFormat;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            vartheta_grid: vec![0.2, 0.8, 1.4],
            theta_grid: vec![0.0, 0.4, 0.9, 1.3],
            mc_count: 20_000,
            quadrature_nodes: 64,
            seed: 9,
            output_format: OutputFormat::Csv,
            emit_curves: false,
        }
    }

    #[test]
    fn grid_produces_one_row_per_pair_in_order() {
        let spec = small_spec();
        let (rows, manifest) = run_sweep(&spec, 1).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(manifest.row_count, 12);
        assert_eq!(manifest.total_particles, 12 * 20_000);
        let mut k = 0;
        for &vt in &spec.vartheta_grid {
            for &th in &spec.theta_grid {
                assert_eq!(rows[k].vartheta, vt);
                assert_eq!(rows[k].theta, th);
                k += 1;
            }
        }
    }

    #[test]
    fn rows_are_identical_across_runs_and_worker_counts() {
        let spec = small_spec();
        let (rows1, _) = run_sweep(&spec, 1).unwrap();
        let (rows2, _) = run_sweep(&spec, 1).unwrap();
        let (rows5, _) = run_sweep(&spec, 5).unwrap();
        assert_eq!(rows1, rows2);
        assert_eq!(rows1, rows5);
    }

    #[test]
    fn routes_agree_on_every_row() {
        let spec = small_spec();
        let (rows, _) = run_sweep(&spec, 2).unwrap();
        let summary = summarize(&rows).unwrap();
        assert!(summary.max_pipeline_dev < 1e-9);
        assert!(summary.max_analytic_dev < 1e-12);
        // 64 quadrature nodes resolve the response discontinuity to ~1/64.
        assert!(summary.max_quadrature_dev < 0.05);
        assert!(summary.max_mc_zscore < 6.0);
        for row in &rows {
            assert!((row.qm_closed_sg1 + row.qm_closed_sg2).abs() < 1e-12);
        }
    }

    #[test]
    fn manifest_spec_echo_reproduces_the_run() {
        let spec = small_spec();
        let (rows, manifest) = run_sweep(&spec, 1).unwrap();
        let (again, _) = run_sweep(&manifest.spec, 4).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn quarter_offset_row_is_all_zeros_in_closed_form() {
        let spec = SweepSpec {
            vartheta_grid: vec![0.6 + std::f64::consts::FRAC_PI_4],
            theta_grid: vec![0.6],
            ..small_spec()
        };
        let (rows, _) = run_sweep(&spec, 1).unwrap();
        assert!(rows[0].qm_closed_sg1.abs() < 1e-12);
        assert!(rows[0].qm_closed_sg2.abs() < 1e-12);
        assert!(rows[0].ks_analytic_sg1.abs() < 1e-12);
    }

    #[test]
    fn aligned_devices_hit_one_half_at_full_count() {
        let spec = SweepSpec {
            vartheta_grid: vec![FRAC_PI_6],
            theta_grid: vec![FRAC_PI_6],
            mc_count: 1_000_000,
            ..small_spec()
        };
        let (rows, _) = run_sweep(&spec, 1).unwrap();
        let row = &rows[0];
        assert!((row.qm_closed_sg2 - 0.5).abs() < 1e-15);
        assert!((row.ks_mc_sg2 - 0.5).abs() < 4.0 * row.ks_mc_se2);
        assert!((row.ks_mc_sg1 + 0.5).abs() < 4.0 * row.ks_mc_se1);
    }

    #[test]
    fn corrupted_row_is_flagged() {
        let spec = SweepSpec {
            vartheta_grid: vec![0.3],
            theta_grid: vec![0.3],
            ..small_spec()
        };
        let (mut rows, _) = run_sweep(&spec, 1).unwrap();
        let clean = summarize(&rows).unwrap();
        assert!(clean.max_mc_zscore < 4.0);

        // Flip the sign of one estimate: |sg1| is 1/2 here, far beyond 4 se.
        rows[0].ks_mc_sg1 = -rows[0].ks_mc_sg1;
        let corrupted = summarize(&rows).unwrap();
        assert!(corrupted.max_mc_zscore > 4.0);
        assert_eq!(corrupted.frac_zscore_above_4, 1.0);
    }

    #[test]
    fn flipped_response_model_is_detected() {
        let spec = SweepSpec {
            vartheta_grid: vec![0.2, 0.7],
            theta_grid: vec![0.1, 0.5],
            mc_count: 50_000,
            ..small_spec()
        };
        let (rows, _) = run_sweep_with_model(&spec, 1, ResponseModel::SignFlipped).unwrap();
        let summary = summarize(&rows).unwrap();
        // Every grid point here has |cos(2(vt - th))| well away from zero.
        assert_eq!(summary.frac_zscore_above_4, 1.0);
    }

    #[test]
    fn summarize_rejects_empty_input() {
        assert!(matches!(
            summarize(&[]),
            Err(Error::InvalidArgument(_))
        ));
    }
}
