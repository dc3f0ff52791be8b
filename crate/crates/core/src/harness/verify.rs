//! Built-in invariant suite behind `contextlab verify`.
//!
//! A compact version of the full acceptance checks, sized to run in
//! seconds: every analytic identity at full tolerance, and the stochastic
//! checks at reduced (but still meaningful) sample counts with a frozen
//! seed so the outcome is deterministic.

use std::f64::consts::{FRAC_PI_6, PI};

use crate::harness::config::{OutputFormat, SweepSpec};
use crate::harness::output::rows_to_csv;
use crate::harness::sweep::{run_sweep, run_sweep_with_model, summarize, Summary};
use crate::interferometer::{
    adjustable_bs_observable, calibrate_phase, closed_form_means, output_port_states,
    simulate_pipeline, subensemble_mean_from_state, tilted_spin_states, ArrayConfig, Port,
};
use crate::ks::{
    analytic_expectation, quadrature_expectation, response, HiddenVar, ResponseModel,
};
use crate::qubit::{
    bloch_to_state, expectation, spin_theta_observable, BlochVector, Mat2, Observable, Vec3,
};
use crate::stream::SeededStream;

const VERIFY_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult {
            name,
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub summary: Option<Summary>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_direction(stream: &mut SeededStream) -> BlochVector {
    let z = 2.0 * stream.next_f64() - 1.0;
    let phi = 2.0 * PI * stream.next_f64();
    let rho = (1.0 - z * z).sqrt();
    BlochVector::new(rho * phi.cos(), rho * phi.sin(), z).expect("constructed on the sphere")
}

fn random_observable(stream: &mut SeededStream) -> Observable {
    let r = |s: &mut SeededStream| 4.0 * s.next_f64() - 2.0;
    Observable::new(
        r(stream),
        Vec3::new(r(stream), r(stream), r(stream)),
    )
}

fn check_splitter_reconstruction() -> CheckResult {
    let mut stream = SeededStream::new(VERIFY_SEED, 1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let vt = stream.next_f64() * PI;
        let (p3, p4) = output_port_states(vt);
        let rebuilt = Mat2::outer(&p3.amplitudes()).sub(&Mat2::outer(&p4.amplitudes()));
        let direct = adjustable_bs_observable(vt);
        worst = worst.max(rebuilt.max_abs_diff(&direct));
        worst = worst.max(direct.mul(&direct).max_abs_diff(&Mat2::identity()));
        worst = worst.max(direct.trace().norm());
    }
    CheckResult::new(
        "splitter-reconstruction",
        worst < 1e-12,
        format!("max deviation {worst:.3e} (tol 1e-12)"),
    )
}

fn check_closed_form_identity() -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..37 {
        for j in 0..37 {
            let vt = i as f64 * PI / 37.0;
            let th = j as f64 * PI / 37.0;
            let closed = closed_form_means(vt, th);
            let (up, down) = tilted_spin_states(vt);
            let obs = spin_theta_observable(th);
            worst = worst.max((0.5 * expectation(&obs, &down) - closed.sg1).abs());
            worst = worst.max((0.5 * expectation(&obs, &up) - closed.sg2).abs());
        }
    }
    CheckResult::new(
        "closed-form-identity",
        worst < 1e-12,
        format!("max deviation {worst:.3e} on 37x37 grid (tol 1e-12)"),
    )
}

fn check_pipeline_fidelity() -> CheckResult {
    let phase = match calibrate_phase(FRAC_PI_6) {
        Ok(p) => p,
        Err(e) => {
            return CheckResult::new("pipeline-fidelity", false, format!("calibration failed: {e}"))
        }
    };
    let mut worst = 0.0f64;
    for i in 0..37 {
        for j in 0..37 {
            let vt = i as f64 * PI / 37.0;
            let th = j as f64 * PI / 37.0;
            let state = simulate_pipeline(&ArrayConfig::new(vt, th, phase));
            let closed = closed_form_means(vt, th);
            let sg1 = subensemble_mean_from_state(&state, Port::Three, th).expect("output basis");
            let sg2 = subensemble_mean_from_state(&state, Port::Four, th).expect("output basis");
            worst = worst.max((sg1 - closed.sg1).abs()).max((sg2 - closed.sg2).abs());
        }
    }
    CheckResult::new(
        "pipeline-fidelity",
        worst < 1e-9,
        format!("max deviation {worst:.3e} after calibration (tol 1e-9)"),
    )
}

fn check_density_normalization() -> CheckResult {
    let mut stream = SeededStream::new(VERIFY_SEED, 2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n_a = random_direction(&mut stream);
        match quadrature_expectation(&Observable::identity(), &n_a, 64) {
            Ok(total) => worst = worst.max((total - 1.0).abs()),
            Err(e) => {
                return CheckResult::new("density-normalization", false, format!("{e}"));
            }
        }
    }
    CheckResult::new(
        "density-normalization",
        worst < 1e-9,
        format!("max |integral - 1| = {worst:.3e} over 20 directions (tol 1e-9)"),
    )
}

fn check_model_equals_qm() -> CheckResult {
    let mut stream = SeededStream::new(VERIFY_SEED, 3);
    let mut worst_analytic = 0.0f64;
    for _ in 0..200 {
        let a = random_observable(&mut stream);
        let n_psi = random_direction(&mut stream);
        let qm = expectation(&a, &bloch_to_state(&n_psi));
        worst_analytic = worst_analytic.max((analytic_expectation(&a, &n_psi) - qm).abs());
    }

    let mut worst_quad = 0.0f64;
    for _ in 0..12 {
        let a = random_observable(&mut stream);
        let n_psi = random_direction(&mut stream);
        let qm = expectation(&a, &bloch_to_state(&n_psi));
        match quadrature_expectation(&a, &n_psi, 4096) {
            Ok(q) => worst_quad = worst_quad.max((q - qm).abs()),
            Err(e) => return CheckResult::new("model-equals-qm", false, format!("{e}")),
        }
    }
    CheckResult::new(
        "model-equals-qm",
        worst_analytic < 1e-12 && worst_quad < 1e-3,
        format!(
            "analytic dev {worst_analytic:.3e} over 200 pairs (tol 1e-12); quadrature dev {worst_quad:.3e} over 12 pairs at 4096 nodes (tol 1e-3)"
        ),
    )
}

fn verify_grid_spec(mc_count: usize) -> SweepSpec {
    SweepSpec {
        vartheta_grid: vec![0.2, 0.7, 1.2],
        theta_grid: vec![0.1, 0.6, 1.1],
        mc_count,
        quadrature_nodes: 64,
        seed: VERIFY_SEED,
        output_format: OutputFormat::Csv,
        emit_curves: false,
    }
}

fn check_mc_reproduction() -> (CheckResult, Option<Summary>) {
    let spec = verify_grid_spec(200_000);
    match run_sweep(&spec, 1).and_then(|(rows, _)| summarize(&rows)) {
        Ok(summary) => {
            let passed = summary.max_mc_zscore <= 4.0;
            (
                CheckResult::new(
                    "mc-reproduction",
                    passed,
                    format!(
                        "max z-score {:.3} over {} rows at 2e5 particles (tol 4)",
                        summary.max_mc_zscore, summary.rows
                    ),
                ),
                Some(summary),
            )
        }
        Err(e) => (
            CheckResult::new("mc-reproduction", false, format!("{e}")),
            None,
        ),
    }
}

fn check_value_definiteness() -> CheckResult {
    let mut stream = SeededStream::new(VERIFY_SEED, 4);
    for _ in 0..100_000 {
        let a = random_observable(&mut stream);
        let lam = HiddenVar {
            n_lambda: random_direction(&mut stream),
        };
        let r = response(&a, &lam);
        let (hi, lo) = a.eigenvalues();
        if r != hi && r != lo {
            return CheckResult::new(
                "value-definiteness",
                false,
                format!("response {r} is not an eigenvalue ({hi}, {lo})"),
            );
        }
    }
    CheckResult::new(
        "value-definiteness",
        true,
        "100000 responses, every one exactly an eigenvalue".into(),
    )
}

fn check_determinism() -> CheckResult {
    let spec = SweepSpec {
        vartheta_grid: vec![0.4, 1.0],
        theta_grid: vec![0.2, 0.8],
        mc_count: 10_000,
        ..verify_grid_spec(10_000)
    };
    let csv = |workers: usize| run_sweep(&spec, workers).map(|(rows, _)| rows_to_csv(&rows));
    match (csv(1), csv(3)) {
        (Ok(a), Ok(b)) => {
            let identical = a == b;
            CheckResult::new(
                "determinism",
                identical,
                if identical {
                    format!("1-worker and 3-worker CSV identical ({} bytes)", a.len())
                } else {
                    "worker count changed the output".into()
                },
            )
        }
        (Err(e), _) | (_, Err(e)) => CheckResult::new("determinism", false, format!("{e}")),
    }
}

fn check_fault_sensitivity() -> CheckResult {
    let spec = verify_grid_spec(100_000);
    match run_sweep_with_model(&spec, 1, ResponseModel::SignFlipped) {
        Ok((rows, _)) => {
            let mut flagged = 0usize;
            let mut eligible = 0usize;
            for row in &rows {
                // Degenerate points (closed form near zero) cannot expose a
                // sign flip; require a displacement well beyond noise.
                if row.qm_closed_sg1.abs() > 0.05 {
                    eligible += 1;
                    if row.zscore() > 4.0 {
                        flagged += 1;
                    }
                }
            }
            let passed = eligible > 0 && 2 * flagged > eligible;
            CheckResult::new(
                "fault-sensitivity",
                passed,
                format!("sign-flipped response flagged on {flagged}/{eligible} non-degenerate rows"),
            )
        }
        Err(e) => CheckResult::new("fault-sensitivity", false, format!("{e}")),
    }
}

/// Run every built-in invariant check.
pub fn run_all() -> VerifyReport {
    let mut checks = vec![
        check_splitter_reconstruction(),
        check_closed_form_identity(),
        check_pipeline_fidelity(),
        check_density_normalization(),
        check_model_equals_qm(),
    ];
    let (mc_check, summary) = check_mc_reproduction();
    checks.push(mc_check);
    checks.push(check_value_definiteness());
    checks.push(check_determinism());
    checks.push(check_fault_sensitivity());
    VerifyReport { checks, summary }
}
