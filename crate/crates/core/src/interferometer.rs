//! Exact quantum model of the Mach-Zehnder-style array: a 50:50 splitter,
//! mirrors, a spin-flipper in one arm, a calibration phase element, and an
//! adjustable output splitter with reflection gamma = sin(vartheta) and
//! transmission delta = cos(vartheta).
//!
//! Spin-up neutrons enter the array; the conditional spin state at output
//! port 3 is the tilted-down state and at port 4 the tilted-up state, each
//! carrying probability 1/2. The subensemble mean of sigma_theta is
//! therefore -(1/2) cos(2(vartheta - theta)) at port 3 and its negative at
//! port 4. Both the closed forms and a full state-vector pipeline are
//! provided; `calibrate_phase` pins down the one free element phase so the
//! pipeline reproduces the closed forms to machine precision.
//!
//! Geometry convention: the mirrors cross the beams, so the arm carrying
//! the spin-flipper (arm 1 by default) feeds the second input port of the
//! adjustable splitter. With the uncrossed routing no phase choice can
//! reproduce the port assignment, because the flipped amplitude would
//! reach port 3 weighted by gamma instead of delta.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, FRAC_PI_8, PI};

use crate::error::{Error, Result};
use crate::qubit::{
    expectation, project_path, spin_theta_observable, JointState, Mat2, PathBasis, PathState,
    SpinState,
};

/// Largest closed-form/pipeline deviation tolerated at the calibrated phase.
const CALIBRATION_TOL: f64 = 1e-9;

/// Interferometer arm. Arm 1 carries the spin-flipper by default and
/// always carries the phase element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    Arm1,
    Arm2,
}

/// Exit port of the adjustable splitter. Port 3 feeds the first
/// Stern-Gerlach analyzer, port 4 the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Port {
    Three,
    Four,
}

impl Port {
    /// Index into the output path basis {psi_3, psi_4}.
    pub fn index(&self) -> usize {
        match self {
            Port::Three => 0,
            Port::Four => 1,
        }
    }

    pub fn label(&self) -> u8 {
        match self {
            Port::Three => 3,
            Port::Four => 4,
        }
    }
}

/// Full element configuration of one run of the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// Splitter parameter: gamma = sin(vartheta), delta = cos(vartheta).
    pub vartheta: f64,
    /// Stern-Gerlach orientation measured downstream of the ports.
    pub theta: f64,
    /// Which arm carries the spin-flipper.
    pub flip_arm: Arm,
    /// Relative phase applied in arm 1.
    pub calib_phase: f64,
}

impl ArrayConfig {
    pub fn new(vartheta: f64, theta: f64, calib_phase: f64) -> Self {
        ArrayConfig {
            vartheta,
            theta,
            flip_arm: Arm::Arm1,
            calib_phase,
        }
    }

    pub fn with_flip_arm(mut self, arm: Arm) -> Self {
        self.flip_arm = arm;
        self
    }
}

/// The two probability-weighted subensemble means drawn at the ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubensembleMeans {
    pub sg1: f64,
    pub sg2: f64,
}

/// Path observable of the adjustable splitter over the input basis:
/// [[g^2 - d^2, -2igd], [2igd, -(g^2 - d^2)]].
pub fn adjustable_bs_observable(vartheta: f64) -> Mat2 {
    let (g, d) = vartheta.sin_cos();
    let diag = g * g - d * d;
    Mat2::new([
        [Complex64::new(diag, 0.0), Complex64::new(0.0, -2.0 * g * d)],
        [Complex64::new(0.0, 2.0 * g * d), Complex64::new(-diag, 0.0)],
    ])
}

/// Output-port states of the adjustable splitter, expressed over the input
/// basis: psi_3 = -ig psi_1 + d psi_2, psi_4 = d psi_1 - ig psi_2. The
/// splitter observable is |psi_3><psi_3| - |psi_4><psi_4|.
pub fn output_port_states(vartheta: f64) -> (PathState, PathState) {
    let (g, d) = vartheta.sin_cos();
    let psi3 = PathState::new_unchecked(
        Complex64::new(0.0, -g),
        Complex64::new(d, 0.0),
        PathBasis::Input,
    );
    let psi4 = PathState::new_unchecked(
        Complex64::new(d, 0.0),
        Complex64::new(0.0, -g),
        PathBasis::Input,
    );
    (psi3, psi4)
}

/// Tilted spin basis prepared by the array:
/// up = cos(vt)|up>_z + sin(vt)|down>_z, down = -sin(vt)|up>_z + cos(vt)|down>_z,
/// with Bloch vectors +/-(sin 2vt, 0, cos 2vt).
pub fn tilted_spin_states(vartheta: f64) -> (SpinState, SpinState) {
    let (s, c) = vartheta.sin_cos();
    let up = SpinState::new_unchecked(Complex64::new(c, 0.0), Complex64::new(s, 0.0));
    let down = SpinState::new_unchecked(Complex64::new(-s, 0.0), Complex64::new(c, 0.0));
    (up, down)
}

/// Closed-form subensemble means:
/// sg1 = -(1/2) cos(2(vartheta - theta)), sg2 = +(1/2) cos(2(vartheta - theta)).
pub fn closed_form_means(vartheta: f64, theta: f64) -> SubensembleMeans {
    let value = 0.5 * (2.0 * (vartheta - theta)).cos();
    SubensembleMeans {
        sg1: -value,
        sg2: value,
    }
}

/// Element-by-element state-vector simulation.
///
/// spin-up (x) input port -> 50:50 splitter -> mirrors (crossing the arms
/// into the adjustable splitter's input ports) -> spin-flipper on
/// `flip_arm` (up -> down, down -> -up) -> phase e^{i calib_phase} in
/// arm 1 -> rewrite in the output basis {psi_3, psi_4}.
///
/// Returns the normalized joint state just after the adjustable splitter.
pub fn simulate_pipeline(cfg: &ArrayConfig) -> JointState {
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    // Joint amplitudes indexed [spin][input-basis path]. The symmetric
    // 50:50 mixer puts the spin-up beam evenly into both arms; the mirror
    // crossing routes arm 1 -> psi_2 and arm 2 -> psi_1.
    let mut amp = [[inv_sqrt2, inv_sqrt2], [Complex64::new(0.0, 0.0); 2]];
    let arm_slot = |arm: Arm| match arm {
        Arm::Arm1 => 1,
        Arm::Arm2 => 0,
    };

    // Spin-flipper: (c_up, c_down) -> (-c_down, c_up) in the flip arm.
    let k = arm_slot(cfg.flip_arm);
    let (u, d) = (amp[0][k], amp[1][k]);
    amp[0][k] = -d;
    amp[1][k] = u;

    // Phase element in arm 1.
    let phase = Complex64::from_polar(1.0, cfg.calib_phase);
    let k = arm_slot(Arm::Arm1);
    amp[0][k] *= phase;
    amp[1][k] *= phase;

    // Adjustable splitter: components along psi_3 and psi_4.
    // <psi_3| = ig <psi_1| + d <psi_2|, <psi_4| = d <psi_1| + ig <psi_2|.
    let (g, d) = cfg.vartheta.sin_cos();
    let ig = Complex64::new(0.0, g);
    let dd = Complex64::new(d, 0.0);
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for spin in 0..2 {
        out[2 * spin] = ig * amp[spin][0] + dd * amp[spin][1];
        out[2 * spin + 1] = dd * amp[spin][0] + ig * amp[spin][1];
    }
    JointState::new_unchecked(out, PathBasis::Output)
}

/// Probability-weighted mean of sigma_theta over the subensemble exiting
/// `port`: prob(port) x <sigma_theta> in the conditional spin state.
/// A port with numerically zero probability contributes 0.
pub fn subensemble_mean_from_state(j: &JointState, port: Port, theta: f64) -> Result<f64> {
    if j.path_basis() != PathBasis::Output {
        return Err(Error::InvalidArgument(
            "joint state must be expressed in the output path basis".into(),
        ));
    }
    let p = PathState::basis_state(PathBasis::Output, port.index());
    match project_path(j, &p) {
        Ok((spin, prob)) => Ok(prob * expectation(&spin_theta_observable(theta), &spin)),
        Err(Error::ZeroBranch) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Probe Stern-Gerlach orientations used by the calibration objective.
const CALIBRATION_THETA_GRID: [f64; 4] = [0.0, FRAC_PI_8, FRAC_PI_6, FRAC_PI_3];

fn calibration_objective(flip_arm: Arm, vartheta: f64, phase: f64) -> f64 {
    let mut worst = 0.0f64;
    for &theta in &CALIBRATION_THETA_GRID {
        let cfg = ArrayConfig::new(vartheta, theta, phase).with_flip_arm(flip_arm);
        let j = simulate_pipeline(&cfg);
        let closed = closed_form_means(vartheta, theta);
        let sg1 = subensemble_mean_from_state(&j, Port::Three, theta)
            .expect("pipeline state is in the output basis");
        let sg2 = subensemble_mean_from_state(&j, Port::Four, theta)
            .expect("pipeline state is in the output basis");
        worst = worst.max((sg1 - closed.sg1).abs()).max((sg2 - closed.sg2).abs());
    }
    worst
}

/// Find the arm-1 phase at which the pipeline reproduces the closed-form
/// subensemble means, with the flipper in its default arm.
///
/// The search scans [0, 2pi), narrows the best bracket below 1e-10, and
/// snaps onto the quadratic minimum with wide-spaced parabolic fits so the
/// returned phase does not wobble with the probe angle. Fails if no phase
/// brings the deviation under 1e-9, which would mean the element
/// conventions cannot realize the port assignment.
pub fn calibrate_phase(vartheta_probe: f64) -> Result<f64> {
    calibrate_phase_with(Arm::Arm1, vartheta_probe)
}

/// As [`calibrate_phase`], for an explicit flipper arm.
pub fn calibrate_phase_with(flip_arm: Arm, vartheta_probe: f64) -> Result<f64> {
    if (2.0 * vartheta_probe).sin().abs() < 1e-9 {
        return Err(Error::InvalidArgument(
            "vartheta_probe must not be a multiple of pi/2 (both ports need tilted spin states)"
                .into(),
        ));
    }
    let f = |phase: f64| calibration_objective(flip_arm, vartheta_probe, phase);

    // Coarse scan.
    let coarse = 4096usize;
    let step = 2.0 * PI / coarse as f64;
    let (mut best_phase, mut best_val) = (0.0, f(0.0));
    for k in 1..coarse {
        let phase = k as f64 * step;
        let val = f(phase);
        if val < best_val {
            best_val = val;
            best_phase = phase;
        }
    }

    // Ternary refinement of the bracketing interval down to 1e-10 width.
    let (mut lo, mut hi) = (best_phase - step, best_phase + step);
    while hi - lo > 1e-10 {
        let third = (hi - lo) / 3.0;
        let (a, b) = (lo + third, hi - third);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mut phase = 0.5 * (lo + hi);

    // Parabolic snap: near the optimum the objective is quadratic, and
    // samples h apart sit far above roundoff noise, so two fits land the
    // vertex to ~1e-13 regardless of the probe angle.
    let h = 1e-3;
    for _ in 0..2 {
        let (fm, f0, fp) = (f(phase - h), f(phase), f(phase + h));
        let denom = fm - 2.0 * f0 + fp;
        if denom > 0.0 {
            let vertex = phase + 0.5 * h * (fm - fp) / denom;
            if (vertex - phase).abs() < h {
                phase = vertex;
            }
        }
    }
    phase = phase.rem_euclid(2.0 * PI);

    let deviation = f(phase);
    if deviation < CALIBRATION_TOL {
        Ok(phase)
    } else {
        Err(Error::CalibrationFailure {
            phase,
            best_deviation: deviation,
            tolerance: CALIBRATION_TOL,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::state_to_bloch;
    use crate::stream::SeededStream;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn random_angle(stream: &mut SeededStream, range: f64) -> f64 {
        stream.next_f64() * range
    }

    #[test]
    fn splitter_observable_limits() {
        // gamma = 1: diag(1, -1); gamma = 0: diag(-1, 1).
        let m = adjustable_bs_observable(FRAC_PI_2);
        assert!(m.max_abs_diff(&Mat2::new([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
        ])) < 1e-12);

        let m = adjustable_bs_observable(0.0);
        assert!(m.max_abs_diff(&Mat2::new([
            [Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ])) < 1e-12);

        // Balanced splitter: [[0, -i], [i, 0]].
        let m = adjustable_bs_observable(PI / 4.0);
        assert!(m.max_abs_diff(&Mat2::new([
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        ])) < 1e-12);
    }

    #[test]
    fn splitter_observable_squares_to_identity_and_is_traceless() {
        let mut stream = SeededStream::new(0x0b5e, 0);
        for _ in 0..100 {
            let vt = random_angle(&mut stream, PI);
            let m = adjustable_bs_observable(vt);
            assert!(m.mul(&m).max_abs_diff(&Mat2::identity()) < 1e-12);
            assert!(m.trace().norm() < 1e-12);
            assert!(m.hermitian_deviation() < 1e-12);
        }
    }

    #[test]
    fn port_states_at_limits() {
        let (p3, p4) = output_port_states(FRAC_PI_2);
        assert!((p3.amplitudes()[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(p3.amplitudes()[1].norm() < 1e-12);
        assert!(p4.amplitudes()[0].norm() < 1e-12);
        assert!((p4.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);

        let (p3, p4) = output_port_states(0.0);
        assert!((p3.amplitudes()[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((p4.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn port_states_reconstruct_splitter_observable() {
        let mut stream = SeededStream::new(0xa110, 1);
        for _ in 0..100 {
            let vt = random_angle(&mut stream, PI);
            let (p3, p4) = output_port_states(vt);
            let overlap = p3.amplitudes()[0].conj() * p4.amplitudes()[0]
                + p3.amplitudes()[1].conj() * p4.amplitudes()[1];
            assert!(overlap.norm() < 1e-12, "ports not orthogonal at {vt}");

            let rebuilt = Mat2::outer(&p3.amplitudes()).sub(&Mat2::outer(&p4.amplitudes()));
            assert!(rebuilt.max_abs_diff(&adjustable_bs_observable(vt)) < 1e-12);
        }
    }

    #[test]
    fn tilted_states_limits_and_bloch() {
        let (up, down) = tilted_spin_states(0.0);
        assert!((up.c_up().re - 1.0).abs() < 1e-12);
        assert!((down.c_down().re - 1.0).abs() < 1e-12);

        // vartheta = pi/2: up -> |down>_z, down -> -|up>_z (same ray as |up>_z).
        let (up, down) = tilted_spin_states(FRAC_PI_2);
        assert!(up.overlap_sqr(&SpinState::down_z()) > 1.0 - 1e-12);
        assert!(down.overlap_sqr(&SpinState::up_z()) > 1.0 - 1e-12);

        // vartheta = pi/4: up is the +x state.
        let (up, _) = tilted_spin_states(PI / 4.0);
        let n = state_to_bloch(&up);
        assert!((n.x() - 1.0).abs() < 1e-12 && n.z().abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let m = closed_form_means(0.4, 0.4);
        assert!((m.sg1 + 0.5).abs() < 1e-12 && (m.sg2 - 0.5).abs() < 1e-12);

        let m = closed_form_means(0.9 + PI / 4.0, 0.9);
        assert!(m.sg1.abs() < 1e-12 && m.sg2.abs() < 1e-12);

        // Quarter values, cross-checked against the weighted expectation.
        let m = closed_form_means(FRAC_PI_3, FRAC_PI_6);
        assert!((m.sg1 + 0.25).abs() < 1e-12);
        assert!((m.sg2 - 0.25).abs() < 1e-12);
        let (up, down) = tilted_spin_states(FRAC_PI_3);
        let obs = spin_theta_observable(FRAC_PI_6);
        assert!((0.5 * expectation(&obs, &down) - m.sg1).abs() < 1e-12);
        assert!((0.5 * expectation(&obs, &up) - m.sg2).abs() < 1e-12);
    }

    #[test]
    fn calibrated_pipeline_ports_carry_tilted_states() {
        let phase = calibrate_phase(FRAC_PI_6).unwrap();
        for vt in [0.2, FRAC_PI_6, 1.0, 2.5] {
            let cfg = ArrayConfig::new(vt, 0.0, phase);
            let j = simulate_pipeline(&cfg);
            let (up, down) = tilted_spin_states(vt);

            let p3 = PathState::basis_state(PathBasis::Output, 0);
            let (spin3, prob3) = project_path(&j, &p3).unwrap();
            assert!((prob3 - 0.5).abs() < 1e-12);
            assert!(spin3.overlap_sqr(&down) > 1.0 - 1e-12);

            let p4 = PathState::basis_state(PathBasis::Output, 1);
            let (spin4, prob4) = project_path(&j, &p4).unwrap();
            assert!((prob4 - 0.5).abs() < 1e-12);
            assert!(spin4.overlap_sqr(&up) > 1.0 - 1e-12);

            assert!((prob3 + prob4 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pipeline_matches_closed_forms_on_grid() {
        let phase = calibrate_phase(FRAC_PI_6).unwrap();
        for i in 0..13 {
            for jdx in 0..13 {
                let vt = i as f64 * PI / 13.0;
                let th = jdx as f64 * PI / 13.0;
                let cfg = ArrayConfig::new(vt, th, phase);
                let state = simulate_pipeline(&cfg);
                let closed = closed_form_means(vt, th);
                let sg1 = subensemble_mean_from_state(&state, Port::Three, th).unwrap();
                let sg2 = subensemble_mean_from_state(&state, Port::Four, th).unwrap();
                assert!((sg1 - closed.sg1).abs() < 1e-9, "sg1 off at ({vt}, {th})");
                assert!((sg2 - closed.sg2).abs() < 1e-9, "sg2 off at ({vt}, {th})");
            }
        }
    }

    #[test]
    fn exact_subensemble_from_product_state() {
        // up_vt (x) psi_4 exactly, measured along theta = vt: weight 1, mean 1.
        let vt = 0.7;
        let (up, _) = tilted_spin_states(vt);
        let p4 = PathState::basis_state(PathBasis::Output, 1);
        let j = crate::qubit::tensor(&up, &p4);
        let got = subensemble_mean_from_state(&j, Port::Four, vt).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
        // The other port is empty and contributes zero.
        let other = subensemble_mean_from_state(&j, Port::Three, vt).unwrap();
        assert_eq!(other, 0.0);
    }

    #[test]
    fn calibration_is_stable_across_probe_angles() {
        let phases: Vec<f64> = [FRAC_PI_6, PI / 5.0, FRAC_PI_3]
            .iter()
            .map(|&vt| calibrate_phase(vt).unwrap())
            .collect();
        for w in phases.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-8, "{} vs {}", w[0], w[1]);
        }
        // The element conventions place the optimum at 3pi/2.
        assert!((phases[0] - 1.5 * PI).abs() < 1e-6, "{}", phases[0]);
    }

    #[test]
    fn calibration_rejects_degenerate_probe() {
        assert!(matches!(
            calibrate_phase(0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            calibrate_phase(FRAC_PI_2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn flipper_in_arm2_cannot_be_calibrated() {
        assert!(matches!(
            calibrate_phase_with(Arm::Arm2, FRAC_PI_6),
            Err(Error::CalibrationFailure { .. })
        ));
    }

    proptest! {
        #[test]
        fn closed_form_consistent_with_tilted_expectation(
            vt in 0.0..PI,
            th in 0.0..PI,
        ) {
            let closed = closed_form_means(vt, th);
            let (up, down) = tilted_spin_states(vt);
            let obs = spin_theta_observable(th);
            prop_assert!((closed.sg2 - 0.5 * expectation(&obs, &up)).abs() < 1e-12);
            prop_assert!((closed.sg1 - 0.5 * expectation(&obs, &down)).abs() < 1e-12);
        }

        #[test]
        fn closed_form_antisymmetry_and_periodicity(
            vt in 0.0..PI,
            th in 0.0..PI,
        ) {
            let m = closed_form_means(vt, th);
            prop_assert!((m.sg1 + m.sg2).abs() < 1e-15);
            prop_assert!(m.sg1.abs() <= 0.5 + 1e-15);

            let shifted = closed_form_means(vt + PI, th);
            prop_assert!((shifted.sg1 - m.sg1).abs() < 1e-12);
            prop_assert!((shifted.sg2 - m.sg2).abs() < 1e-12);
        }

        #[test]
        fn pipeline_output_is_normalized(vt in 0.0..PI, phase in 0.0..(2.0 * PI)) {
            let j = simulate_pipeline(&ArrayConfig::new(vt, 0.0, phase));
            prop_assert!((j.norm() - 1.0).abs() < 1e-12);
        }
    }
}
