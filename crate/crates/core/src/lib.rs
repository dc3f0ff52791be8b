//! contextlab: numerical comparison of the exact quantum description of a
//! spin-path interferometric test against the Kochen-Specker noncontextual
//! hidden-variable model for a qubit.
//!
//! Spin-up neutrons traverse a Mach-Zehnder-style array whose adjustable
//! output splitter prepares tilted spin states at its two exit ports;
//! Stern-Gerlach analyzers downstream record subensemble mean values. The
//! crate evaluates those means four independent ways — quantum closed
//! form, quantum state-vector pipeline, hidden-variable closed form, and
//! hidden-variable quadrature — plus seeded Monte Carlo over the
//! hidden-variable model, and ships a sweep harness that tabulates all of
//! them side by side. The model and the quantum prediction agree
//! identically, which is the point: the subensemble statistics of this
//! arrangement cannot distinguish quantum mechanics from a noncontextual
//! realistic model.

pub mod error;
pub mod harness;
pub mod interferometer;
pub mod ks;
pub mod quadrature;
pub mod qubit;
pub mod stream;

pub use error::{Error, Result};
pub use interferometer::{
    adjustable_bs_observable, calibrate_phase, closed_form_means, output_port_states,
    simulate_pipeline, subensemble_mean_from_state, tilted_spin_states, Arm, ArrayConfig, Port,
    SubensembleMeans,
};
pub use ks::{
    analytic_expectation, density, ks_subensemble_means, mz_channel_transition,
    quadrature_expectation, response, sample, ChannelOutcome, HiddenVar, KSEnsemble, McMeans,
    ResponseModel,
};
pub use qubit::{
    bloch_to_state, expectation, project_path, spin_axis, spin_theta_observable, state_to_bloch,
    tensor, BlochVector, JointState, Mat2, Observable, PathBasis, PathState, SpinState, Vec3,
};
pub use stream::{SeedRecord, SeededStream};
