//! The Kochen-Specker noncontextual realistic model for a qubit.
//!
//! Hidden variables are unit vectors n_lambda on S^2. Preparing the state
//! with Bloch direction n_a distributes them with density
//!
//!   rho_a(lambda) = (n_lambda . n_a / pi) Theta(n_lambda . n_a),
//!
//! i.e. a cosine-weighted hemisphere around n_a. A measurement of
//! A = a0 I + a . sigma responds with the eigenvalue
//! a0 + |a| sgn(n_lambda . a_hat), so every recorded value is sharp, and
//! averaging the response over the density reproduces the quantum
//! expectation a0 + a . n_psi identically.
//!
//! Three independent evaluators of the model's predictions live here:
//! closed form ([`analytic_expectation`]), spherical product quadrature
//! over the actual density and response functions
//! ([`quadrature_expectation`]), and seeded Monte Carlo
//! ([`ks_subensemble_means`]).
//!
//! The Mach-Zehnder channel rule replaces the preparation direction z by
//! the tilted-down direction (exit port 3) or the tilted-up direction
//! (port 4), each channel taken with probability 1/2, and redraws the
//! hidden variable from the flipped density. Tie-break conventions are
//! fixed for determinism: Theta(0) = 0 and sgn(0) = +1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interferometer::Port;
use crate::quadrature::gauss_legendre;
use crate::qubit::{spin_axis, spin_theta_observable, BlochVector, Observable, Vec3};
use crate::stream::{SeedRecord, SeededStream};

/// One hidden variable: a direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenVar {
    pub n_lambda: BlochVector,
}

/// A batch of hidden variables drawn for one preparation, together with
/// the seed material that produced it.
#[derive(Debug, Clone)]
pub struct KSEnsemble {
    pub support_direction: BlochVector,
    pub members: Vec<HiddenVar>,
    pub seed_record: SeedRecord,
}

/// Exit channel and the redrawn hidden variable behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOutcome {
    pub port: Port,
    pub post_var: HiddenVar,
}

/// Which response function drives an evaluation. `SignFlipped` negates
/// the sign convention and is deliberately wrong; the harness uses it to
/// demonstrate that a broken model is actually detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseModel {
    Standard,
    SignFlipped,
}

/// Monte Carlo estimates of the two subensemble means with their
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMeans {
    pub sg1: f64,
    pub se1: f64,
    pub sg2: f64,
    pub se2: f64,
}

/// Probability density per unit solid angle of finding the hidden
/// variable at `n_lambda` after preparing along `n_a`. Zero off the
/// support hemisphere, including on the equator itself.
#[inline]
pub fn density(n_a: &BlochVector, n_lambda: &BlochVector) -> f64 {
    let dot = n_a.dot(n_lambda);
    if dot > 0.0 {
        dot / PI
    } else {
        0.0
    }
}

/// Deterministic orthonormal tangent frame (e1, e2) for a unit vector,
/// branching on the hemisphere so no direction is ill-conditioned.
fn tangent_frame(n: &BlochVector) -> (Vec3, Vec3) {
    let (x, y, z) = (n.x(), n.y(), n.z());
    if z >= 0.0 {
        let a = -1.0 / (1.0 + z);
        let b = x * y * a;
        (
            Vec3::new(1.0 + x * x * a, b, -x),
            Vec3::new(b, 1.0 + y * y * a, -y),
        )
    } else {
        let a = 1.0 / (1.0 - z);
        let b = x * y * a;
        (
            Vec3::new(1.0 - x * x * a, -b, x),
            Vec3::new(b, y * y * a - 1.0, -y),
        )
    }
}

/// One draw from the cosine-weighted hemisphere around `dir`.
///
/// In the frame where `dir` is the pole the polar angle has CDF
/// sin^2(theta) on [0, pi/2], so theta = arcsin(sqrt(u)); equivalently
/// sin(theta) = sqrt(u) and cos(theta) = sqrt(1 - u). The azimuth is
/// uniform. Two uniforms are consumed per draw, u first.
fn draw_from_density(dir: &BlochVector, stream: &mut SeededStream) -> BlochVector {
    let u = stream.next_f64();
    let v = stream.next_f64();
    let sin_theta = u.sqrt();
    let cos_theta = (1.0 - u).sqrt();
    let (sin_phi, cos_phi) = (2.0 * PI * v).sin_cos();
    let (e1, e2) = tangent_frame(dir);
    let w = dir
        .as_vec3()
        .scale(cos_theta)
        .add(&e1.scale(sin_theta * cos_phi))
        .add(&e2.scale(sin_theta * sin_phi));
    BlochVector::new_unchecked(w.x, w.y, w.z)
}

/// Draw `count` i.i.d. hidden variables from the density around `n_a`.
pub fn sample(n_a: &BlochVector, count: usize, stream: &mut SeededStream) -> Result<KSEnsemble> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let seed_record = stream.record();
    let members = (0..count)
        .map(|_| HiddenVar {
            n_lambda: draw_from_density(n_a, stream),
        })
        .collect();
    Ok(KSEnsemble {
        support_direction: *n_a,
        members,
        seed_record,
    })
}

/// Sharp response of the hidden variable to a measurement of `a`:
/// always one of the two eigenvalues a0 +/- |a|. For |a| = 0 the
/// observable is a multiple of the identity and the response is a0.
#[inline]
pub fn response(a: &Observable, lam: &HiddenVar) -> f64 {
    response_with_model(ResponseModel::Standard, a, lam)
}

/// As [`response`], with a selectable sign convention.
#[inline]
pub fn response_with_model(model: ResponseModel, a: &Observable, lam: &HiddenVar) -> f64 {
    let r = a.avec().norm();
    if r == 0.0 {
        return a.a0();
    }
    let mut sign = if a.avec().dot(&lam.n_lambda.as_vec3()) >= 0.0 {
        1.0
    } else {
        -1.0
    };
    if model == ResponseModel::SignFlipped {
        sign = -sign;
    }
    a.a0() + r * sign
}

/// Closed form of the ensemble average of the response over the density:
/// a0 + a . n_psi, which is exactly the quantum expectation.
pub fn analytic_expectation(a: &Observable, n_psi: &BlochVector) -> f64 {
    a.a0() + a.avec().dot(&n_psi.as_vec3())
}

/// Numerical evaluation of the same ensemble average, kept independent of
/// the closed form: product quadrature over the support hemisphere in a
/// frame aligned with `n_psi`, evaluating [`density`] and [`response`]
/// at every node. Gauss-Legendre with `n_nodes` points handles
/// cos(theta) in [0, 1]; the periodic trapezoid rule with `n_nodes`
/// points handles the azimuth.
///
/// The sign discontinuity of the response crosses quadrature cells, so
/// convergence is O(1/n_nodes); smooth integrands converge to roundoff.
pub fn quadrature_expectation(a: &Observable, n_psi: &BlochVector, n_nodes: usize) -> Result<f64> {
    if n_nodes < 64 {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least 64 nodes per angular dimension, got {n_nodes}"
        )));
    }
    let rule = gauss_legendre(n_nodes);
    let (e1, e2) = tangent_frame(n_psi);
    let pole = n_psi.as_vec3();

    let azimuth_weight = 2.0 * PI / n_nodes as f64;
    let trig: Vec<(f64, f64)> = (0..n_nodes)
        .map(|j| (2.0 * PI * j as f64 / n_nodes as f64).sin_cos())
        .collect();

    let mut total = 0.0;
    for (&node, &weight) in rule.nodes.iter().zip(&rule.weights) {
        // Map [-1, 1] onto cos(theta) in [0, 1].
        let c = 0.5 * (node + 1.0);
        let w_polar = 0.5 * weight;
        let s = (1.0 - c * c).sqrt();
        let base = pole.scale(c);
        let mut row = 0.0;
        for &(sin_phi, cos_phi) in &trig {
            let p = base
                .add(&e1.scale(s * cos_phi))
                .add(&e2.scale(s * sin_phi));
            let n_lambda = BlochVector::new_unchecked(p.x, p.y, p.z);
            let lam = HiddenVar { n_lambda };
            row += density(n_psi, &n_lambda) * response(a, &lam);
        }
        total += w_polar * azimuth_weight * row;
    }
    Ok(total)
}

#[inline]
fn draw_port(stream: &mut SeededStream) -> Port {
    if stream.next_u64() >> 63 == 0 {
        Port::Three
    } else {
        Port::Four
    }
}

/// Hidden-variable account of one traversal of the array: a fair coin
/// picks the exit channel, then the hidden variable is redrawn from the
/// density around the flipped direction — the tilted-down axis for
/// port 3, the tilted-up axis for port 4.
pub fn mz_channel_transition(vartheta: f64, stream: &mut SeededStream) -> ChannelOutcome {
    let port = draw_port(stream);
    let dir = match port {
        Port::Three => -spin_axis(vartheta),
        Port::Four => spin_axis(vartheta),
    };
    ChannelOutcome {
        port,
        post_var: HiddenVar {
            n_lambda: draw_from_density(&dir, stream),
        },
    }
}

/// Monte Carlo estimate of both probability-weighted subensemble means.
///
/// Each of `count` particles traverses the channel rule and responds to
/// sigma_theta; per-port response sums divided by the *total* count give
/// estimates of the weighted means, matching the closed forms. Standard
/// errors use the plug-in population variance of the port-indicator
/// weighted response.
pub fn ks_subensemble_means(
    vartheta: f64,
    theta: f64,
    count: usize,
    stream: &mut SeededStream,
) -> Result<McMeans> {
    ks_subensemble_means_with_model(ResponseModel::Standard, vartheta, theta, count, stream)
}

/// As [`ks_subensemble_means`], with a selectable response model.
pub fn ks_subensemble_means_with_model(
    model: ResponseModel,
    vartheta: f64,
    theta: f64,
    count: usize,
    stream: &mut SeededStream,
) -> Result<McMeans> {
    if count < 100 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo count must be at least 100, got {count}"
        )));
    }
    let obs = spin_theta_observable(theta);
    let mut sum = [0.0f64; 2];
    let mut sum_sq = [0.0f64; 2];
    for _ in 0..count {
        let outcome = mz_channel_transition(vartheta, stream);
        let r = response_with_model(model, &obs, &outcome.post_var);
        let k = outcome.port.index();
        sum[k] += r;
        sum_sq[k] += r * r;
    }
    let n = count as f64;
    let stats = |k: usize| {
        let mean = sum[k] / n;
        let var = (sum_sq[k] / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    };
    let (sg1, se1) = stats(0);
    let (sg2, se2) = stats(1);
    Ok(McMeans { sg1, se1, sg2, se2 })
}
