//! Minimal complex linear algebra for a two-level system and the
//! spin (x) path product space, plus the Bloch-sphere correspondence.
//!
//! A pure spin state |psi> maps to the unit vector
//! n_psi = (<sigma_x>, <sigma_y>, <sigma_z>) through the projector identity
//! |psi><psi| = (I + n_psi . sigma) / 2, and any observable decomposes as
//! A = a0 I + a . sigma, so that <psi|A|psi> = a0 + a . n_psi.
//!
//! Convention for Stern-Gerlach orientations: `sigma_theta` lies in the
//! x-z plane with Bloch axis (sin 2theta, 0, cos 2theta). This is the
//! unique x-z-plane choice for which its mean value in the tilted states
//! with Bloch vectors +/-(sin 2vartheta, 0, cos 2vartheta) reduces to
//! +/-cos(2(vartheta - theta)).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norm deviation accepted on caller-supplied amplitudes and vectors.
const INPUT_NORM_TOL: f64 = 1e-9;
/// Probability below which a conditional state is treated as undefined.
const ZERO_BRANCH_TOL: f64 = 1e-15;

/// Plain real 3-vector. Unlike [`BlochVector`] it carries no unit-norm
/// invariant, so it can hold observable directions of any length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> Vec3 {
        Vec3::new(k * self.x, k * self.y, k * self.z)
    }

    pub fn add(&self, other: &Vec3) -> Vec3 {
        Vec3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Unit vector on the sphere S^2. Doubles as the direction of a pure
/// state and as the hidden variable of the realistic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(Vec3);

impl BlochVector {
    /// Build a unit vector, rejecting inputs whose norm deviates from 1 by
    /// more than 1e-9 and renormalizing the rest exactly.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3::new(x, y, z);
        let norm = v.norm();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::InvalidVector { norm });
        }
        Ok(BlochVector(v.scale(1.0 / norm)))
    }

    /// Constructor for components already known to be unit length
    /// (trigonometric identities, negation of a unit vector).
    pub(crate) fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        BlochVector(Vec3::new(x, y, z))
    }

    pub fn x_axis() -> Self {
        BlochVector::new_unchecked(1.0, 0.0, 0.0)
    }

    pub fn y_axis() -> Self {
        BlochVector::new_unchecked(0.0, 1.0, 0.0)
    }

    pub fn z_axis() -> Self {
        BlochVector::new_unchecked(0.0, 0.0, 1.0)
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vec3(&self) -> Vec3 {
        self.0
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.dot(&other.0)
    }
}

impl std::ops::Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector(-self.0)
    }
}

/// Bloch axis probed by a Stern-Gerlach device at orientation `angle`:
/// (sin 2a, 0, cos 2a). The same unit vectors serve as the tilted-state
/// directions of the interferometer and the flip targets of the
/// hidden-variable channel rule.
pub fn spin_axis(angle: f64) -> BlochVector {
    let (s, c) = (2.0 * angle).sin_cos();
    BlochVector::new_unchecked(s, 0.0, c)
}

/// Normalized two-component spin state over the {|up>_z, |down>_z} basis.
///
/// Two values differing only by a global phase describe the same physical
/// state; they map to the same [`BlochVector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    c_up: Complex64,
    c_down: Complex64,
}

impl SpinState {
    /// Build a spin state, rejecting amplitude pairs whose norm deviates
    /// from 1 by more than 1e-9 and renormalizing the rest.
    pub fn new(c_up: Complex64, c_down: Complex64) -> Result<Self> {
        let norm = (c_up.norm_sqr() + c_down.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::InvalidState { norm });
        }
        Ok(SpinState {
            c_up: c_up / norm,
            c_down: c_down / norm,
        })
    }

    pub(crate) fn new_unchecked(c_up: Complex64, c_down: Complex64) -> Self {
        SpinState { c_up, c_down }
    }

    /// |up>_z
    pub fn up_z() -> Self {
        SpinState::new_unchecked(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// |down>_z
    pub fn down_z() -> Self {
        SpinState::new_unchecked(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn c_up(&self) -> Complex64 {
        self.c_up
    }

    pub fn c_down(&self) -> Complex64 {
        self.c_down
    }

    /// The same physical state multiplied by a global phase e^{i alpha}.
    pub fn with_phase(&self, alpha: f64) -> SpinState {
        let phase = Complex64::from_polar(1.0, alpha);
        SpinState::new_unchecked(phase * self.c_up, phase * self.c_down)
    }

    /// |<self|other>|^2
    pub fn overlap_sqr(&self, other: &SpinState) -> f64 {
        (self.c_up.conj() * other.c_up + self.c_down.conj() * other.c_down).norm_sqr()
    }
}

/// Bloch vector of a pure state: (<sigma_x>, <sigma_y>, <sigma_z>).
pub fn state_to_bloch(s: &SpinState) -> BlochVector {
    let cross = s.c_up.conj() * s.c_down;
    let x = 2.0 * cross.re;
    let y = 2.0 * cross.im;
    let z = s.c_up.norm_sqr() - s.c_down.norm_sqr();
    // Constructed states are normalized, so (x, y, z) is unit to roundoff.
    BlochVector::new_unchecked(x, y, z)
}

/// Canonical-phase state for a unit direction: c_up real and non-negative,
/// except exactly at the south pole where the convention is (0, 1).
///
/// The hemisphere branch keeps the round trip with [`state_to_bloch`]
/// accurate to ~1e-15 even arbitrarily close to either pole.
pub fn bloch_to_state(n: &BlochVector) -> SpinState {
    let (x, y, z) = (n.x(), n.y(), n.z());
    if z >= 0.0 {
        let c_up = ((1.0 + z) / 2.0).sqrt();
        let c_down = Complex64::new(x, y) / (2.0 * c_up);
        SpinState::new_unchecked(Complex64::new(c_up, 0.0), c_down)
    } else {
        let m = ((1.0 - z) / 2.0).sqrt();
        let rho = (x * x + y * y).sqrt();
        if rho == 0.0 {
            return SpinState::down_z();
        }
        // c_up = rho / (2m) is real >= 0; the azimuthal phase moves to c_down.
        let c_up = rho / (2.0 * m);
        let c_down = Complex64::new(x, y) * (m / rho);
        SpinState::new_unchecked(Complex64::new(c_up, 0.0), c_down)
    }
}

/// Observable a0 I + a . sigma on the spin space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable {
    a0: f64,
    avec: Vec3,
}

impl Observable {
    pub fn new(a0: f64, avec: Vec3) -> Self {
        Observable { a0, avec }
    }

    pub fn identity() -> Self {
        Observable::new(1.0, Vec3::ZERO)
    }

    pub fn sigma_x() -> Self {
        Observable::new(0.0, Vec3::new(1.0, 0.0, 0.0))
    }

    pub fn sigma_y() -> Self {
        Observable::new(0.0, Vec3::new(0.0, 1.0, 0.0))
    }

    pub fn sigma_z() -> Self {
        Observable::new(0.0, Vec3::new(0.0, 0.0, 1.0))
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn avec(&self) -> Vec3 {
        self.avec
    }

    /// (a0 + |a|, a0 - |a|): the two eigenvalues of a0 I + a . sigma.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = self.avec.norm();
        (self.a0 + r, self.a0 - r)
    }

    /// Explicit 2x2 Hermitian matrix a0 I + a . sigma.
    pub fn matrix(&self) -> Mat2 {
        let Vec3 { x, y, z } = self.avec;
        Mat2::new([
            [
                Complex64::new(self.a0 + z, 0.0),
                Complex64::new(x, -y),
            ],
            [
                Complex64::new(x, y),
                Complex64::new(self.a0 - z, 0.0),
            ],
        ])
    }

    /// Recover (a0, a) from a Hermitian matrix; inverse of [`Self::matrix`].
    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        let dev = m.hermitian_deviation();
        if dev > 1e-9 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let a0 = 0.5 * (m.at(0, 0).re + m.at(1, 1).re);
        let x = 0.5 * (m.at(0, 1).re + m.at(1, 0).re);
        let y = 0.5 * (m.at(1, 0).im - m.at(0, 1).im);
        let z = 0.5 * (m.at(0, 0).re - m.at(1, 1).re);
        Ok(Observable::new(a0, Vec3::new(x, y, z)))
    }
}

/// <psi| (a0 I + a . sigma) |psi> = a0 + a . n_psi.
pub fn expectation(a: &Observable, s: &SpinState) -> f64 {
    a.a0() + a.avec().dot(&state_to_bloch(s).as_vec3())
}

/// Spin observable measured by a Stern-Gerlach device oriented at `theta`:
/// traceless, unit axis (sin 2theta, 0, cos 2theta). See the module docs
/// for why the axis lives in the x-z plane.
pub fn spin_theta_observable(theta: f64) -> Observable {
    Observable::new(0.0, spin_axis(theta).as_vec3())
}

/// Dense complex 2x2 matrix, row major. Small enough that every operation
/// is written out; used for path observables and for cross-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Mat2 { m }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new([[one, zero], [zero, one]])
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
            }
        }
        Mat2::new(out)
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let mut out = self.m;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell -= other.m[i][j];
            }
        }
        Mat2::new(out)
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// |v><v| for a two-component amplitude vector.
    pub fn outer(v: &[Complex64; 2]) -> Mat2 {
        Mat2::new([
            [v[0] * v[0].conj(), v[0] * v[1].conj()],
            [v[1] * v[0].conj(), v[1] * v[1].conj()],
        ])
    }

    /// Largest entrywise |self - other|.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut max = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                max = max.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        max
    }

    /// Largest entrywise |M - M^dagger|.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                max = max.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        max
    }
}

/// Which two-mode path basis a set of amplitudes refers to: the input
/// ports of the adjustable splitter or its output ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathBasis {
    Input,
    Output,
}

impl PathBasis {
    fn name(&self) -> &'static str {
        match self {
            PathBasis::Input => "input",
            PathBasis::Output => "output",
        }
    }
}

/// Normalized two-mode path state tagged with its basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    amp: [Complex64; 2],
    basis: PathBasis,
}

impl PathState {
    pub fn new(a0: Complex64, a1: Complex64, basis: PathBasis) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::InvalidState { norm });
        }
        Ok(PathState {
            amp: [a0 / norm, a1 / norm],
            basis,
        })
    }

    pub(crate) fn new_unchecked(a0: Complex64, a1: Complex64, basis: PathBasis) -> Self {
        PathState { amp: [a0, a1], basis }
    }

    /// The `index`-th basis vector of the given basis.
    pub fn basis_state(basis: PathBasis, index: usize) -> Self {
        assert!(index < 2, "path basis index out of range");
        let mut amp = [Complex64::new(0.0, 0.0); 2];
        amp[index] = Complex64::new(1.0, 0.0);
        PathState { amp, basis }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amp
    }

    pub fn basis(&self) -> PathBasis {
        self.basis
    }
}

/// Four spin (x) path amplitudes in lexicographic order with the spin
/// index major: [up*p0, up*p1, down*p0, down*p1]. The path basis tag
/// travels with the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    amp: [Complex64; 4],
    path_basis: PathBasis,
}

impl JointState {
    pub fn new(amp: [Complex64; 4], path_basis: PathBasis) -> Result<Self> {
        let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::InvalidState { norm });
        }
        let mut scaled = amp;
        for a in &mut scaled {
            *a /= norm;
        }
        Ok(JointState {
            amp: scaled,
            path_basis,
        })
    }

    pub(crate) fn new_unchecked(amp: [Complex64; 4], path_basis: PathBasis) -> Self {
        JointState { amp, path_basis }
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amp
    }

    pub fn path_basis(&self) -> PathBasis {
        self.path_basis
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Kronecker product spin (x) path, spin index major.
pub fn tensor(s: &SpinState, p: &PathState) -> JointState {
    let [p0, p1] = p.amplitudes();
    JointState::new_unchecked(
        [s.c_up() * p0, s.c_up() * p1, s.c_down() * p0, s.c_down() * p1],
        p.basis(),
    )
}

/// Condition a joint state on the path exiting into `p`: returns the
/// normalized conditional spin state and the probability of that branch.
pub fn project_path(j: &JointState, p: &PathState) -> Result<(SpinState, f64)> {
    if j.path_basis() != p.basis() {
        return Err(Error::BasisMismatch {
            expected: j.path_basis().name(),
            got: p.basis().name(),
        });
    }
    let [p0, p1] = p.amplitudes();
    let a = j.amplitudes();
    // <p|J> taken on the path slot, leaving a spin amplitude pair.
    let up = p0.conj() * a[0] + p1.conj() * a[1];
    let down = p0.conj() * a[2] + p1.conj() * a[3];
    let prob = up.norm_sqr() + down.norm_sqr();
    if prob < ZERO_BRANCH_TOL {
        return Err(Error::ZeroBranch);
    }
    let scale = prob.sqrt();
    Ok((SpinState::new_unchecked(up / scale, down / scale), prob))
}
