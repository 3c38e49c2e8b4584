//! Time-averaging profiles on [1, 2] and their oscillatory integrals.
//!
//! A profile rho~ is a probability weight on [1, 2]. Its transform
//! `rho(z) = int rho~(s) e^{-i z s} ds` is the Fourier multiplier of the
//! profile-averaged shift; `tau(z) = (1 - rho(z))/(i z)` is the companion
//! multiplier of the time-integrated source term, with the removable singularity
//! at z = 0 handled by a 4-term moment series.

use crate::quad::gl_on;
use rustfft::num_complex::Complex64;

/// Which profile a kernel represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// Polynomial bump c (s-1)^4 (2-s)^4 on [1, 2], discretized by 64-node
    /// Gauss-Legendre quadrature (exact for the degree-8 weight).
    Smooth,
    /// Point mass at s = 1: rho(z) = e^{-iz} exactly.
    Dirac,
    /// Smooth profile at a custom node count (cross-resolution checks).
    SmoothAt(usize),
}

/// A discretized averaging profile: nodes, weights, and moments.
#[derive(Clone, Debug)]
pub struct Profile {
    pub kind: ProfileKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    moments: [f64; 5],
}

/// Normalizer of (s-1)^4 (2-s)^4 on [1, 2]: 1/int = 362880/576 = 630.
pub const SMOOTH_NORMALIZER: f64 = 362880.0 / 576.0;

impl Profile {
    pub fn smooth() -> Self {
        Self::smooth_at(64)
    }

    /// Smooth profile discretized with `n` Gauss-Legendre nodes.
    pub fn smooth_at(n: usize) -> Self {
        let (s, w) = gl_on(n, 1.0, 2.0);
        let weights: Vec<f64> = s
            .iter()
            .zip(&w)
            .map(|(&si, &wi)| wi * SMOOTH_NORMALIZER * (si - 1.0).powi(4) * (2.0 - si).powi(4))
            .collect();
        let kind = if n == 64 { ProfileKind::Smooth } else { ProfileKind::SmoothAt(n) };
        Self::from_nodes(kind, s, weights)
    }

    pub fn dirac() -> Self {
        Self::from_nodes(ProfileKind::Dirac, vec![1.0], vec![1.0])
    }

    fn from_nodes(kind: ProfileKind, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut moments = [0.0; 5];
        for (k, m) in moments.iter_mut().enumerate() {
            *m = nodes.iter().zip(&weights).map(|(&s, &w)| w * s.powi(k as i32)).sum();
        }
        Profile { kind, nodes, weights, moments }
    }

    /// k-th moment of the profile (k <= 4).
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }

    /// rho(z) = sum_i w_i e^{-i z s_i}.
    pub fn rho(&self, z: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&s, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * Complex64::from_polar(1.0, -z * s);
        }
        acc
    }

    /// tau(z) = (1 - rho(z))/(i z), moment series mu1 - iz mu2/2 + (iz)^2 mu3/6
    /// - (iz)^3 mu4/24 for |z| < 1e-3.
    pub fn tau(&self, z: f64) -> Complex64 {
        if z.abs() < 1e-3 {
            let iz = Complex64::new(0.0, z);
            let m = &self.moments;
            Complex64::new(m[1], 0.0) - iz * (m[2] / 2.0) + iz * iz * (m[3] / 6.0)
                - iz * iz * iz * (m[4] / 24.0)
        } else {
            (Complex64::new(1.0, 0.0) - self.rho(z)) / Complex64::new(0.0, z)
        }
    }

    /// Cumulative weight sum_{s_i <= r} w_i.
    pub fn cdf(&self, r: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).filter(|(s, _)| **s <= r).map(|(_, w)| w).sum()
    }

    /// Exact transform of the tau kernel: tau_hat(r) = 2 pi (cdf(r) - 1_{r>=0});
    /// piecewise constant, supported on [0, 2], with a jump at the origin.
    pub fn tau_hat(&self, r: f64) -> f64 {
        let step = if r >= 0.0 { 1.0 } else { 0.0 };
        2.0 * std::f64::consts::PI * (self.cdf(r) - step)
    }

    /// Exact transform of the rho kernel for the smooth profile:
    /// rho_hat(r) = 2 pi c (r-1)^4 (2-r)^4 on [1, 2], zero elsewhere.
    pub fn rho_hat(&self, r: f64) -> f64 {
        if (1.0..=2.0).contains(&r) {
            2.0 * std::f64::consts::PI * SMOOTH_NORMALIZER * (r - 1.0).powi(4) * (2.0 - r).powi(4)
        } else {
            0.0
        }
    }
}
