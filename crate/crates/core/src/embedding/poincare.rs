//! Points of the Poincaré disk and its distance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus a point may take.
pub const MAX_RADIUS: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincarePoint {
    pub re: f64,
    pub im: f64,
}

impl PoincarePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let p = PoincarePoint { re, im };
        if !re.is_finite() || !im.is_finite() || p.z().norm() >= 1.0 {
            return Err(Error::InvalidArgument(format!("({re}, {im}) is not inside the unit disk")));
        }
        Ok(p)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        PoincarePoint::new(z.re, z.im)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Pulls the point radially inside `MAX_RADIUS` if needed.
    pub(crate) fn clamped(z: Complex64) -> PoincarePoint {
        let r = z.norm();
        let z = if r > MAX_RADIUS { z * (MAX_RADIUS / r) } else { z };
        PoincarePoint { re: z.re, im: z.im }
    }
}

/// `2 atanh(|z − w| / |1 − z w̄|)`.
pub fn hyperbolic_distance(p: &PoincarePoint, q: &PoincarePoint) -> Result<f64> {
    for x in [p, q] {
        if !(x.z().norm() < 1.0) {
            return Err(Error::InvalidArgument(format!("({}, {}) is not inside the unit disk", x.re, x.im)));
        }
    }
    Ok(disk_distance(p.z(), q.z()))
}

pub(crate) fn disk_distance(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - z * w.conj()).norm();
    2.0 * (num / den).min(1.0).atanh()
}

/// The disk automorphism `z ↦ e^{iθ} (z + a) / (1 + ā z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub theta: f64,
    pub a: Complex64,
}

impl Mobius {
    pub fn new(theta: f64, a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument("translation must lie inside the disk".into()));
        }
        Ok(Mobius { theta, a })
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * (z + self.a) / (Complex64::new(1.0, 0.0) + self.a.conj() * z)
    }
}

/// Möbius addition `z ⊕ w = (z + w) / (1 + z̄ w)`: moves `z` along the
/// geodesic in direction `w`.
pub(crate) fn mobius_add(z: Complex64, w: Complex64) -> Complex64 {
    (z + w) / (Complex64::new(1.0, 0.0) + z.conj() * w)
}
