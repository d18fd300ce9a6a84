//! Shared domain types and physical constants. Everything is SI.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants used throughout the toolkit.
///
/// Defaults are the diamond values: `chi_rho = -6.2e-9 m^3/kg`, `g = 9.8 m/s^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Vacuum permeability (T m / A).
    pub mu0: f64,
    /// Gravitational acceleration magnitude (m/s^2), acting along -z.
    pub g: f64,
    /// Mass magnetic susceptibility (m^3/kg), negative for diamagnets.
    pub chi_rho: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Electron g-factor.
    pub g_s: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            mu0: 4.0e-7 * PI,
            g: 9.8,
            chi_rho: -6.2e-9,
            hbar: 1.054_571_817e-34,
            g_s: 2.0,
            mu_b: 9.274_010_078_3e-24,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu0,
            self.g,
            self.chi_rho,
            self.hbar,
            self.g_s,
            self.mu_b,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("physical constants must be finite"));
        }
        if self.mu0 <= 0.0 {
            return Err(Error::invalid("mu0 must be positive"));
        }
        if self.g <= 0.0 {
            return Err(Error::invalid("g must be positive"));
        }
        if self.chi_rho >= 0.0 {
            return Err(Error::invalid("chi_rho must be negative (diamagnetic)"));
        }
        Ok(())
    }

    /// Diamagnetic coefficient `-chi_rho * mu0 / (4 pi^2)`.
    pub fn alpha(&self) -> f64 {
        alpha(self)
    }

    /// `-chi_rho / (2 mu0)`: converts `|B|^2` into potential energy per unit mass.
    pub fn potential_per_b_squared(&self) -> f64 {
        -self.chi_rho / (2.0 * self.mu0)
    }
}

/// `alpha = -chi_rho * mu0 / (4 pi^2)` in m^4 s^-2 A^-2.
pub fn alpha(constants: &PhysicalConstants) -> f64 {
    -constants.chi_rho * constants.mu0 / (4.0 * PI * PI)
}

/// A vector in the x-z plane. `z` is vertical; gravity points along -z.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, z: 0.0 };

    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.z * other.z
    }

    /// z-component of the 3-D cross product when both vectors lie in the plane
    /// (sign convention: positive for a counter-clockwise turn from `self` to `other`
    /// with x to the right and z up).
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.z - self.z * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.z.is_finite()
    }

    /// Direction angle measured counter-clockwise from +x.
    pub fn angle(self) -> f64 {
        self.z.atan2(self.x)
    }

    pub fn mirror_x(self) -> Vec2 {
        Vec2::new(-self.x, self.z)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.z + rhs.z)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.z += rhs.z;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.z - rhs.z)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.z)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.z * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.z / s)
    }
}

/// Infinite straight wire perpendicular to the x-z plane.
///
/// The sign of `current` encodes the direction along y (+y for positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wire {
    pub position: Vec2,
    pub current: f64,
    /// Exclusion radius; evaluating fields at `r <= radius` is an error.
    #[serde(default)]
    pub radius: f64,
}

impl Wire {
    pub fn new(position: Vec2, current: f64) -> Self {
        Self {
            position,
            current,
            radius: 0.0,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() || !self.current.is_finite() {
            return Err(Error::invalid("wire position and current must be finite"));
        }
        if !(self.radius >= 0.0) {
            return Err(Error::invalid("wire radius must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    /// Mass in kg.
    pub mass: f64,
    /// Mass susceptibility override; `None` uses the constants value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_rho: Option<f64>,
}

impl Default for ParticleSpec {
    fn default() -> Self {
        Self {
            mass: 1e-15,
            chi_rho: None,
        }
    }
}

impl ParticleSpec {
    pub fn new(mass: f64) -> Self {
        Self {
            mass,
            chi_rho: None,
        }
    }

    pub fn chi_rho(&self, constants: &PhysicalConstants) -> f64 {
        self.chi_rho.unwrap_or(constants.chi_rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::invalid("particle mass must be positive"));
        }
        if let Some(chi) = self.chi_rho {
            if !(chi < 0.0) {
                return Err(Error::invalid("particle chi_rho must be negative"));
            }
        }
        Ok(())
    }
}

/// Kinematic state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub pos: Vec2,
    pub vel: Vec2,
}

impl TrajectoryState {
    pub fn at_rest(pos: Vec2) -> Self {
        Self {
            t: 0.0,
            pos,
            vel: Vec2::ZERO,
        }
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.pos.x, self.pos.z, self.vel.x, self.vel.z]
    }

    pub(crate) fn from_array(t: f64, y: &[f64; 4]) -> Self {
        Self {
            t,
            pos: Vec2::new(y[0], y[1]),
            vel: Vec2::new(y[2], y[3]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_for_diamond() {
        let c = PhysicalConstants::default();
        let a = alpha(&c);
        assert!((a / 1.9735e-16 - 1.0).abs() < 1e-4, "alpha = {a:e}");
    }

    #[test]
    fn alpha_zero_susceptibility() {
        let c = PhysicalConstants {
            chi_rho: 0.0,
            ..Default::default()
        };
        assert_eq!(alpha(&c), 0.0);
    }

    #[test]
    fn alpha_identity_construction() {
        let mut c = PhysicalConstants::default();
        c.chi_rho = -4.0 * PI * PI / c.mu0;
        assert!((alpha(&c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constants_reject_paramagnet() {
        let c = PhysicalConstants {
            chi_rho: 1e-9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert!(PhysicalConstants::default().validate().is_ok());
    }

    #[test]
    fn particle_validation() {
        assert!(ParticleSpec::new(0.0).validate().is_err());
        assert!(ParticleSpec::new(1e-15).validate().is_ok());
        let p = ParticleSpec {
            mass: 1e-15,
            chi_rho: Some(2.0),
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn wire_rejects_negative_radius() {
        let w = Wire::new(Vec2::ZERO, 1.0).with_radius(-1.0);
        assert!(w.validate().is_err());
    }

    #[test]
    fn vec2_algebra() {
        let a = Vec2::new(3.0, 4.0);
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.dot(Vec2::new(1.0, 0.0)), 3.0);
        assert_eq!(Vec2::new(1.0, 0.0).cross(Vec2::new(0.0, 1.0)), 1.0);
        assert_eq!((a - a), Vec2::ZERO);
        assert_eq!(a.mirror_x(), Vec2::new(-3.0, 4.0));
    }
}
