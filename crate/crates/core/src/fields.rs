//! Magnetic field of straight wires, the diamagnetic potential, and the
//! mass-independent acceleration field.
//!
//! Each wire carrying current `I` along +y produces `B = mu0 I / (2 pi r) (e_y x e_r)`
//! in the plane. The diamagnetic potential energy per unit mass is
//! `-chi_rho / (2 mu0) |B|^2`, so the acceleration is
//! `chi_rho / (2 mu0) grad|B|^2 - g e_z`; no mass appears anywhere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PhysicalConstants, TrajectoryState, Vec2, Wire};

/// How the fields of several wires combine into the `|B|^2` that drives the particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    /// `|B|^2 = sum_i |B_i|^2`: each wire contributes its own `alpha I_i^2 / r_i^3`
    /// radial push. Current signs are irrelevant.
    #[default]
    PerWire,
    /// `|B|^2 = |sum_i B_i|^2`, including the cross terms between wires.
    Coherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEnvironment {
    pub wires: Vec<Wire>,
    pub gravity_on: bool,
    pub constants: PhysicalConstants,
    #[serde(default)]
    pub model: FieldModel,
}

impl FieldEnvironment {
    pub fn new(wires: Vec<Wire>, gravity_on: bool, constants: PhysicalConstants) -> Result<Self> {
        let env = Self {
            wires,
            gravity_on,
            constants,
            model: FieldModel::default(),
        };
        env.validate()?;
        Ok(env)
    }

    /// Gravity only, no wires.
    pub fn free_fall(constants: PhysicalConstants) -> Self {
        Self {
            wires: Vec::new(),
            gravity_on: true,
            constants,
            model: FieldModel::default(),
        }
    }

    pub fn with_model(mut self, model: FieldModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        for w in &self.wires {
            w.validate()?;
        }
        for (i, a) in self.wires.iter().enumerate() {
            for b in &self.wires[i + 1..] {
                if a.position == b.position {
                    return Err(Error::invalid(format!(
                        "two wires share position ({:e}, {:e})",
                        a.position.x, a.position.z
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance from `p` to each wire, failing inside any exclusion radius.
    fn check_clear(&self, p: Vec2) -> Result<()> {
        for (i, w) in self.wires.iter().enumerate() {
            let r = (p - w.position).norm();
            if r <= w.radius || r == 0.0 || !r.is_finite() {
                return Err(Error::Singularity {
                    wire: i,
                    distance: r,
                    radius: w.radius,
                });
            }
        }
        Ok(())
    }

    /// Field of a single wire at `p` along with its Jacobian
    /// `[[dBx/dx, dBx/dz], [dBz/dx, dBz/dz]]`.
    fn wire_field(&self, w: &Wire, p: Vec2) -> (Vec2, [[f64; 2]; 2]) {
        let c = self.constants.mu0 * w.current / (2.0 * PI);
        let d = p - w.position;
        let r2 = d.norm_squared();
        let r4 = r2 * r2;
        let b = Vec2::new(c * d.z / r2, -c * d.x / r2);
        let jac = [
            [-2.0 * c * d.x * d.z / r4, c * (r2 - 2.0 * d.z * d.z) / r4],
            [-c * (r2 - 2.0 * d.x * d.x) / r4, 2.0 * c * d.x * d.z / r4],
        ];
        (b, jac)
    }

    /// Vector sum of the in-plane wire fields (T).
    pub fn magnetic_field(&self, p: Vec2) -> Result<Vec2> {
        self.check_clear(p)?;
        Ok(self
            .wires
            .iter()
            .fold(Vec2::ZERO, |acc, w| acc + self.wire_field(w, p).0))
    }

    /// The `|B|^2` seen by the particle under the configured [`FieldModel`] (T^2).
    pub fn b_squared(&self, p: Vec2) -> Result<f64> {
        self.check_clear(p)?;
        Ok(match self.model {
            FieldModel::PerWire => self
                .wires
                .iter()
                .map(|w| self.wire_field(w, p).0.norm_squared())
                .sum(),
            FieldModel::Coherent => self
                .wires
                .iter()
                .fold(Vec2::ZERO, |acc, w| acc + self.wire_field(w, p).0)
                .norm_squared(),
        })
    }

    /// Analytic gradient of [`b_squared`](Self::b_squared) (T^2/m).
    pub fn b_squared_gradient(&self, p: Vec2) -> Result<Vec2> {
        self.check_clear(p)?;
        match self.model {
            FieldModel::PerWire => {
                let mut grad = Vec2::ZERO;
                for w in &self.wires {
                    let c = self.constants.mu0 * w.current / (2.0 * PI);
                    let d = p - w.position;
                    let r2 = d.norm_squared();
                    // |B_i|^2 = c^2 / r^2
                    grad += d * (-2.0 * c * c / (r2 * r2));
                }
                Ok(grad)
            }
            FieldModel::Coherent => {
                let mut b = Vec2::ZERO;
                let mut jac = [[0.0; 2]; 2];
                for w in &self.wires {
                    let (bw, jw) = self.wire_field(w, p);
                    b += bw;
                    for (row, jrow) in jac.iter_mut().zip(jw) {
                        row[0] += jrow[0];
                        row[1] += jrow[1];
                    }
                }
                Ok(Vec2::new(
                    2.0 * (b.x * jac[0][0] + b.z * jac[1][0]),
                    2.0 * (b.x * jac[0][1] + b.z * jac[1][1]),
                ))
            }
        }
    }

    /// Acceleration (m/s^2) at `p`. Takes no mass: the diamagnetic force and gravity
    /// both scale with `m`.
    pub fn acceleration(&self, p: Vec2) -> Result<Vec2> {
        let grad = self.b_squared_gradient(p)?;
        let mut a = grad * (-self.constants.potential_per_b_squared());
        if self.gravity_on {
            a.z -= self.constants.g;
        }
        Ok(a)
    }

    /// Potential energy per unit mass `-chi_rho/(2 mu0) |B|^2 + g z` (J/kg).
    pub fn potential_per_mass(&self, p: Vec2) -> Result<f64> {
        let mut u = self.constants.potential_per_b_squared() * self.b_squared(p)?;
        if self.gravity_on {
            u += self.constants.g * p.z;
        }
        Ok(u)
    }

    /// Total mechanical energy per unit mass.
    pub fn energy_per_mass(&self, s: &TrajectoryState) -> Result<f64> {
        Ok(0.5 * s.vel.norm_squared() + self.potential_per_mass(s.pos)?)
    }

    /// The environment reflected through `x = 0`.
    pub fn mirrored(&self) -> Self {
        let mut env = self.clone();
        for w in &mut env.wires {
            w.position = w.position.mirror_x();
        }
        env
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::alpha;

    const I_SPLIT: f64 = 6.04138;

    fn single(current: f64, gravity: bool) -> FieldEnvironment {
        FieldEnvironment::new(
            vec![Wire::new(Vec2::ZERO, current)],
            gravity,
            PhysicalConstants::default(),
        )
        .unwrap()
    }

    fn fd_gradient(env: &FieldEnvironment, p: Vec2, h: f64) -> Vec2 {
        let f = |q: Vec2| env.b_squared(q).unwrap();
        Vec2::new(
            (f(p + Vec2::new(h, 0.0)) - f(p - Vec2::new(h, 0.0))) / (2.0 * h),
            (f(p + Vec2::new(0.0, h)) - f(p - Vec2::new(0.0, h))) / (2.0 * h),
        )
    }

    #[test]
    fn single_wire_field_magnitude() {
        let env = single(I_SPLIT, false);
        let b = env.magnetic_field(Vec2::new(1e-6, 0.0)).unwrap();
        assert!(
            (b.norm() / 1.20828 - 1.0).abs() < 1e-4,
            "|B| = {}",
            b.norm()
        );
    }

    #[test]
    fn zero_current_gives_zero_field() {
        let env = single(0.0, false);
        assert_eq!(
            env.magnetic_field(Vec2::new(1e-6, 2e-6)).unwrap(),
            Vec2::ZERO
        );
    }

    #[test]
    fn midline_x_components_cancel() {
        let env = FieldEnvironment::new(
            vec![
                Wire::new(Vec2::new(0.0, 1e-5), 3.0),
                Wire::new(Vec2::new(0.0, -1e-5), 3.0),
            ],
            false,
            PhysicalConstants::default(),
        )
        .unwrap();
        let b = env.magnetic_field(Vec2::new(4e-6, 0.0)).unwrap();
        assert!(b.x.abs() < 1e-15 * b.norm().max(1.0));
    }

    #[test]
    fn singularity_at_wire_center() {
        let env = single(1.0, false);
        assert!(matches!(
            env.magnetic_field(Vec2::ZERO),
            Err(Error::Singularity { wire: 0, .. })
        ));
        let env = FieldEnvironment::new(
            vec![Wire::new(Vec2::ZERO, 1.0).with_radius(1e-6)],
            false,
            PhysicalConstants::default(),
        )
        .unwrap();
        assert!(env.acceleration(Vec2::new(0.5e-6, 0.0)).is_err());
        assert!(env.acceleration(Vec2::new(2e-6, 0.0)).is_ok());
    }

    #[test]
    fn duplicate_wire_positions_rejected() {
        let r = FieldEnvironment::new(
            vec![Wire::new(Vec2::ZERO, 1.0), Wire::new(Vec2::ZERO, 2.0)],
            false,
            PhysicalConstants::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn single_wire_gradient_closed_form() {
        let env = single(I_SPLIT, false);
        let g = env.b_squared_gradient(Vec2::new(1e-6, 0.0)).unwrap();
        let c = env.constants.mu0 * I_SPLIT / (2.0 * PI);
        let expected = 2.0 * c * c / 1e-18;
        assert!((g.norm() / expected - 1.0).abs() < 1e-12);
        assert!((g.norm() / 2.92e6 - 1.0).abs() < 1e-3, "{:e}", g.norm());
        assert!(g.x < 0.0);
    }

    #[test]
    fn no_wires_zero_gradient() {
        let env = FieldEnvironment::free_fall(PhysicalConstants::default());
        assert_eq!(
            env.b_squared_gradient(Vec2::new(1.0, 2.0)).unwrap(),
            Vec2::ZERO
        );
    }

    #[test]
    fn single_wire_acceleration() {
        let env = single(I_SPLIT, false);
        let a = env.acceleration(Vec2::new(1e-6, 0.0)).unwrap();
        let expected = alpha(&env.constants) * I_SPLIT * I_SPLIT / 1e-18;
        assert!((a.norm() / expected - 1.0).abs() < 1e-12);
        assert!((a.norm() / 7.20e3 - 1.0).abs() < 1e-3, "{:e}", a.norm());
        assert!(a.x > 0.0, "repulsive");
    }

    #[test]
    fn free_fall_acceleration() {
        let env = FieldEnvironment::free_fall(PhysicalConstants::default());
        assert_eq!(
            env.acceleration(Vec2::new(0.3, -2.0)).unwrap(),
            Vec2::new(0.0, -9.8)
        );
    }

    #[test]
    fn zero_wires_no_gravity_is_zero() {
        let env = FieldEnvironment::new(vec![], false, PhysicalConstants::default()).unwrap();
        assert_eq!(env.acceleration(Vec2::new(1.0, 1.0)).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn models_agree_for_single_wire() {
        let env = single(2.5, true);
        let coherent = env.clone().with_model(FieldModel::Coherent);
        let p = Vec2::new(3e-6, -7e-6);
        let a = env.acceleration(p).unwrap();
        let b = coherent.acceleration(p).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn gradient_matches_finite_difference_both_models() {
        let wires = vec![
            Wire::new(Vec2::ZERO, 6.0),
            Wire::new(Vec2::new(491e-6, -122.6e-6), 10.0),
            Wire::new(Vec2::new(-491e-6, -122.6e-6), -10.0),
        ];
        let base = FieldEnvironment::new(wires, true, PhysicalConstants::default()).unwrap();
        for model in [FieldModel::PerWire, FieldModel::Coherent] {
            let env = base.clone().with_model(model);
            for p in [
                Vec2::new(20e-6, 15e-6),
                Vec2::new(300e-6, -50e-6),
                Vec2::new(-470e-6, -110e-6),
            ] {
                let r = env
                    .wires
                    .iter()
                    .map(|w| (p - w.position).norm())
                    .fold(f64::MAX, f64::min);
                let g = env.b_squared_gradient(p).unwrap();
                let fd = fd_gradient(&env, p, r * 1e-5);
                assert!(
                    (g - fd).norm() <= 1e-6 * g.norm(),
                    "{model:?} at {p:?}: {g:?} vs {fd:?}"
                );
            }
        }
    }

    #[test]
    fn energy_includes_gravity_only_when_on() {
        let c = PhysicalConstants::default();
        let mut env = FieldEnvironment::free_fall(c);
        let s = TrajectoryState {
            t: 0.0,
            pos: Vec2::new(0.0, 2.0),
            vel: Vec2::new(1.0, 0.0),
        };
        assert!((env.energy_per_mass(&s).unwrap() - (0.5 + 19.6)).abs() < 1e-12);
        env.gravity_on = false;
        assert_eq!(env.energy_per_mass(&s).unwrap(), 0.5);
    }
}
