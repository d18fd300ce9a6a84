//! Closed-form results: free-fall kinematics, inverse-square scattering,
//! timing of the two-stage scheme, current densities, NV-spin initial splitting
//! and wave-packet width estimates.
//!
//! The scattering results follow from the per-unit-mass potential
//! `V = alpha I^2 / (2 r^2)`, for which the deflection is
//! `theta = (1 - 1/sqrt(k)) pi` with `k = 1 + alpha I^2 / (v^2 b^2)` and the
//! closest approach is `b sqrt(k)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{alpha, PhysicalConstants};

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be >= 0, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {v}")))
    }
}

/// Speed gained falling from rest through height `z0`: `sqrt(2 g z0)`.
pub fn incident_velocity(z0: f64, c: &PhysicalConstants) -> Result<f64> {
    non_negative("z0", z0)?;
    Ok((2.0 * c.g * z0).sqrt())
}

/// Time to fall from rest through height `z0`: `sqrt(2 z0 / g)`.
pub fn fall_time(z0: f64, c: &PhysicalConstants) -> Result<f64> {
    non_negative("z0", z0)?;
    Ok((2.0 * z0 / c.g).sqrt())
}

/// One wire encounter: current (A), impact parameter (m) and incident speed (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringInput {
    pub current: f64,
    pub impact_parameter: f64,
    pub incident_speed: f64,
}

impl ScatteringInput {
    pub fn new(current: f64, impact_parameter: f64, incident_speed: f64) -> Self {
        Self {
            current,
            impact_parameter,
            incident_speed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("current", self.current.abs())?;
        positive("impact parameter", self.impact_parameter)?;
        positive("incident speed", self.incident_speed)
    }
}

/// `k = 1 + alpha I^2 / (v^2 b^2)`; always >= 1.
pub fn k_parameter(s: &ScatteringInput, c: &PhysicalConstants) -> f64 {
    let vb = s.incident_speed * s.impact_parameter;
    1.0 + alpha(c) * s.current * s.current / (vb * vb)
}

/// Deflection angle `(1 - 1/sqrt(k)) pi`, in `[0, pi)`.
pub fn scattering_angle(s: &ScatteringInput, c: &PhysicalConstants) -> f64 {
    angle_from_k(k_parameter(s, c))
}

pub fn angle_from_k(k: f64) -> f64 {
    (1.0 - 1.0 / k.sqrt()) * PI
}

/// Inverse of [`angle_from_k`].
pub fn k_from_angle(theta: f64) -> f64 {
    let s = 1.0 - theta / PI;
    1.0 / (s * s)
}

/// Current that deflects a particle with impact parameter `b` and speed `v_in`
/// by `theta`: `I = v_in b sqrt((k - 1) / alpha)`.
pub fn current_for_angle(theta: f64, b: f64, v_in: f64, c: &PhysicalConstants) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::invalid(format!(
            "scattering angle must lie in (0, pi), got {theta}"
        )));
    }
    positive("impact parameter", b)?;
    non_negative("incident speed", v_in)?;
    let k = k_from_angle(theta);
    Ok(v_in * b * ((k - 1.0) / alpha(c)).sqrt())
}

/// Closest approach `b sqrt(k)` for a pure inverse-square encounter.
pub fn closest_approach_distance(s: &ScatteringInput, c: &PhysicalConstants) -> f64 {
    s.impact_parameter * k_parameter(s, c).sqrt()
}

/// Segment durations of the two-stage scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBreakdown {
    /// Free fall onto the splitting wire.
    pub fall: f64,
    /// Horizontal flight from the splitting wire to a side wire.
    pub transit: f64,
    /// Return from the side wire to the z axis.
    pub closing: f64,
    pub total: f64,
}

/// Total evolution time
/// `sqrt(2 z0/g) (1 + x_spl/(2 z0) + x_spl/sqrt(4 z0^2 + x_spl^2))`
/// along with its three segments.
pub fn total_time(z0: f64, x_spl: f64, c: &PhysicalConstants) -> Result<TimeBreakdown> {
    positive("z0", z0)?;
    positive("x_spl", x_spl)?;
    let fall = fall_time(z0, c)?;
    let v_x = incident_velocity(z0, c)?;
    let transit = x_spl / v_x;
    let gt = c.g * transit;
    let closing = x_spl / (v_x * v_x + gt * gt).sqrt();
    Ok(TimeBreakdown {
        fall,
        transit,
        closing,
        total: fall + transit + closing,
    })
}

/// Current density through a wire whose radius equals the closest approach `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentDensity {
    /// `I / (pi d^2)` (A/m^2).
    pub from_distance: f64,
    /// `(1/b) C v^2 / (pi (v^2 + alpha C^2))` with `C = I / b`, which assumes
    /// `d` is the inverse-square closest approach.
    pub from_scattering: f64,
}

pub fn current_density(
    s: &ScatteringInput,
    d: f64,
    c: &PhysicalConstants,
) -> Result<CurrentDensity> {
    positive("closest distance", d)?;
    s.validate()?;
    let b = s.impact_parameter;
    let v2 = s.incident_speed * s.incident_speed;
    let cc = s.current / b;
    Ok(CurrentDensity {
        from_distance: s.current / (PI * d * d),
        from_scattering: cc * v2 / (b * PI * (v2 + alpha(c) * cc * cc)),
    })
}

/// Current density for a quarter-turn deflection: `sqrt(3/alpha) v_in / (4 pi b)`.
pub fn current_density_right_angle(b: f64, v_in: f64, c: &PhysicalConstants) -> Result<f64> {
    positive("impact parameter", b)?;
    non_negative("incident speed", v_in)?;
    Ok((3.0 / alpha(c)).sqrt() * v_in / (4.0 * b * PI))
}

/// NV-centre spin in a linear field `B = eta x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NVModel {
    pub mass: f64,
    /// Field gradient (T/m).
    pub gradient: f64,
}

impl NVModel {
    pub fn new(mass: f64, gradient: f64) -> Self {
        Self { mass, gradient }
    }
}

/// Diamagnetic trap frequency in the linear field: `sqrt(-chi_rho/mu0) eta`.
pub fn nv_angular_frequency(nv: &NVModel, c: &PhysicalConstants) -> f64 {
    (-c.chi_rho / c.mu0).sqrt() * nv.gradient
}

/// Spin-dependent separation
/// `2 g_s mu_B mu0 / (-chi_rho) / (m eta) (cos(omega t) - 1)`.
pub fn nv_initial_separation(nv: &NVModel, t: f64, c: &PhysicalConstants) -> Result<f64> {
    non_negative("t", t)?;
    positive("mass", nv.mass)?;
    positive("gradient", nv.gradient)?;
    let prefactor = 2.0 * c.g_s * c.mu_b * c.mu0 / (-c.chi_rho) / (nv.mass * nv.gradient);
    Ok(prefactor * ((nv_angular_frequency(nv, c) * t).cos() - 1.0))
}

/// Largest `|D(t)|` for `t` in `[0, t_max]`, returned as `(t, |D|)`.
pub fn nv_max_separation(nv: &NVModel, t_max: f64, c: &PhysicalConstants) -> Result<(f64, f64)> {
    non_negative("t_max", t_max)?;
    let omega = nv_angular_frequency(nv, c);
    let t = if omega * t_max >= PI {
        PI / omega
    } else {
        t_max
    };
    Ok((t, nv_initial_separation(nv, t, c)?.abs()))
}

/// Accelerations `(a_plus, a_minus) = (-g_s mu_B eta / m, +g_s mu_B eta / m)` of
/// the `|+1>` and `|-1>` branches.
pub fn nv_spin_acceleration(nv: &NVModel, c: &PhysicalConstants) -> (f64, f64) {
    let a = c.g_s * c.mu_b * nv.gradient / nv.mass;
    (-a, a)
}

/// Ground-state position and momentum widths of a harmonic trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundWidths {
    pub position: f64,
    pub momentum: f64,
}

/// `dx = sqrt(hbar / (2 m omega))`, `dp = sqrt(hbar m omega / 2)`. `omega` in rad/s.
pub fn trap_ground_widths(m: f64, omega: f64, c: &PhysicalConstants) -> Result<GroundWidths> {
    positive("mass", m)?;
    positive("omega", omega)?;
    Ok(GroundWidths {
        position: (c.hbar / (2.0 * m * omega)).sqrt(),
        momentum: (c.hbar * m * omega / 2.0).sqrt(),
    })
}

/// Gaussian wave packet released from a trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketModel {
    pub mass: f64,
    pub trap_omega: f64,
    pub initial_width: f64,
    pub initial_momentum_width: f64,
}

impl WavePacketModel {
    /// Minimum-uncertainty packet in the trap ground state.
    pub fn from_trap(mass: f64, trap_omega: f64, c: &PhysicalConstants) -> Result<Self> {
        let w = trap_ground_widths(mass, trap_omega, c)?;
        Ok(Self {
            mass,
            trap_omega,
            initial_width: w.position,
            initial_momentum_width: w.momentum,
        })
    }

    pub fn spread_after(&self, t: f64, c: &PhysicalConstants) -> Result<f64> {
        free_spread_width(self.initial_width, self.mass, t, c)
    }
}

/// Free-evolution width `sqrt(dx0^2 + (hbar t / (2 m dx0))^2)`.
pub fn free_spread_width(dx0: f64, m: f64, t: f64, c: &PhysicalConstants) -> Result<f64> {
    positive("initial width", dx0)?;
    positive("mass", m)?;
    non_negative("t", t)?;
    let spread = c.hbar * t / (2.0 * m * dx0);
    Ok(dx0.hypot(spread))
}

/// Velocity change during one encounter, `alpha I^2 / r_ref^3 * (b / v_in)`.
pub fn scattering_velocity_kick(
    s: &ScatteringInput,
    r_ref: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    s.validate()?;
    positive("reference distance", r_ref)?;
    let a_dia = alpha(c) * s.current * s.current / r_ref.powi(3);
    Ok(a_dia * s.impact_parameter / s.incident_speed)
}

/// Default reference distance for [`scattering_velocity_kick`].
pub const KICK_REFERENCE_DISTANCE: f64 = 1e-6;

/// Uncertainty-limited width after a velocity kick: `hbar / (2 m dv)`.
pub fn min_width_after_scattering(m: f64, dv: f64, c: &PhysicalConstants) -> Result<f64> {
    positive("mass", m)?;
    positive("velocity kick", dv)?;
    Ok(c.hbar / (2.0 * m * dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I1: f64 = 6.04138;
    const B: f64 = 0.5e-6;
    const Z0: f64 = 490e-6;

    fn c() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn incident_velocity_values() {
        let c = c();
        assert!(rel(incident_velocity(Z0, &c).unwrap(), 0.098) < 1e-12);
        assert_eq!(incident_velocity(0.0, &c).unwrap(), 0.0);
        assert!(rel(incident_velocity(1.0 / (2.0 * c.g), &c).unwrap(), 1.0) < 1e-15);
        assert!(incident_velocity(-1.0, &c).is_err());
    }

    #[test]
    fn fall_time_values() {
        let c = c();
        assert!(rel(fall_time(Z0, &c).unwrap(), 0.01) < 1e-14);
        assert_eq!(fall_time(0.0, &c).unwrap(), 0.0);
        assert!(fall_time(-1e-6, &c).is_err());
    }

    #[test]
    fn k_parameter_values() {
        let c = c();
        let v = incident_velocity(Z0, &c).unwrap();
        let k = k_parameter(&ScatteringInput::new(I1, B, v), &c);
        assert!((k - 4.0).abs() < 1e-3, "k = {k}");
        assert_eq!(k_parameter(&ScatteringInput::new(0.0, B, v), &c), 1.0);
        let k2 = k_parameter(&ScatteringInput::new(I1, 2.0 * B, v), &c);
        assert!(rel(k2 - 1.0, (k - 1.0) / 4.0) < 1e-12);
    }

    #[test]
    fn scattering_angle_values() {
        let c = c();
        let v = incident_velocity(Z0, &c).unwrap();
        let th = scattering_angle(&ScatteringInput::new(I1, B, v), &c);
        assert!((th - PI / 2.0).abs() < 1e-3);
        assert_eq!(scattering_angle(&ScatteringInput::new(0.0, B, v), &c), 0.0);
        assert!((angle_from_k(16.0) - 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn splitting_current_design() {
        let c = c();
        let v = incident_velocity(Z0, &c).unwrap();
        let i = current_for_angle(PI / 2.0, B, v, &c).unwrap();
        assert!(rel(i, 6.04138) < 1e-3, "I = {i}");
        assert!(current_for_angle(1e-12, B, v, &c).unwrap() < 1e-5);
        assert!(current_for_angle(0.0, B, v, &c).is_err());
        assert!(current_for_angle(PI, B, v, &c).is_err());
    }

    #[test]
    fn total_time_values() {
        let c = c();
        let t = total_time(Z0, 491e-6, &c).unwrap();
        assert!(rel(t.total, 0.0194742) < 5e-3, "{}", t.total);
        assert!((t.fall + t.transit + t.closing - t.total).abs() < 1e-18);
        let lim = total_time(Z0, 1e-12, &c).unwrap();
        assert!(rel(lim.total, fall_time(Z0, &c).unwrap()) < 1e-8);
        assert!(total_time(0.0, 1e-4, &c).is_err());
        assert!(total_time(Z0, 0.0, &c).is_err());
        let xs = [1e-5, 1e-4, 5e-4, 1e-3, 5e-3];
        let ts: Vec<f64> = xs
            .iter()
            .map(|&x| total_time(Z0, x, &c).unwrap().total)
            .collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn current_density_values() {
        let c = c();
        let v = incident_velocity(Z0, &c).unwrap();
        let side = current_density(&ScatteringInput::new(10.0, B, v), 1.32289e-6, &c).unwrap();
        assert!(rel(side.from_distance * 1e-12, 1.8) < 0.05);
        let split = current_density(&ScatteringInput::new(I1, B, v), 1.00081e-6, &c).unwrap();
        assert!(rel(split.from_distance * 1e-12, 1.9) < 0.05);
        let far = current_density(&ScatteringInput::new(I1, B, v), 1e3, &c).unwrap();
        assert!(far.from_distance < 1e-5);
    }

    #[test]
    fn density_forms_agree_at_inverse_square_closest_approach() {
        let c = c();
        let s = ScatteringInput::new(I1, B, 0.098);
        let d = closest_approach_distance(&s, &c);
        let rho = current_density(&s, d, &c).unwrap();
        assert!(rel(rho.from_distance, rho.from_scattering) < 1e-12);
        // and match the quarter-turn closed form
        let rt = current_density_right_angle(B, 0.098, &c).unwrap();
        assert!(rel(rho.from_distance, rt) < 1e-4);
    }

    #[test]
    fn right_angle_density() {
        let c = c();
        let r = current_density_right_angle(B, 0.098, &c).unwrap();
        assert!(rel(r, 1.92e12) < 1e-2, "{r:e}");
        assert_eq!(current_density_right_angle(B, 0.0, &c).unwrap(), 0.0);
        let r2 = current_density_right_angle(2.0 * B, 0.098, &c).unwrap();
        assert!(rel(r2, r / 2.0) < 1e-14);
    }

    #[test]
    fn nv_frequency() {
        let c = c();
        let w = nv_angular_frequency(&NVModel::new(1e-15, 45.0), &c);
        assert!(rel(w, 3.16) < 1e-2, "{w}");
        assert_eq!(nv_angular_frequency(&NVModel::new(1e-15, 0.0), &c), 0.0);
        let w2 = nv_angular_frequency(&NVModel::new(1e-15, 90.0), &c);
        assert!(rel(w2, 2.0 * w) < 1e-15);
    }

    #[test]
    fn nv_separation_properties() {
        let c = c();
        let nv = NVModel::new(1e-15, 45.0);
        assert_eq!(nv_initial_separation(&nv, 0.0, &c).unwrap(), 0.0);
        let a = nv_initial_separation(&nv, 0.3, &c).unwrap();
        let b = nv_initial_separation(&NVModel::new(2e-15, 22.5), 0.3, &c).unwrap();
        // the frequency changes with eta, so only the prefactor is shared: compare at omega t fixed
        let nv2 = NVModel::new(2e-15, 22.5);
        let t2 = 0.3 * nv_angular_frequency(&nv, &c) / nv_angular_frequency(&nv2, &c);
        let b_same_phase = nv_initial_separation(&nv2, t2, &c).unwrap();
        assert!(rel(a, b_same_phase) < 1e-12);
        assert!(b.is_finite());
        let pref = 2.0 * c.g_s * c.mu_b * c.mu0 / (-c.chi_rho) / (1e-15 * 45.0);
        for i in 0..50 {
            let d = nv_initial_separation(&nv, i as f64 * 0.1, &c).unwrap();
            assert!(d.abs() <= 2.0 * pref * (1.0 + 1e-12));
        }
    }

    #[test]
    fn nv_spin_acceleration_values() {
        let c = c();
        let (p, m) = nv_spin_acceleration(&NVModel::new(1e-15, 45.0), &c);
        assert!(rel(m, 8.35e-7) < 1e-2, "{m:e}");
        assert_eq!(p, -m);
        assert_eq!(nv_spin_acceleration(&NVModel::new(1e-15, 0.0), &c).1, 0.0);
        let (_, m2) = nv_spin_acceleration(&NVModel::new(2e-15, 45.0), &c);
        assert!(rel(m2, m / 2.0) < 1e-15);
    }

    #[test]
    fn trap_widths() {
        let c = c();
        let w = trap_ground_widths(1e-15, 100.0, &c).unwrap();
        assert!(rel(w.position, 2e-11) < 0.2, "{:e}", w.position);
        assert!(rel(w.momentum, 2.3e-24) < 0.01, "{:e}", w.momentum);
        assert!(rel(w.position * w.momentum, c.hbar / 2.0) < 1e-14);
        let w4 = trap_ground_widths(4e-15, 100.0, &c).unwrap();
        assert!(rel(w4.position, w.position / 2.0) < 1e-14);
    }

    #[test]
    fn free_spread_values() {
        let c = c();
        let w = free_spread_width(2e-11, 1e-15, 0.02, &c).unwrap();
        assert!(rel(w, 5.6e-11) < 0.02, "{w:e}");
        assert_eq!(free_spread_width(2e-11, 1e-15, 0.0, &c).unwrap(), 2e-11);
        let ws: Vec<f64> = (0..10)
            .map(|i| free_spread_width(2e-11, 1e-15, i as f64 * 0.01, &c).unwrap())
            .collect();
        assert!(ws.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn velocity_kick_values() {
        let c = c();
        let s = ScatteringInput::new(I1, B, 0.098);
        let dv = scattering_velocity_kick(&s, KICK_REFERENCE_DISTANCE, &c).unwrap();
        assert!(rel(dv, 3.6e-2) < 0.05, "{dv}");
        let zero =
            scattering_velocity_kick(&ScatteringInput::new(0.0, B, 0.098), 1e-6, &c).unwrap();
        assert_eq!(zero, 0.0);
        let dv2 =
            scattering_velocity_kick(&ScatteringInput::new(2.0 * I1, B, 0.098), 1e-6, &c).unwrap();
        assert!(rel(dv2, 4.0 * dv) < 1e-14);
    }

    #[test]
    fn min_width_values() {
        let c = c();
        assert!(
            rel(
                min_width_after_scattering(1e-15, 3.6e-2, &c).unwrap(),
                1.5e-18
            ) < 0.05
        );
        assert!(
            rel(
                min_width_after_scattering(1e-22, 3.6e-2, &c).unwrap(),
                1.5e-11
            ) < 0.05
        );
        let a = min_width_after_scattering(1e-15, 0.03, &c).unwrap();
        let b = min_width_after_scattering(2e-15, 0.03, &c).unwrap();
        assert!(rel(b, a / 2.0) < 1e-14);
    }

    proptest! {
        #[test]
        fn angle_current_round_trip(theta in 1e-3f64..(PI - 1e-3), b in 1e-7f64..1e-5, v in 1e-3f64..1.0) {
            let c = PhysicalConstants::default();
            let i = current_for_angle(theta, b, v, &c).unwrap();
            let back = scattering_angle(&ScatteringInput::new(i, b, v), &c);
            prop_assert!((back - theta).abs() < 1e-12, "{} vs {}", back, theta);
        }

        #[test]
        fn fall_kinematics_identity(z0 in 0.0f64..1.0) {
            let c = PhysicalConstants::default();
            let lhs = c.g * fall_time(z0, &c).unwrap();
            let rhs = incident_velocity(z0, &c).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.max(1e-300));
        }

        #[test]
        fn ground_state_saturates_uncertainty(m in 1e-22f64..1e-12, w in 1e-1f64..1e5) {
            let c = PhysicalConstants::default();
            let g = trap_ground_widths(m, w, &c).unwrap();
            prop_assert!((g.position * g.momentum / (c.hbar / 2.0) - 1.0).abs() < 1e-12);
        }
    }
}
