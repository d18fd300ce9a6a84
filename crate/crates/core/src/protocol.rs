//! The two-stage split-and-recombine scheme: a splitting wire at the origin
//! turns each falling branch horizontal, and a pair of side wires turns it back
//! toward the z axis.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::analytics::{current_for_angle, incident_velocity};
use crate::dynamics::{
    closest_approach, integrate, Crossing, EventKind, IntegratorOptions, Trajectory, Watcher,
};
use crate::error::{Error, Result};
use crate::fields::{FieldEnvironment, FieldModel};
use crate::roots::{brent, golden_min};
use crate::types::{ParticleSpec, PhysicalConstants, TrajectoryState, Vec2, Wire};

/// Index of the splitting wire in [`ScenarioConfig::environment`].
pub const SPLIT_WIRE: usize = 0;
pub const LEFT_WIRE: usize = 1;
pub const RIGHT_WIRE: usize = 2;

/// Distance from a wire at which the outgoing velocity is read off as the
/// asymptotic direction.
pub const ASYMPTOTE_RADIUS: f64 = 100e-6;

/// Tolerance on the exit angle accepted by [`solve_side_current`] (rad).
pub const EXIT_ANGLE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Left,
    Right,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Left => -1.0,
            Branch::Right => 1.0,
        }
    }

    pub fn side_wire(self) -> usize {
        match self {
            Branch::Left => LEFT_WIRE,
            Branch::Right => RIGHT_WIRE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Release height above the splitting wire (m).
    pub z0: f64,
    /// Initial branch separation (m); each branch starts at `x = +-delta_x0 / 2`.
    pub delta_x0: f64,
    /// `|x|` of the side wires (m).
    pub x_spl: f64,
    /// `z` of the side wires (m). Defaults to where the horizontal
    /// post-splitting parabola reaches `x_spl`: `-x_spl^2 / (4 z0)`.
    pub z_side: Option<f64>,
    /// Splitting-wire current (A); designed for a quarter turn when absent.
    pub i_split: Option<f64>,
    /// Side-wire current (A); solved for a horizontal exit when absent.
    pub i_side: Option<f64>,
    pub side_current_bracket: [f64; 2],
    /// Exclusion radius of every wire (m).
    pub wire_radius: f64,
    /// When false all currents are zero.
    pub wires: bool,
    pub gravity: bool,
    pub field_model: FieldModel,
    // supplied from their own sections of a run configuration
    #[serde(skip)]
    pub particle: ParticleSpec,
    #[serde(skip)]
    pub integrator: IntegratorOptions,
    #[serde(skip)]
    pub constants: PhysicalConstants,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl ScenarioConfig {
    /// Release at `(+-0.5, 490) um`, wires at `(0, 0)` and `(+-491, -122.6) um`
    /// carrying 6.04138 A and 10 A.
    pub fn baseline() -> Self {
        Self {
            z0: 490e-6,
            delta_x0: 1e-6,
            x_spl: 491e-6,
            z_side: Some(-122.6e-6),
            i_split: Some(6.04138),
            i_side: Some(10.0),
            side_current_bracket: [5.0, 20.0],
            wire_radius: 0.0,
            wires: true,
            gravity: true,
            field_model: FieldModel::PerWire,
            particle: ParticleSpec::default(),
            integrator: IntegratorOptions::default(),
            constants: PhysicalConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("z0", self.z0)?;
        positive("delta_x0", self.delta_x0)?;
        positive("x_spl", self.x_spl)?;
        if let Some(z) = self.z_side {
            if !z.is_finite() {
                return Err(Error::invalid("z_side must be finite"));
            }
        }
        for (name, i) in [("i_split", self.i_split), ("i_side", self.i_side)] {
            if matches!(i, Some(v) if !v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        let [lo, hi] = self.side_current_bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "side_current_bracket [{lo}, {hi}] must be increasing"
            )));
        }
        if !(self.wire_radius >= 0.0 && self.wire_radius.is_finite()) {
            return Err(Error::invalid("wire_radius must be >= 0"));
        }
        self.particle.validate()?;
        self.integrator.validate()?;
        self.constants.validate()
    }

    /// Explicit `z_side`, else one impact parameter above the point where the
    /// horizontal post-split ray reaches `x_spl`.
    pub fn resolved_z_side(&self) -> f64 {
        let b = 0.5 * self.delta_x0;
        self.z_side
            .unwrap_or(b - (self.x_spl - b).powi(2) / (4.0 * self.z0))
    }

    /// Constants with the particle's susceptibility applied.
    pub fn effective_constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            chi_rho: self.particle.chi_rho(&self.constants),
            ..self.constants
        }
    }

    pub fn splitting_current(&self) -> Result<f64> {
        match self.i_split {
            Some(i) => Ok(i),
            None => design_splitting_current(self),
        }
    }

    /// Side current, solving for it when not fixed.
    pub fn side_current(&self) -> Result<f64> {
        match self.i_side {
            Some(i) => Ok(i),
            None => {
                let [lo, hi] = self.side_current_bracket;
                solve_side_current(self, (lo, hi))
            }
        }
    }

    /// Copy with both currents fixed to their designed or configured values.
    pub fn with_resolved_currents(&self) -> Result<Self> {
        let i_split = self.splitting_current()?;
        let fixed = Self {
            i_split: Some(i_split),
            ..self.clone()
        };
        let i_side = fixed.side_current()?;
        Ok(Self {
            i_side: Some(i_side),
            ..fixed
        })
    }

    /// Wires ordered as splitting, left, right.
    pub fn environment(&self, i_split: f64, i_side: f64) -> Result<FieldEnvironment> {
        let (i_split, i_side) = if self.wires {
            (i_split, i_side)
        } else {
            (0.0, 0.0)
        };
        let z = self.resolved_z_side();
        let wires = vec![
            Wire::new(Vec2::ZERO, i_split).with_radius(self.wire_radius),
            Wire::new(Vec2::new(-self.x_spl, z), i_side).with_radius(self.wire_radius),
            Wire::new(Vec2::new(self.x_spl, z), i_side).with_radius(self.wire_radius),
        ];
        Ok(
            FieldEnvironment::new(wires, self.gravity, self.effective_constants())?
                .with_model(self.field_model),
        )
    }

    pub fn initial_state(&self, branch: Branch) -> TrajectoryState {
        TrajectoryState::at_rest(Vec2::new(branch.sign() * self.delta_x0 / 2.0, self.z0))
    }

    fn gravity(&self) -> f64 {
        if self.gravity {
            self.constants.g
        } else {
            0.0
        }
    }
}

/// Current giving a quarter-turn at the splitting wire.
pub fn design_splitting_current(cfg: &ScenarioConfig) -> Result<f64> {
    let c = cfg.effective_constants();
    let v_in = incident_velocity(cfg.z0, &c)?;
    current_for_angle(FRAC_PI_2, cfg.delta_x0 / 2.0, v_in, &c)
}

fn branch_watchers(branch: Branch) -> [Watcher; 3] {
    let side = EventKind::ClosestApproach {
        wire: branch.side_wire(),
    };
    [
        Watcher::new(EventKind::ClosestApproach { wire: SPLIT_WIRE }),
        Watcher::new(side),
        Watcher::new(EventKind::PlaneCrossingX { x: 0.0 })
            .terminal()
            .after(side),
    ]
}

/// Integrate one branch until it crosses `x = 0` after passing its side wire.
pub fn run_branch(
    cfg: &ScenarioConfig,
    env: &FieldEnvironment,
    branch: Branch,
) -> Result<Trajectory> {
    let traj = integrate(
        env,
        cfg.initial_state(branch),
        &cfg.integrator,
        &branch_watchers(branch),
    )?;
    let side = EventKind::ClosestApproach {
        wire: branch.side_wire(),
    };
    if traj.first_event(side).is_none() {
        return Err(Error::Topology(format!(
            "{branch:?} branch never passed its side wire within {:e} s",
            cfg.integrator.max_time
        )));
    }
    Ok(traj)
}

fn velocity_without_gravity(s: &TrajectoryState, t_ref: f64, g: f64) -> Vec2 {
    s.vel + Vec2::new(0.0, g * (s.t - t_ref))
}

/// First time after `t_from` at which the distance to `wire` crosses `radius`.
fn radius_crossing(
    traj: &Trajectory,
    wire: Vec2,
    radius: f64,
    t_from: f64,
    direction: Crossing,
) -> Option<f64> {
    traj.find_crossing(t_from, direction, |s| (s.pos - wire).norm() - radius)
}

/// Exit direction after the side-wire encounter, relative to the horizontal.
///
/// The velocity is read where the branch leaves a circle of
/// [`ASYMPTOTE_RADIUS`] around the side wire (or at the end of the trajectory
/// if it never does), with the gravitational change accumulated since closest
/// approach removed. Positive means upward.
pub fn exit_angle(
    traj: &Trajectory,
    cfg: &ScenarioConfig,
    env: &FieldEnvironment,
    branch: Branch,
) -> Result<f64> {
    let wire = branch.side_wire();
    let ca = traj
        .first_event(EventKind::ClosestApproach { wire })
        .ok_or_else(|| Error::Topology("no side-wire closest approach".into()))?;
    let w = env.wires[wire].position;
    let t_exit =
        radius_crossing(traj, w, ASYMPTOTE_RADIUS, ca.t, Crossing::Rising).unwrap_or(traj.end().t);
    let s = traj.state_at(t_exit).expect("crossing inside span");
    let v = velocity_without_gravity(&s, ca.t, cfg.gravity());
    Ok(v.z.atan2(v.x.abs()))
}

/// Deflection at the splitting wire between the incoming and outgoing
/// asymptotes, with gravity removed as in [`exit_angle`].
pub fn splitting_deflection(
    traj: &Trajectory,
    cfg: &ScenarioConfig,
    env: &FieldEnvironment,
) -> Result<f64> {
    let ca = traj
        .first_event(EventKind::ClosestApproach { wire: SPLIT_WIRE })
        .ok_or_else(|| Error::Topology("no splitting-wire closest approach".into()))?;
    let w = env.wires[SPLIT_WIRE].position;
    let missing = || {
        Error::Topology(
            "branch does not cross the asymptote radius around the splitting wire".into(),
        )
    };
    let t_in = radius_crossing(traj, w, ASYMPTOTE_RADIUS, traj.start().t, Crossing::Falling)
        .ok_or_else(missing)?;
    let t_out =
        radius_crossing(traj, w, ASYMPTOTE_RADIUS, ca.t, Crossing::Rising).ok_or_else(missing)?;
    let g = cfg.gravity();
    let v_in = velocity_without_gravity(&traj.state_at(t_in).expect("in span"), ca.t, g);
    let v_out = velocity_without_gravity(&traj.state_at(t_out).expect("in span"), ca.t, g);
    Ok(v_in.cross(v_out).atan2(v_in.dot(v_out)).abs())
}

/// Side current giving a horizontal exit, by Brent's method on the exit
/// angle of the right branch over `bracket`.
pub fn solve_side_current(cfg: &ScenarioConfig, bracket: (f64, f64)) -> Result<f64> {
    cfg.validate()?;
    let i_split = cfg.splitting_current()?;
    let residual = |i_side: f64| -> Result<f64> {
        let env = cfg.environment(i_split, i_side)?;
        let traj = run_branch(cfg, &env, Branch::Right)?;
        exit_angle(&traj, cfg, &env, Branch::Right)
    };
    let root = brent(
        residual,
        bracket.0,
        bracket.1,
        1e-12,
        EXIT_ANGLE_TOL / 100.0,
        100,
    )?;
    if root.f.abs() >= EXIT_ANGLE_TOL {
        return Err(Error::NoConvergence {
            iterations: root.iterations,
            residual: root.f,
        });
    }
    Ok(root.x)
}

/// Metrics of a full two-branch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub max_superposition: f64,
    pub t_max_superposition: f64,
    /// Time at which the right branch returns to `x = 0`, or the end of the
    /// integration when it does not.
    pub total_time: f64,
    pub closest_approach_split: f64,
    pub closest_approach_side: f64,
    pub t_closest_approach_side: f64,
    /// Distance between the branch end points.
    pub closure_residual: f64,
    pub exit_angle_residual: f64,
    pub splitting_deflection: f64,
    pub i_split: f64,
    pub i_side: f64,
    pub z_side: f64,
    /// Largest relative energy drift over both branches.
    pub energy_drift: f64,
    pub closed: bool,
}

/// Both branches of a run plus the environment they were integrated in.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub env: FieldEnvironment,
    pub left: Trajectory,
    pub right: Trajectory,
    pub report: ScenarioReport,
}

impl ProtocolRun {
    /// `x_right - x_left` at `t`, where both branches are defined.
    pub fn superposition_at(&self, t: f64) -> Option<f64> {
        Some(self.right.state_at(t)?.pos.x - self.left.state_at(t)?.pos.x)
    }

    /// `(t, delta_x)` on `n` uniform points over the common span.
    pub fn superposition_series(&self, n: usize) -> Vec<(f64, f64)> {
        let t_end = self.left.end().t.min(self.right.end().t);
        let t0 = self.right.start().t;
        let n = n.max(2);
        (0..n)
            .filter_map(|i| {
                let t = if i == n - 1 {
                    t_end
                } else {
                    t0 + (t_end - t0) * i as f64 / (n - 1) as f64
                };
                self.superposition_at(t).map(|d| (t, d))
            })
            .collect()
    }
}

/// Integrate both branches (in parallel) and extract the report.
pub fn run_protocol(cfg: &ScenarioConfig) -> Result<(Trajectory, Trajectory, ScenarioReport)> {
    let run = run_protocol_full(cfg)?;
    Ok((run.left, run.right, run.report))
}

pub fn run_protocol_full(cfg: &ScenarioConfig) -> Result<ProtocolRun> {
    cfg.validate()?;
    let resolved = cfg.with_resolved_currents()?;
    let (i_split, i_side) = (
        resolved.i_split.unwrap_or(0.0),
        resolved.i_side.unwrap_or(0.0),
    );
    let env = resolved.environment(i_split, i_side)?;
    let (left, right) = rayon::join(
        || run_branch(&resolved, &env, Branch::Left),
        || run_branch(&resolved, &env, Branch::Right),
    );
    let (left, right) = (left?, right?);

    let closest_approach_split = closest_approach(&right, &env.wires[SPLIT_WIRE])?;
    let closest_approach_side = closest_approach(&right, &env.wires[RIGHT_WIRE])?;
    let t_closest_approach_side = right
        .first_event(EventKind::ClosestApproach { wire: RIGHT_WIRE })
        .map(|e| e.t)
        .expect("checked by run_branch");
    let exit_angle_residual = exit_angle(&right, &resolved, &env, Branch::Right)?;
    let splitting_deflection = splitting_deflection(&right, &resolved, &env)?;
    let energy_drift = left
        .max_relative_energy_drift(&env)?
        .max(right.max_relative_energy_drift(&env)?);

    let mut run = ProtocolRun {
        env,
        left,
        right,
        report: ScenarioReport {
            max_superposition: 0.0,
            t_max_superposition: 0.0,
            total_time: 0.0,
            closest_approach_split,
            closest_approach_side,
            t_closest_approach_side,
            closure_residual: 0.0,
            exit_angle_residual,
            splitting_deflection,
            i_split,
            i_side,
            z_side: resolved.resolved_z_side(),
            energy_drift,
            closed: false,
        },
    };

    let series = run.superposition_series(resolved.integrator.output_points);
    let (imax, _) = series
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &(_, d))| {
            if d > best.1 {
                (i, d)
            } else {
                best
            }
        });
    let lo = series[imax.saturating_sub(1)].0;
    let hi = series[(imax + 1).min(series.len() - 1)].0;
    let (t_max, neg) = golden_min(
        |t| -run.superposition_at(t).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        1e-12,
    );

    let report = &mut run.report;
    report.max_superposition = -neg;
    report.t_max_superposition = t_max;
    report.total_time = run.right.duration();
    report.closure_residual = (run.right.end().pos - run.left.end().pos).norm();
    report.closed = run.left.terminal_event().is_some() && run.right.terminal_event().is_some();
    Ok(run)
}

/// `max_superposition / delta_x0`.
pub fn amplification_factor(report: &ScenarioReport, cfg: &ScenarioConfig) -> f64 {
    report.max_superposition / cfg.delta_x0
}

/// Designed currents and the exit angle achieved with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignedCurrents {
    pub i_split: f64,
    pub i_side: f64,
    pub exit_angle_residual: f64,
}

/// Design both currents from the geometry alone, ignoring any fixed values,
/// and re-check the exit angle with an independent integration.
pub fn design_currents(cfg: &ScenarioConfig) -> Result<DesignedCurrents> {
    let i_split = design_splitting_current(cfg)?;
    let free = ScenarioConfig {
        i_split: Some(i_split),
        i_side: None,
        ..cfg.clone()
    };
    let [lo, hi] = cfg.side_current_bracket;
    let i_side = solve_side_current(&free, (lo, hi))?;
    let env = free.environment(i_split, i_side)?;
    let traj = run_branch(&free, &env, Branch::Right)?;
    Ok(DesignedCurrents {
        i_split,
        i_side,
        exit_angle_residual: exit_angle(&traj, &free, &env, Branch::Right)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn splitting_current_design() {
        let cfg = ScenarioConfig::baseline();
        let i = design_splitting_current(&cfg).unwrap();
        assert!(rel(i, 6.04138) < 1e-3);
        let tall = ScenarioConfig {
            z0: 4.0 * cfg.z0,
            ..cfg.clone()
        };
        assert!(rel(design_splitting_current(&tall).unwrap(), 2.0 * i) < 1e-12);
        let wide = ScenarioConfig {
            delta_x0: 2.0 * cfg.delta_x0,
            ..cfg
        };
        assert!(rel(design_splitting_current(&wide).unwrap(), 2.0 * i) < 1e-12);
    }

    #[test]
    fn default_side_height_follows_horizontal_parabola() {
        let cfg = ScenarioConfig {
            z_side: None,
            ..ScenarioConfig::baseline()
        };
        let ray = -490.5e-6 * 490.5e-6 / (4.0 * 490e-6);
        assert!(rel(cfg.resolved_z_side(), ray + 0.5e-6) < 1e-14);
        assert!((cfg.resolved_z_side() + 122.6e-6).abs() < 0.5e-6);
    }

    #[test]
    fn environment_layout() {
        let cfg = ScenarioConfig::baseline();
        let env = cfg.environment(6.0, 10.0).unwrap();
        assert_eq!(env.wires.len(), 3);
        assert_eq!(env.wires[SPLIT_WIRE].position, Vec2::ZERO);
        assert_eq!(env.wires[LEFT_WIRE].position, Vec2::new(-491e-6, -122.6e-6));
        assert_eq!(env.wires[RIGHT_WIRE].position, Vec2::new(491e-6, -122.6e-6));
        let off = ScenarioConfig {
            wires: false,
            ..cfg
        };
        assert!(off
            .environment(6.0, 10.0)
            .unwrap()
            .wires
            .iter()
            .all(|w| w.current == 0.0));
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = ScenarioConfig::baseline();
        for bad in [
            ScenarioConfig {
                z0: 0.0,
                ..base.clone()
            },
            ScenarioConfig {
                delta_x0: -1e-6,
                ..base.clone()
            },
            ScenarioConfig {
                side_current_bracket: [20.0, 5.0],
                ..base.clone()
            },
            ScenarioConfig {
                i_side: Some(f64::NAN),
                ..base.clone()
            },
        ] {
            assert!(matches!(run_protocol(&bad), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn wires_off_keeps_separation() {
        let cfg = ScenarioConfig {
            wires: false,
            integrator: IntegratorOptions {
                max_time: 0.02,
                ..Default::default()
            },
            ..ScenarioConfig::baseline()
        };
        let run = run_protocol_full(&cfg).unwrap();
        for (_, d) in run.superposition_series(200) {
            assert!((d - cfg.delta_x0).abs() < 1e-18);
        }
        assert!((amplification_factor(&run.report, &cfg) - 1.0).abs() < 1e-12);
        assert!(!run.report.closed);
    }

    #[test]
    fn baseline_protocol_metrics() {
        let cfg = ScenarioConfig::baseline();
        let (left, right, r) = run_protocol(&cfg).unwrap();
        assert!(r.closed);
        assert!(rel(r.total_time, 0.0194958) < 5e-3, "{}", r.total_time);
        assert!(
            rel(r.max_superposition, 980e-6) < 0.02,
            "{:e}",
            r.max_superposition
        );
        assert!(rel(r.closest_approach_split, 1.00081e-6) < 0.02);
        assert!(r.max_superposition >= cfg.delta_x0);
        assert!(r.closure_residual.is_finite());
        assert!(
            (r.splitting_deflection - FRAC_PI_2).abs() < 2e-3,
            "{}",
            r.splitting_deflection
        );
        assert!(left.end().pos.x.abs() < 1e-12 && right.end().pos.x.abs() < 1e-12);
    }

    #[test]
    fn branches_are_mirror_images() {
        let cfg = ScenarioConfig::baseline();
        let run = run_protocol_full(&cfg).unwrap();
        let t_end = run.left.end().t.min(run.right.end().t);
        for i in 0..=100 {
            let t = t_end * i as f64 / 100.0;
            let l = run.left.state_at(t).unwrap();
            let r = run.right.state_at(t).unwrap();
            let scale = r.pos.norm().max(1e-6);
            assert!(
                (l.pos.x + r.pos.x).abs() <= 10.0 * cfg.integrator.rel_tol * scale + 1e-12,
                "t={t}"
            );
            assert!((l.pos.z - r.pos.z).abs() <= 10.0 * cfg.integrator.rel_tol * scale + 1e-12);
        }
    }

    #[test]
    fn exit_angle_changes_sign_across_bracket() {
        let cfg = ScenarioConfig::baseline();
        let i_split = cfg.splitting_current().unwrap();
        let angle = |i: f64| {
            let env = cfg.environment(i_split, i).unwrap();
            let traj = run_branch(&cfg, &env, Branch::Right).unwrap();
            exit_angle(&traj, &cfg, &env, Branch::Right).unwrap()
        };
        let (a, b) = (angle(5.0), angle(20.0));
        assert!(a * b < 0.0, "{a} {b}");
        assert!(angle(10.0).abs() < 0.1);
    }

    #[test]
    fn side_current_solve_converges_near_ten_amps() {
        let cfg = ScenarioConfig::baseline();
        let i = solve_side_current(&cfg, (5.0, 20.0)).unwrap();
        assert!((i - 10.0).abs() < 1.0, "{i}");
        let fixed = ScenarioConfig {
            i_side: Some(i),
            ..cfg.clone()
        };
        let env = fixed.environment(6.04138, i).unwrap();
        for branch in [Branch::Left, Branch::Right] {
            let traj = run_branch(&fixed, &env, branch).unwrap();
            assert!(exit_angle(&traj, &fixed, &env, branch).unwrap().abs() < EXIT_ANGLE_TOL);
        }
        assert!(matches!(
            solve_side_current(&cfg, (15.0, 20.0)),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn missing_side_scattering_is_a_topology_error() {
        let cfg = ScenarioConfig {
            integrator: IntegratorOptions {
                max_time: 0.005,
                ..Default::default()
            },
            ..ScenarioConfig::baseline()
        };
        assert!(matches!(run_protocol(&cfg), Err(Error::Topology(_))));
    }
}
