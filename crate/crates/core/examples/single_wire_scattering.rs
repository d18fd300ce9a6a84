//! Scatter a free particle off one wire and compare with the closed-form angle.

use diamag::analytics::{
    closest_approach_distance, k_parameter, scattering_angle, ScatteringInput,
};
use diamag::dynamics::{closest_approach, integrate, IntegratorOptions};
use diamag::types::{PhysicalConstants, TrajectoryState};
use diamag::{FieldEnvironment, Vec2, Wire};

fn main() -> diamag::Result<()> {
    let c = PhysicalConstants::default();
    let (b, v) = (0.5e-6, 0.098);
    println!(
        "{:>8} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "I [A]", "k", "theta_num", "theta_exact", "r_min_num", "r_min_exact"
    );
    for current in [1.0, 3.0, 6.04138, 10.0, 20.0] {
        let s = ScatteringInput::new(current, b, v);
        let wire = Wire::new(Vec2::ZERO, current);
        let env = FieldEnvironment::new(vec![wire], false, c)?;
        let start = 1000.0 * b;
        let init = TrajectoryState {
            t: 0.0,
            pos: Vec2::new(b, start),
            vel: Vec2::new(0.0, -v),
        };
        let opts = IntegratorOptions {
            max_time: 2.0 * start / v,
            ..Default::default()
        };
        let traj = integrate(&env, init, &opts, &[])?;
        let (v0, v1) = (init.vel, traj.end().vel);
        let theta = v0.cross(v1).atan2(v0.dot(v1)).abs();
        println!(
            "{current:>8.3} {:>8.3} {theta:>12.6} {:>12.6} {:>12.4e} {:>12.4e}",
            k_parameter(&s, &c),
            scattering_angle(&s, &c),
            closest_approach(&traj, &wire)?,
            closest_approach_distance(&s, &c),
        );
    }
    Ok(())
}
