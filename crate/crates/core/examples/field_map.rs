//! Print |B|^2 and the diamagnetic acceleration around the baseline wire layout.

use diamag::protocol::ScenarioConfig;

fn main() -> diamag::Result<()> {
    let cfg = ScenarioConfig::baseline();
    let env = cfg.environment(cfg.splitting_current()?, cfg.side_current()?)?;
    println!(
        "{:>10} {:>10} {:>14} {:>14} {:>14}",
        "x [um]", "z [um]", "|B|^2 [T^2]", "a_x [m/s^2]", "a_z [m/s^2]"
    );
    for z in [2.0, 1.0, -1.0, -2.0, -120.0] {
        for x in [-2.0, -1.0, 0.5, 1.0, 2.0, 489.0] {
            let p = diamag::Vec2::new(x * 1e-6, z * 1e-6);
            let b2 = env.b_squared(p)?;
            let a = env.acceleration(p)?;
            println!(
                "{x:>10.1} {z:>10.1} {b2:>14.6e} {:>14.6e} {:>14.6e}",
                a.x, a.z
            );
        }
    }
    Ok(())
}
