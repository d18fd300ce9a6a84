//! Closed-form companions: NV spin separation and wave-packet widths.

use diamag::analytics::{
    free_spread_width, min_width_after_scattering, nv_angular_frequency, nv_initial_separation,
    nv_max_separation, scattering_velocity_kick, trap_ground_widths, NVModel, ScatteringInput,
    KICK_REFERENCE_DISTANCE,
};
use diamag::types::PhysicalConstants;

fn main() -> diamag::Result<()> {
    let c = PhysicalConstants::default();
    let nv = NVModel::new(1e-15, 45.0);
    println!(
        "NV trap frequency {:.4} rad/s",
        nv_angular_frequency(&nv, &c)
    );
    for t in [0.1, 0.2, 0.3, 0.4, 0.5] {
        println!(
            "  t = {t:.1} s  D = {:+.4} um",
            nv_initial_separation(&nv, t, &c)? * 1e6
        );
    }
    let (t, d) = nv_max_separation(&nv, 0.5, &c)?;
    println!("  max {:.4} um at {t:.3} s", d * 1e6);

    let ground = trap_ground_widths(1e-15, 100.0, &c)?;
    println!(
        "ground state in a 100 rad/s trap: dx {:.3e} m, dp {:.3e} kg m/s",
        ground.position, ground.momentum
    );
    for t in [0.0, 0.01, 0.02] {
        println!(
            "  free spread after {t:.2} s: {:.4e} m",
            free_spread_width(2e-11, 1e-15, t, &c)?
        );
    }
    let kick = scattering_velocity_kick(
        &ScatteringInput::new(6.04138, 0.5e-6, 0.098),
        KICK_REFERENCE_DISTANCE,
        &c,
    )?;
    println!("velocity kick {kick:.4e} m/s");
    for m in [1e-15, 1e-22] {
        println!(
            "  min width for {m:.0e} kg: {:.4e} m",
            min_width_after_scattering(m, kick, &c)?
        );
    }
    Ok(())
}
