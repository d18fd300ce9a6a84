//! Design both currents from geometry alone for several side-wire distances.

use diamag::analytics::{current_density, incident_velocity, ScatteringInput};
use diamag::protocol::{design_currents, run_protocol, ScenarioConfig};

fn main() -> diamag::Result<()> {
    println!(
        "{:>10} {:>10} {:>10} {:>12} {:>12} {:>14}",
        "x_spl[um]", "I_split", "I_side", "residual", "dx_max[um]", "J_split[A/um2]"
    );
    for x_spl in [300e-6, 491e-6, 700e-6] {
        let cfg = ScenarioConfig {
            x_spl,
            z_side: None,
            i_split: None,
            i_side: None,
            side_current_bracket: [5.0, 80.0],
            ..ScenarioConfig::baseline()
        };
        let d = design_currents(&cfg)?;
        let solved = ScenarioConfig {
            i_split: Some(d.i_split),
            i_side: Some(d.i_side),
            ..cfg
        };
        let (_, _, report) = run_protocol(&solved)?;
        let c = solved.effective_constants();
        let s = ScatteringInput::new(
            d.i_split,
            0.5 * solved.delta_x0,
            incident_velocity(solved.z0, &c)?,
        );
        let j = current_density(&s, report.closest_approach_split, &c)?.from_distance;
        println!(
            "{:>10.0} {:>10.5} {:>10.5} {:>12.3e} {:>12.2} {:>14.3}",
            x_spl * 1e6,
            d.i_split,
            d.i_side,
            d.exit_angle_residual,
            report.max_superposition * 1e6,
            j * 1e-12
        );
    }
    Ok(())
}
