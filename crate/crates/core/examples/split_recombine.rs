//! Run both branches of the two-wire protocol and print the headline metrics.

use diamag::protocol::{amplification_factor, run_protocol_full, ScenarioConfig};

fn main() -> diamag::Result<()> {
    let cfg = ScenarioConfig::baseline();
    let run = run_protocol_full(&cfg)?;
    let r = &run.report;
    println!(
        "currents            {:.5} A split, {:.5} A side",
        r.i_split, r.i_side
    );
    println!("total time          {:.7} s", r.total_time);
    println!(
        "max separation      {:.2} um at t = {:.6} s",
        r.max_superposition * 1e6,
        r.t_max_superposition
    );
    println!("amplification       {:.1}", amplification_factor(r, &cfg));
    println!(
        "closest approaches  {:.5} um split, {:.5} um side",
        r.closest_approach_split * 1e6,
        r.closest_approach_side * 1e6
    );
    println!("exit angle residual {:.3e} rad", r.exit_angle_residual);
    println!("closure residual    {:.3e} m", r.closure_residual);
    println!("energy drift        {:.3e}", r.energy_drift);
    println!();
    println!("{:>10} {:>12}", "t [ms]", "dx [um]");
    for (t, dx) in run.superposition_series(11) {
        println!("{:>10.3} {:>12.4}", t * 1e3, dx * 1e6);
    }
    Ok(())
}
