//! Current-noise tolerance: closed-form limits and a small Monte Carlo.

use diamag::protocol::ScenarioConfig;
use diamag::sensitivity::{
    current_limit, limit_curve, monte_carlo_deviation, second_deviation, FluctuationSpec,
    OffsetDistribution, SegmentedPath,
};

fn main() -> diamag::Result<()> {
    for length in [50e-6, 500e-6] {
        let path = SegmentedPath::two_stage(length, 0.5e-6)?;
        println!(
            "L = {:>4.0} um: |dI/I| <= {:.3e} for a 2e-11 m offset",
            length * 1e6,
            current_limit(2e-11, &path)?
        );
    }
    let path = SegmentedPath::two_stage(500e-6, 0.5e-6)?;
    for p in limit_curve(&path, (1e-13, 1e-9), 5)? {
        println!("  offset {:.1e} m -> {:.3e}", p.deviation, p.current_limit);
    }

    let cfg = ScenarioConfig::baseline();
    for distribution in [
        OffsetDistribution::Fixed,
        OffsetDistribution::Uniform,
        OffsetDistribution::Gaussian,
    ] {
        let spec = FluctuationSpec {
            relative_sigma: 1e-6,
            distribution,
            samples: 16,
            seed: 1,
        };
        let mc = monte_carlo_deviation(&cfg, &spec)?;
        println!(
            "{distribution:?}: mean {:+.3e} m, sd {:.3e} m, mean |dz| {:.3e} m",
            mc.mean, mc.sd, mc.mean_abs
        );
    }
    println!(
        "closed form for +1e-6: {:+.3e} m",
        second_deviation(1e-6, &path)?
    );
    Ok(())
}
