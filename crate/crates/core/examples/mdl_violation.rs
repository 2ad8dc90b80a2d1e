//! The MDL functional for several source boxes: quantum maximum of the
//! source-independent form against the exact classical maximum of the
//! joint form, which is never positive.

use randamp::quantum::{born_behavior, lhv_max_s_mu, optimize_s_tilde, s_mu, OptimizerConfig};
use randamp::rates::critical_violation;
use randamp::sources::{InputDistribution, MdlParams};

fn main() -> randamp::Result<()> {
    let cfg = OptimizerConfig::default();
    println!(
        "{:>7} {:>7} {:>12} {:>12} {:>12} {:>10}",
        "mu_min", "mu_max", "S~ quantum", "S_mu(unif)", "critical", "LHV max"
    );
    for (lo, hi) in [(0.25, 0.25), (0.21, 0.371), (0.167, 0.5), (0.124, 0.629), (0.083, 0.75)] {
        let p = MdlParams::new(lo, hi)?;
        let opt = optimize_s_tilde(&p, &cfg)?;
        // The optimal behavior evaluated under the uniform input distribution.
        let joint = s_mu(&born_behavior(&opt.strategy)?, &InputDistribution::uniform(), &p)?;
        println!(
            "{lo:>7} {hi:>7} {:>12.7} {joint:>12.7} {:>12.7} {:>10.1e}",
            opt.value,
            critical_violation(&p),
            lhv_max_s_mu(&p)?
        );
    }
    Ok(())
}
