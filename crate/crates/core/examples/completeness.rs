//! Monte-Carlo abort rate of an honest device against the Hoeffding bound,
//! for a few estimation slacks.

use randamp::protocol::{honest_abort_experiment, predicted_frequencies, DeviceModel};
use randamp::quantum::{optimize_s_tilde, OptimizerConfig};
use randamp::rates::{completeness_bound, s_mu_of_freq, EatParams};
use randamp::sources::{InputDistribution, MdlParams};

fn main() -> randamp::Result<()> {
    let p = MdlParams::uniform();
    let inputs = InputDistribution::uniform();
    let device = DeviceModel::honest(optimize_s_tilde(&p, &OptimizerConfig::default())?.strategy, 0.0);
    let s_exp = s_mu_of_freq(&predicted_frequencies(&device.behavior()?.unwrap(), &inputs), &p);
    let n = 10_000u64;

    println!("delta      bound      observed   (2000 trials of {n} rounds)");
    for delta in [0.001, 0.002, 0.003, 0.005] {
        let eat = EatParams::new(n as u128, s_exp, delta, 1e-7, 1e-7)?;
        let exp = honest_abort_experiment(&device, &inputs, &p, &eat, 2_000, 5)?;
        println!(
            "{delta:<10} {:<10.4} {:.4}",
            completeness_bound(n, delta, &p).min(1.0),
            exp.abort_rate
        );
    }
    Ok(())
}
