//! Largest single-round entropy certifiable along the family
//! μ_max = 1 − 3μ_min, from the uniform source towards weaker ones.

use randamp::quantum::{max_entropy, OptimizerConfig};
use randamp::sources::MdlParams;

fn main() -> randamp::Result<()> {
    let cfg = OptimizerConfig {
        restarts: 16,
        ..OptimizerConfig::default()
    };
    println!("mu_min   S~*          H_min");
    for i in 0..=12 {
        let mu_min = 0.25 - 0.005 * i as f64;
        let (s, h) = max_entropy(&MdlParams::new(mu_min, 1.0 - 3.0 * mu_min)?, &cfg)?;
        println!("{mu_min:.3}    {s:.8}   {h:.5}");
    }
    Ok(())
}
