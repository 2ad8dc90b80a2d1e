//! One full protocol run: an honest depolarized device fed by a biased i.i.d.
//! source, followed by the abort test and two-source extraction.
//!
//! `cargo run --release --example protocol_run -- 2000000`

use randamp::protocol::{predicted_frequencies, run, DeviceModel, ExtractorConfig};
use randamp::quantum::{optimize_s_tilde, OptimizerConfig};
use randamp::rates::{s_mu_of_freq, EatParams};
use randamp::rng::Streams;
use randamp::sources::{InputDistribution, MdlParams, SourceKind, SourceModel};

fn main() -> randamp::Result<()> {
    let n: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1_000_000);
    let params = MdlParams::uniform();
    let strategy = optimize_s_tilde(&params, &OptimizerConfig::default())?.strategy;
    let device = DeviceModel::honest(strategy, 0.01);
    let inputs = InputDistribution::uniform();
    let source = SourceModel::new(SourceKind::Iid(inputs), params)?;

    let behavior = device.behavior()?.expect("honest devices have a behavior");
    let expected = s_mu_of_freq(&predicted_frequencies(&behavior, &inputs), &params);
    let eat = EatParams::new(n as u128, expected, 1e-3, 1e-6, 1e-6)?;
    let ext = ExtractorConfig { d: None, eps_ext: 1e-6 };

    let out = run(&device, &source, &eat, &ext, &Streams::new(2026))?;
    println!("rounds          {n}");
    println!("expected score  {expected:.6}");
    println!("observed score  {:.6}", out.c_bar);
    println!("aborted         {}", out.aborted);
    println!("eta_opt         {:.5}", out.rate.eta_opt);
    println!("key bits        {}", out.key_length());
    println!("secrecy eps     {:.2e}", out.secrecy_eps);
    if let Some(plan) = &out.plan {
        println!(
            "extractor       N = {}, k1 = {:.0}, k2 = {:.0}",
            plan.n, plan.k1, plan.k2
        );
    }
    Ok(())
}
