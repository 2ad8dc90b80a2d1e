//! Quantum maxima of the CHSH and Eberhard expressions, found by searching
//! measurement angles with the Bell-operator top eigenvalue as objective.
//!
//! Run with `cargo run --release --example chsh_optimum`.

use randamp::quantum::{born_behavior, chsh_beta, lhv_max, maximize_bell, BellCoefficients, OptimizerConfig};
use randamp::sources::MdlParams;

fn main() -> randamp::Result<()> {
    let cfg = OptimizerConfig::default();
    for (name, coeffs, target) in [
        ("CHSH", BellCoefficients::chsh(), 2.0 * 2f64.sqrt()),
        ("Eberhard", BellCoefficients::eberhard(), (2f64.sqrt() - 1.0) / 2.0),
    ] {
        let opt = maximize_bell(&coeffs, None, &cfg)?;
        let classical = lhv_max(&coeffs, &MdlParams::uniform())?.value;
        println!(
            "{name:<9} quantum {:.12}  (closed form {target:.12})  classical {classical:.3}",
            opt.value
        );
        let angles: Vec<String> = opt
            .strategy
            .measurements()
            .iter()
            .map(|m| format!("{:+.4}", m.angle))
            .collect();
        println!("          angles A0 A1 B0 B1 = {}", angles.join(" "));
    }

    let b = born_behavior(&randamp::quantum::QuantumStrategy::chsh_optimal())?;
    println!("textbook strategy reaches beta = {:.12}", chsh_beta(&b));
    Ok(())
}
