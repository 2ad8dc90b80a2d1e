//! Finite-size entropy rate against the expected violation, for two round
//! counts. Prints CSV suitable for plotting.

use randamp::rates::{critical_violation, eta_opt, EatParams};
use randamp::sources::MdlParams;

fn main() -> randamp::Result<()> {
    println!("mu_min,mu_max,n,s_exp,eta_opt");
    for (lo, hi) in [(0.25, 0.25), (0.21, 0.371), (0.124, 0.629)] {
        let p = MdlParams::new(lo, hi)?;
        let top = critical_violation(&p);
        for n in [500_000_000u128, 100_000_000_000] {
            for k in 1..=20 {
                let s_exp = top * k as f64 / 20.0;
                if s_exp <= 1e-4 {
                    continue;
                }
                let eat = EatParams::new(n, s_exp, 1e-4, 1e-7, 1e-7)?;
                println!("{lo},{hi},{n},{s_exp:.6},{:.6}", eta_opt(&eat, &p)?.eta_opt);
            }
        }
    }
    Ok(())
}
