//! The cyclic-convolution two-source extractor: a hand-sized example, the
//! exact worst-case error on tiny inputs, and output lengths planned for
//! realistic protocol sizes.

use randamp::extractor::{conv_extract, exact_error, output_length};
use randamp::sources::MdlParams;
use randamp::BitString;

fn main() -> randamp::Result<()> {
    let x = BitString::parse("10110010")?;
    let z = BitString::parse("01100111")?;
    println!("x = {x}, z = {z}, Ext(x, z) = {}", conv_extract(&x, &z, 4)?);

    println!("\nexact worst-case error, N = 4, m = 1");
    for k in 0..=4u32 {
        println!("  k1 = k2 = {k}: {:.4}", exact_error(4, 1, k, k)?);
    }

    let p = MdlParams::uniform();
    println!("\nplanned key length at eta = 0.9, d = 2n");
    for n in [10_000usize, 100_000, 1_000_000, 10_000_000] {
        println!("  n = {n:>9}: m = {}", output_length(n, 0.9, 2 * n, &p, 1e-6, 1e-6));
    }
    Ok(())
}
