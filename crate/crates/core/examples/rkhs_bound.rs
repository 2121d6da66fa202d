//! The shift function f_{δ,α} and the bound on its squared RKHS norm.

use sfbm::rkhs::{norm_bound_sq, shift_eval, RkhsShiftSpec};

fn main() -> sfbm::Result<()> {
    for delta in [1.0, 0.1, 0.01] {
        let s = RkhsShiftSpec::new(0.5, 0.25, delta, 3, 2001)?;
        let edge = shift_eval(&s, delta.cos())?;
        let b = norm_bound_sq(&s)?;
        println!(
            "δ = {delta:<5} f at cap edge {edge:.4}  bound {:.6e}  δ^(2(H+α))·bound {:.12}  tail {:.4} of sum {:.4}",
            b.bound,
            b.bound * delta.powf(2.0 * (s.hurst + s.alpha)),
            b.tail_estimate,
            b.partial_sum
        );
    }
    Ok(())
}
