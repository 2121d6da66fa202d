//! Positive correlation of the events {max < ε} on two hemispheres.

use sfbm::gaussfield::{build_cov, factorize, hemispheric_split, slepian_product_check, Hurst};
use sfbm::sphere_geom::{make_grid, GridKind};

fn main() -> sfbm::Result<()> {
    let grid = make_grid(3, GridKind::FibonacciD3, 300, 0)?;
    let cov = factorize(build_cov(Hurst::new(0.5)?, &grid)?)?;
    let (a, b) = hemispheric_split(&grid);
    for eps in [0.5, 1.0] {
        let r = slepian_product_check(&cov, &a, &b, eps, 20_000, 5, 1)?;
        println!(
            "ε = {eps}: P(E) = {:.4} >= P(A)P(B) = {:.4}·{:.4} = {:.4}, margin {:.4}",
            r.p_full,
            r.p_a,
            r.p_b,
            r.p_a * r.p_b,
            r.margin
        );
    }
    Ok(())
}
