//! Fraction of the sphere where the field is negative, against U[0,1].

use sfbm::gaussfield::{build_cov, factorize, ks_distance_uniform, occupation_samples, Hurst};
use sfbm::sphere_geom::{make_grid, GridKind};

fn main() -> sfbm::Result<()> {
    let grid = make_grid(3, GridKind::FibonacciD3, 400, 0)?;
    let cov = factorize(build_cov(Hurst::new(0.5)?, &grid)?)?;
    let occ = occupation_samples(&cov, 500, 42, 1)?;
    let mean = occ.iter().sum::<f64>() / occ.len() as f64;
    println!(
        "mean occupation {mean:.4}, KS distance {:.4} (95% critical value {:.4})",
        ks_distance_uniform(&occ),
        1.36 / (occ.len() as f64).sqrt()
    );
    Ok(())
}
