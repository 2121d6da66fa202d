//! Persistence probabilities of the field on a circle and the fitted exponent.

use sfbm::gaussfield::{build_cov, factorize, fit_persistence_exponent, persistence_curve, Hurst};
use sfbm::sphere_geom::{make_grid, GridKind};

fn main() -> sfbm::Result<()> {
    let grid = make_grid(2, GridKind::EquiangularD2, 256, 0)?;
    let cov = factorize(build_cov(Hurst::new(0.5)?, &grid)?)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let curve = persistence_curve(&cov, &[0.3, 0.4, 0.5, 0.6, 0.8], 20_000, 7, workers)?;
    for e in &curve.entries {
        println!("ε = {:.2}: p̂ = {:.4} ± {:.4}", e.eps, e.p_hat, e.half_width);
    }
    let fit = fit_persistence_exponent(&curve)?;
    println!(
        "plain power {:.3} ± {:.3} (target 2)",
        fit.slope, fit.stderr
    );
    if let Some(lc) = fit.log_corrected {
        println!(
            "log-corrected power {:.3} ± {:.3}, log term {:.3}",
            lc.slope, lc.stderr, lc.log_coefficient
        );
    }
    Ok(())
}
