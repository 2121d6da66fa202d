//! Legendre series of the kernel 1 - (arccos t/π)^{2H} and the covariance
//! rebuilt from it.

use sfbm::polybasis::BasisSpec;
use sfbm::rkhs::{covariance_series_check, KernelSeries};
use sfbm::singular_coeffs::{fit_decay, kernel_fn, ParityFilter};
use sfbm::sphere_geom::SpherePoint;

fn main() -> sfbm::Result<()> {
    let spec = BasisSpec::new(3)?;
    for h in [0.25, 0.5] {
        let ks = KernelSeries::new(&spec, h, 1000)?;
        let fit = fit_decay(&ks.coeffs().amplitudes, 51, 1000, ParityFilter::Odd)?;
        let worst = (0..=400)
            .map(|k| -1.0 + k as f64 / 200.0)
            .map(|t| (ks.eval(t).unwrap() - kernel_fn(h, t)).abs())
            .fold(0.0f64, f64::max);
        println!(
            "H = {h}: b_0 = {:.6}, b_1 = {:.6}, odd amplitude slope {:.4}, tail {:.3e}, max error {:.3e}",
            ks.coeffs().raw.values[0],
            ks.coeffs().raw.values[1],
            fit.slope,
            ks.tail(),
            worst
        );
        let eta = SpherePoint::new(vec![0.6, 0.8, 0.0])?;
        let zeta = SpherePoint::new(vec![0.0, 0.6, 0.8])?;
        let (direct, series) = covariance_series_check(&ks, &eta, &zeta)?;
        println!("  covariance direct {direct:.8}, from series {series:.8}");
    }
    Ok(())
}
