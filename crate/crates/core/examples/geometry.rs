//! Azimuthal equidistant projection, comparison of distances and grids.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfbm::gaussfield::{domination_check, Hurst};
use sfbm::sphere_geom::{
    geodesic, make_grid, project_ae, sample_half_sphere, unproject_ae, GridKind,
};

fn main() -> sfbm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = Hurst::new(0.3)?;
    for d in [2usize, 3, 6] {
        let (mut worst_gap, mut worst_dom, mut roundtrip) =
            (f64::NEG_INFINITY, f64::INFINITY, 0.0f64);
        for _ in 0..10_000 {
            let a = sample_half_sphere(d, &mut rng)?;
            let b = sample_half_sphere(d, &mut rng)?;
            let (ya, yb) = (project_ae(&a)?, project_ae(&b)?);
            let flat = ya
                .iter()
                .zip(&yb)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            worst_gap = worst_gap.max(geodesic(&a, &b)? - flat);
            let (sph, euc) = domination_check(h, &a, &b)?;
            worst_dom = worst_dom.min(sph - euc);
            let back = unproject_ae(&ya)?;
            roundtrip = roundtrip.max(geodesic(&a, &back)?);
        }
        println!(
            "d = {d}: max(geodesic - flat) {worst_gap:.2e}, min(spherical - euclidean cov) {worst_dom:.2e}, round trip {roundtrip:.1e}"
        );
    }
    for (d, kind) in [
        (2, GridKind::EquiangularD2),
        (3, GridKind::FibonacciD3),
        (4, GridKind::RandomUniform),
    ] {
        let g = make_grid(d, kind, 500, 1)?;
        println!(
            "{} grid, d = {d}: {} points, min separation {:.4}",
            kind.as_str(),
            g.len(),
            g.min_separation()
        );
    }
    Ok(())
}
