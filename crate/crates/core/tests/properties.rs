use proptest::prelude::*;
use sfbm::gaussfield::{
    covariance, domination_check, euclidean_fbm_cov, fit_persistence_exponent, Hurst,
    PersistenceCurve, PersistenceEntry,
};
use sfbm::polybasis::{legendre_eval, BasisSpec};
use sfbm::rkhs::{shift_eval, RkhsShiftSpec};
use sfbm::sphere_geom::{geodesic, north_pole, project_ae, unproject_ae, SpherePoint};

fn point(v: Vec<f64>) -> Option<SpherePoint> {
    SpherePoint::new(v).ok()
}

fn half(v: Vec<f64>) -> Option<SpherePoint> {
    let mut v = v;
    v[0] = v[0].abs();
    SpherePoint::new(v).ok()
}

fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn legendre_parity_and_endpoint(d in 2u32..8, n in 0usize..200, t in -1.0f64..=1.0) {
        let s = BasisSpec::new(d).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((legendre_eval(&s, n, -t).unwrap() - sign * legendre_eval(&s, n, t).unwrap()).abs() < 1e-12);
        prop_assert_eq!(legendre_eval(&s, n, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn geodesic_is_a_metric(a in coords(4), b in coords(4), c in coords(4)) {
        let (Some(a), Some(b), Some(c)) = (point(a), point(b), point(c)) else { return Ok(()) };
        let ab = geodesic(&a, &b).unwrap();
        prop_assert!((0.0..=std::f64::consts::PI).contains(&ab));
        prop_assert_eq!(ab, geodesic(&b, &a).unwrap());
        prop_assert!(ab <= geodesic(&a, &c).unwrap() + geodesic(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn projection_preserves_polar_distance_and_inverts(v in coords(5)) {
        let Some(p) = half(v) else { return Ok(()) };
        let o = north_pole(5).unwrap();
        let y = project_ae(&p).unwrap();
        let r = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((r - geodesic(&o, &p).unwrap()).abs() < 1e-12);
        prop_assert!(geodesic(&p, &unproject_ae(&y).unwrap()).unwrap() < 1e-7);
    }

    #[test]
    fn projection_does_not_shrink_distances(a in coords(3), b in coords(3)) {
        let (Some(a), Some(b)) = (half(a), half(b)) else { return Ok(()) };
        let (ya, yb) = (project_ae(&a).unwrap(), project_ae(&b).unwrap());
        let flat = ya.iter().zip(&yb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(geodesic(&a, &b).unwrap() <= flat + 1e-12);
    }

    #[test]
    fn covariance_is_nonnegative(h in 0.01f64..=0.5, a in coords(3), b in coords(3)) {
        let (Some(a), Some(b)) = (point(a), point(b)) else { return Ok(()) };
        prop_assert!(covariance(Hurst::new(h).unwrap(), &a, &b).unwrap() >= -1e-12);
    }

    #[test]
    fn variance_matches_projected_fbm(h in 0.01f64..=0.5, v in coords(4)) {
        let Some(p) = half(v) else { return Ok(()) };
        let y = project_ae(&p).unwrap();
        let sph = covariance(Hurst::new(h).unwrap(), &p, &p).unwrap();
        prop_assert!((sph - euclidean_fbm_cov(h, &y, &y).unwrap()).abs() <= 1e-14 * sph.max(1.0));
    }

    #[test]
    fn spherical_dominates_euclidean(h in 0.01f64..=0.5, a in coords(3), b in coords(3)) {
        let (Some(a), Some(b)) = (half(a), half(b)) else { return Ok(()) };
        let (s, e) = domination_check(Hurst::new(h).unwrap(), &a, &b).unwrap();
        prop_assert!(s >= e - 1e-12);
    }

    #[test]
    fn shift_function_exceeds_one_outside_cap(
        h in 0.01f64..=0.5, alpha in 0.01f64..0.49, delta in 0.001f64..=1.0, u in 0.0f64..=1.0
    ) {
        let s = RkhsShiftSpec::new(h, alpha, delta, 3, 20).unwrap();
        let inner = -1.0 + u * (delta.cos() + 1.0);
        prop_assert!(shift_eval(&s, inner).unwrap() >= 1.0);
    }

    #[test]
    fn exact_power_law_is_recovered(k in 0.5f64..6.0) {
        let entries = [0.2, 0.3, 0.5, 0.7].iter().map(|&e: &f64| PersistenceEntry { eps: e, p_hat: e.powf(k), half_width: 0.0 }).collect();
        let curve = PersistenceCurve { d: 2, hurst: 0.5, grid_kind: "equiangular", grid_size: 8, n_samples: 1000, master_seed: 0, entries };
        prop_assert!((fit_persistence_exponent(&curve).unwrap().slope - k).abs() < 1e-10);
    }
}

#[test]
fn one_minus_cos_lower_bound() {
    for k in 0..=100_000 {
        let x = std::f64::consts::PI * k as f64 / 100_000.0;
        assert!(1.0 - x.cos() >= x * x / 16.0);
    }
}
