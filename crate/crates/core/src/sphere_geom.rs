//! Points on the unit sphere `S_{d-1} ⊂ R^d`, geodesics, caps, the azimuthal
//! equidistant projection around the north pole, grids and surface Monte Carlo.
//!
//! The north pole `O` is the first standard basis vector.

use crate::error::{domain, Error, Result};
use crate::polybasis::sphere_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::io::Write;

/// A unit vector in `R^d`, `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(domain(format!(
                "sphere points need d >= 2 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(v) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: *v,
                location: "sphere point coordinate".into(),
            });
        }
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(domain("cannot normalize the zero vector"));
        }
        Ok(Self {
            coords: coords.into_iter().map(|x| x / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn inner(&self, other: &SpherePoint) -> Result<f64> {
        same_dim(self, other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }
}

fn same_dim(a: &SpherePoint, b: &SpherePoint) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// `O = e_1 ∈ R^d`.
pub fn north_pole(d: usize) -> Result<SpherePoint> {
    let mut c = vec![0.0; d];
    if let Some(first) = c.first_mut() {
        *first = 1.0;
    }
    SpherePoint::new(c)
}

/// `2 atan2(‖a-b‖, ‖a+b‖)` for unit vectors `a`, `b`.
fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Great-circle distance `arccos⟨η, ζ⟩ ∈ [0, π]`.
pub fn geodesic(eta: &SpherePoint, zeta: &SpherePoint) -> Result<f64> {
    same_dim(eta, zeta)?;
    Ok(angle_between(&eta.coords, &zeta.coords))
}

/// `d(η, O)`, bitwise equal to `geodesic(η, O)`.
pub fn polar_angle(eta: &SpherePoint) -> f64 {
    let c = &eta.coords;
    let (mut diff, mut sum) = ((c[0] - 1.0) * (c[0] - 1.0), (c[0] + 1.0) * (c[0] + 1.0));
    for x in &c[1..] {
        diff += x * x;
        sum += x * x;
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Geodesic-ball membership `d(η, center) <= radius`.
pub fn in_cap(eta: &SpherePoint, center: &SpherePoint, radius: f64) -> Result<bool> {
    Ok(geodesic(eta, center)? <= radius)
}

/// Membership in the closed half-sphere `H(O)`.
pub fn in_half_sphere(eta: &SpherePoint) -> bool {
    polar_angle(eta) <= PI / 2.0
}

const POLE_RADIUS: f64 = 1e-9;

/// Azimuthal equidistant projection `Ψ: H(O) → R^{d-1}`, `‖Ψ(η)‖ = d(η, O)`.
pub fn project_ae(eta: &SpherePoint) -> Result<Vec<f64>> {
    let r = polar_angle(eta);
    if r > PI / 2.0 {
        return Err(domain(format!(
            "azimuthal projection needs a point in the closed half-sphere around O, got d(η,O) = {r}"
        )));
    }
    let tail = &eta.coords[1..];
    if r < POLE_RADIUS {
        return Ok(vec![0.0; tail.len()]);
    }
    let norm = tail.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(tail.iter().map(|x| r * x / norm).collect())
}

/// Inverse of [`project_ae`]: `cos(r) O + sin(r) v` with `r = ‖y‖`, `v = y/r`.
pub fn unproject_ae(y: &[f64]) -> Result<SpherePoint> {
    let r = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r > PI / 2.0 {
        return Err(domain(format!("‖y‖ = {r} exceeds π/2")));
    }
    let mut c = Vec::with_capacity(y.len() + 1);
    c.push(r.cos());
    if r == 0.0 {
        c.extend(std::iter::repeat_n(0.0, y.len()));
    } else {
        let s = r.sin() / r;
        c.extend(y.iter().map(|x| x * s));
    }
    SpherePoint::new(c)
}

/// Uniform point on `S_{d-1}` from a normalized Gaussian vector.
pub fn sample_uniform<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<SpherePoint> {
    if d < 2 {
        return Err(domain(format!("sampling needs d >= 2, got {d}")));
    }
    loop {
        let c: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if c.iter().any(|&x| x != 0.0) {
            return SpherePoint::new(c);
        }
    }
}

/// Uniform point on the closed half-sphere `H(O)`.
pub fn sample_half_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<SpherePoint> {
    let p = sample_uniform(d, rng)?;
    Ok(if p.coords[0] < 0.0 { p.antipode() } else { p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    RandomUniform,
    FibonacciD3,
    EquiangularD2,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::RandomUniform => "random",
            GridKind::FibonacciD3 => "fibonacci",
            GridKind::EquiangularD2 => "equiangular",
        }
    }
}

impl std::str::FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_uniform" => Ok(GridKind::RandomUniform),
            "fibonacci" | "fibonacci_d3" => Ok(GridKind::FibonacciD3),
            "equiangular" | "equiangular_d2" => Ok(GridKind::EquiangularD2),
            _ => Err(Error::Validation(format!(
                "unknown grid kind {s:?} (random|fibonacci|equiangular)"
            ))),
        }
    }
}

/// Weighted point set on `S_{d-1}`; weights sum to the sphere area.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub d: usize,
    pub points: Vec<SpherePoint>,
    pub weights: Vec<f64>,
    pub kind: GridKind,
}

/// RNG stream reserved for random grid construction.
const GRID_STREAM: u64 = u64::MAX;

/// Builds a grid of `m` points. `seed` is used only by random grids.
pub fn make_grid(d: usize, kind: GridKind, m: usize, seed: u64) -> Result<SphereGrid> {
    if m < 2 {
        return Err(domain(format!("grid resolution must be >= 2, got {m}")));
    }
    let points = match kind {
        GridKind::EquiangularD2 => {
            if d != 2 {
                return Err(domain(format!(
                    "equiangular grids are defined for d = 2 only, got d = {d}"
                )));
            }
            (0..m)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / m as f64;
                    SpherePoint::new(vec![a.cos(), a.sin()])
                })
                .collect::<Result<Vec<_>>>()?
        }
        GridKind::FibonacciD3 => {
            if d != 3 {
                return Err(domain(format!(
                    "Fibonacci grids are defined for d = 3 only, got d = {d}"
                )));
            }
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = 1.0 - (2 * i + 1) as f64 / m as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    SpherePoint::new(vec![z, rho * phi.cos(), rho * phi.sin()])
                })
                .collect::<Result<Vec<_>>>()?
        }
        GridKind::RandomUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(GRID_STREAM);
            (0..m)
                .map(|_| sample_uniform(d, &mut rng))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let area = sphere_area(d as u32)?;
    Ok(SphereGrid {
        d,
        points,
        weights: vec![area / m as f64; m],
        kind,
    })
}

impl SphereGrid {
    /// A grid from explicit points with equal weights.
    pub fn from_points(points: Vec<SpherePoint>) -> Result<Self> {
        let d = points
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| domain("grid needs at least one point"))?;
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
        let area = sphere_area(d as u32)?;
        let m = points.len();
        Ok(Self {
            d,
            points,
            weights: vec![area / m as f64; m],
            kind: GridKind::RandomUniform,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimum pairwise geodesic distance.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(angle_between(
                    &self.points[i].coords,
                    &self.points[j].coords,
                ));
            }
        }
        best
    }

    /// CSV with one row per point: `x0,…,x{d-1},weight`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.d).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        wr.write_record(&header)?;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let mut row: Vec<String> = p
                .coords
                .iter()
                .map(|&x| crate::polybasis::format_real(x))
                .collect();
            row.push(crate::polybasis::format_real(*w));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `|S_{d-1}| · mean f(ξ)` over uniform samples, with its standard error.
pub fn surface_mc_integral<F, R>(
    f: F,
    d: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)>
where
    F: Fn(&SpherePoint) -> f64,
    R: Rng + ?Sized,
{
    if n_samples < 100 {
        return Err(domain(format!(
            "surface Monte Carlo needs at least 100 samples, got {n_samples}"
        )));
    }
    let area = sphere_area(d as u32)?;
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..n_samples {
        let p = sample_uniform(d, rng)?;
        let v = f(&p);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                location: format!("sample point {:?}", p.coords),
            });
        }
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n_samples - 1) as f64;
    Ok((area * mean, area * (var / n_samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polybasis::{
        legendre_eval, product_integral_series, BasisSpec, CoeffSeries, CoeffSource,
    };

    fn pt(c: &[f64]) -> SpherePoint {
        SpherePoint::new(c.to_vec()).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn construction_normalizes() {
        let p = pt(&[3.0, 4.0]);
        assert!((p.coords()[0] - 0.6).abs() < 1e-15);
        assert!(SpherePoint::new(vec![0.0, 0.0]).is_err());
        assert!(SpherePoint::new(vec![1.0]).is_err());
        assert!(SpherePoint::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let a = pt(&[0.3, -0.2, 0.9]);
        assert_eq!(geodesic(&a, &a).unwrap(), 0.0);
        assert!((geodesic(&a, &a.antipode()).unwrap() - PI).abs() < 1e-15);
        assert!(
            (geodesic(&pt(&[1.0, 0.0, 0.0]), &pt(&[0.0, 0.0, 1.0])).unwrap() - PI / 2.0).abs()
                < 1e-15
        );
        assert!(geodesic(&a, &pt(&[1.0, 0.0])).is_err());
        let b = pt(&[1.0, 1e-9, 0.0]);
        assert!((geodesic(&pt(&[1.0, 0.0, 0.0]), &b).unwrap() - 1e-9).abs() < 1e-22);
    }

    #[test]
    fn geodesic_is_arccos_of_inner_product() {
        let mut r = rng(3);
        for _ in 0..1000 {
            let a = sample_uniform(4, &mut r).unwrap();
            let b = sample_uniform(4, &mut r).unwrap();
            let g = geodesic(&a, &b).unwrap();
            assert!((g - a.inner(&b).unwrap().clamp(-1.0, 1.0).acos()).abs() < 1e-7);
            assert_eq!(g, geodesic(&b, &a).unwrap());
        }
    }

    #[test]
    fn cap_examples() {
        let a = pt(&[0.2, 0.5, -0.1]);
        assert!(in_cap(&a, &a, 0.0).unwrap());
        assert!(!in_cap(&a.antipode(), &a, PI - 1e-9).unwrap());
        assert!(in_cap(&a.antipode(), &a, PI).unwrap());
    }

    #[test]
    fn projection_examples() {
        let o = north_pole(4).unwrap();
        assert_eq!(project_ae(&o).unwrap(), vec![0.0; 3]);
        let eq = pt(&[0.0, 0.3, -0.4, 0.5]);
        let y = project_ae(&eq).unwrap();
        assert!((y.iter().map(|x| x * x).sum::<f64>().sqrt() - PI / 2.0).abs() < 1e-12);
        let p = pt(&[0.7f64.cos(), 0.7f64.sin() * 0.6, 0.7f64.sin() * 0.8, 0.0]);
        let y = project_ae(&p).unwrap();
        assert!((y.iter().map(|x| x * x).sum::<f64>().sqrt() - 0.7).abs() < 1e-12);
        assert!(project_ae(&pt(&[-0.1, 1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn projection_round_trip() {
        let mut r = rng(5);
        for d in [2usize, 3, 4, 6] {
            for _ in 0..2500 {
                let p = sample_half_sphere(d, &mut r).unwrap();
                let back = unproject_ae(&project_ae(&p).unwrap()).unwrap();
                for (a, b) in p.coords().iter().zip(back.coords()) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn toponogov_and_norm_preservation() {
        let mut r = rng(17);
        for d in [2usize, 3, 4, 6] {
            let o = north_pole(d).unwrap();
            for _ in 0..25_000 {
                let a = sample_half_sphere(d, &mut r).unwrap();
                let b = sample_half_sphere(d, &mut r).unwrap();
                let (ya, yb) = (project_ae(&a).unwrap(), project_ae(&b).unwrap());
                let flat = ya
                    .iter()
                    .zip(&yb)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(geodesic(&a, &b).unwrap() <= flat + 1e-12);
                let norm = ya.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - geodesic(&o, &a).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible_and_centred() {
        let a = sample_uniform(5, &mut rng(9)).unwrap();
        let b = sample_uniform(5, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        let mut r = rng(10);
        let n = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let p = sample_uniform(3, &mut r).unwrap();
            for (m, x) in mean.iter_mut().zip(p.coords()) {
                *m += x / n as f64;
            }
        }
        let bound = 4.0 / (n as f64).sqrt();
        assert!(mean.iter().map(|x| x * x).sum::<f64>().sqrt() <= bound);
        assert!(mean[0].abs() <= bound);
    }

    #[test]
    fn grid_examples() {
        let g = make_grid(2, GridKind::EquiangularD2, 4, 0).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, w) in g.points.iter().zip(&want) {
            assert!((p.coords()[0] - w[0]).abs() < 1e-15 && (p.coords()[1] - w[1]).abs() < 1e-15);
        }
        assert!(g.weights.iter().all(|&w| (w - PI / 2.0).abs() < 1e-15));

        let f = make_grid(3, GridKind::FibonacciD3, 1000, 0).unwrap();
        assert!(f.min_separation() > 0.02);
        for d in 2..6 {
            let g = make_grid(d, GridKind::RandomUniform, 50, 1).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert!(((total - sphere_area(d as u32).unwrap()) / total).abs() < 1e-9);
        }
        assert!(make_grid(3, GridKind::EquiangularD2, 8, 0).is_err());
        assert!(make_grid(4, GridKind::FibonacciD3, 8, 0).is_err());
        assert!(make_grid(3, GridKind::FibonacciD3, 1, 0).is_err());
        assert_eq!(
            make_grid(4, GridKind::RandomUniform, 30, 5).unwrap(),
            make_grid(4, GridKind::RandomUniform, 30, 5).unwrap()
        );
    }

    #[test]
    fn grid_csv_layout() {
        let g = make_grid(2, GridKind::EquiangularD2, 3, 0).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x0,x1,weight");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn surface_integral_examples() {
        let mut r = rng(21);
        let (e, se) = surface_mc_integral(|_| 1.0, 3, 1000, &mut r).unwrap();
        assert!((e - 4.0 * PI).abs() < 1e-12 && se == 0.0);
        let (e, se) = surface_mc_integral(|p| p.coords()[0].powi(2), 3, 100_000, &mut r).unwrap();
        assert!((e - 4.0 * PI / 3.0).abs() < 3.0 * se);
        assert!(surface_mc_integral(|_| f64::NAN, 3, 100, &mut r).is_err());
        assert!(surface_mc_integral(|_| 1.0, 3, 99, &mut r).is_err());
    }

    #[test]
    fn surface_integral_matches_product_series() {
        let s = BasisSpec::new(3).unwrap();
        let e = pt(&[0.6, 0.8, 0.0]);
        let o = north_pole(3).unwrap();
        let p2 = CoeffSeries::new(s, vec![0.0, 0.0, 1.0], CoeffSource::Analytic).unwrap();
        let want = product_integral_series(&p2, &p2, 0.6).unwrap();
        let f = |x: &SpherePoint| {
            legendre_eval(&s, 2, x.inner(&o).unwrap().clamp(-1.0, 1.0)).unwrap()
                * legendre_eval(&s, 2, x.inner(&e).unwrap().clamp(-1.0, 1.0)).unwrap()
        };
        let (est, se) = surface_mc_integral(f, 3, 1_000_000, &mut rng(22)).unwrap();
        assert!((est - want).abs() < 3.0 * se, "{est} ± {se} vs {want}");
    }
}
