//! Spherical fractional Brownian motion on sphere grids: covariance,
//! factorization, sampling, occupation times and persistence probabilities.
//!
//! Monte Carlo work is split into fixed-size batches; batch `b` draws from
//! ChaCha8 stream `b` of the master seed, so results depend only on the seed
//! and never on the number of worker threads.

use crate::error::{domain, Error, Result};
use crate::sphere_geom::{
    geodesic, in_half_sphere, polar_angle, project_ae, SphereGrid, SpherePoint,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Hurst index `0 < H <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(domain(format!(
                "Hurst index H = {h} is invalid: spherical fBm exists only for 0 < H <= 1/2"
            )));
        }
        Ok(Self(h))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `½(d(η,O)^{2H} + d(ζ,O)^{2H} - d(η,ζ)^{2H})`.
pub fn covariance(h: Hurst, eta: &SpherePoint, zeta: &SpherePoint) -> Result<f64> {
    let two_h = 2.0 * h.0;
    let d12 = geodesic(eta, zeta)?;
    Ok(0.5 * (polar_angle(eta).powf(two_h) + polar_angle(zeta).powf(two_h) - d12.powf(two_h)))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `½(‖s‖^{2H} + ‖t‖^{2H} - ‖s-t‖^{2H})`.
pub fn euclidean_fbm_cov(h: f64, s: &[f64], t: &[f64]) -> Result<f64> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            got: t.len(),
        });
    }
    let two_h = 2.0 * h;
    let diff: Vec<f64> = s.iter().zip(t).map(|(a, b)| a - b).collect();
    Ok(0.5 * (norm(s).powf(two_h) + norm(t).powf(two_h) - norm(&diff).powf(two_h)))
}

/// Spherical covariance of `(η, ζ)` and Euclidean fBm covariance of their
/// azimuthal projections; the first dominates the second on `H(O)`.
pub fn domination_check(h: Hurst, eta: &SpherePoint, zeta: &SpherePoint) -> Result<(f64, f64)> {
    for p in [eta, zeta] {
        if !in_half_sphere(p) {
            return Err(domain(
                "domination check needs both points in the closed half-sphere around O",
            ));
        }
    }
    let sph = covariance(h, eta, zeta)?;
    let euc = euclidean_fbm_cov(h.0, &project_ae(eta)?, &project_ae(zeta)?)?;
    Ok((sph, euc))
}

/// Cholesky factor restricted to the rows with non-zero variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    /// Grid indices carried by the factor; all others are identically zero.
    pub active: Vec<usize>,
    pub lower: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    pub grid: SphereGrid,
    pub hurst: Hurst,
    pub entries: DMatrix<f64>,
    pub factor: Option<Factor>,
    /// Absolute diagonal shift added before factorization.
    pub jitter_used: f64,
}

impl CovMatrix {
    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn max_diag(&self) -> f64 {
        self.entries.diagonal().max()
    }

    /// Full `m × m` lower factor with zero rows for inactive points.
    pub fn factor_dense(&self) -> Option<DMatrix<f64>> {
        let f = self.factor.as_ref()?;
        let m = self.len();
        let mut full = DMatrix::zeros(m, m);
        for (a, &i) in f.active.iter().enumerate() {
            for (b, &j) in f.active.iter().enumerate() {
                full[(i, j)] = f.lower[(a, b)];
            }
        }
        Some(full)
    }
}

/// Pairwise covariance on a grid; each unordered pair is evaluated once.
pub fn build_cov(h: Hurst, grid: &SphereGrid) -> Result<CovMatrix> {
    let m = grid.len();
    let two_h = 2.0 * h.0;
    let var: Vec<f64> = grid
        .points
        .iter()
        .map(|p| polar_angle(p).powf(two_h))
        .collect();
    let mut entries = DMatrix::zeros(m, m);
    for i in 0..m {
        entries[(i, i)] = var[i];
        for j in 0..i {
            let dij = geodesic(&grid.points[i], &grid.points[j])?;
            let c = 0.5 * (var[i] + var[j] - dij.powf(two_h));
            entries[(i, j)] = c;
            entries[(j, i)] = c;
        }
    }
    Ok(CovMatrix {
        grid: grid.clone(),
        hurst: h,
        entries,
        factor: None,
        jitter_used: 0.0,
    })
}

/// Relative jitter levels tried in order.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Cholesky factorization with escalating diagonal jitter; points with zero
/// variance are removed first and stay exactly zero in every sample.
pub fn factorize(mut cov: CovMatrix) -> Result<CovMatrix> {
    let m = cov.len();
    let active: Vec<usize> = (0..m)
        .filter(|&i| (0..m).any(|j| cov.entries[(i, j)] != 0.0))
        .collect();
    let k = active.len();
    let sub = DMatrix::from_fn(k, k, |a, b| cov.entries[(active[a], active[b])]);
    let max_diag = cov.max_diag();
    let mut last = 0.0;
    for rel in JITTER_LADDER {
        let jitter = rel * max_diag;
        last = jitter;
        let mut shifted = sub.clone();
        for i in 0..k {
            shifted[(i, i)] += jitter;
        }
        if let Some(ch) = shifted.cholesky() {
            cov.factor = Some(Factor {
                active,
                lower: ch.l(),
            });
            cov.jitter_used = jitter;
            return Ok(cov);
        }
    }
    Err(Error::NotPositiveDefinite { jitter: last })
}

/// One realization of the field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub values: Vec<f64>,
}

fn require_factor(cov: &CovMatrix) -> Result<&Factor> {
    cov.factor
        .as_ref()
        .ok_or_else(|| domain("covariance has not been factorized"))
}

/// Draws `count` fields as the columns of an `m × count` matrix.
pub fn sample_fields<R: Rng + ?Sized>(
    cov: &CovMatrix,
    rng: &mut R,
    count: usize,
) -> Result<DMatrix<f64>> {
    let f = require_factor(cov)?;
    let k = f.active.len();
    let z = DMatrix::from_iterator(
        k,
        count,
        (0..k * count).map(|_| rng.sample::<f64, _>(StandardNormal)),
    );
    let x = &f.lower * z;
    let mut out = DMatrix::zeros(cov.len(), count);
    for (a, &i) in f.active.iter().enumerate() {
        out.row_mut(i).copy_from(&x.row(a));
    }
    Ok(out)
}

/// `L z` for i.i.d. standard normal `z`.
pub fn sample_field<R: Rng + ?Sized>(cov: &CovMatrix, rng: &mut R) -> Result<FieldSample> {
    let x = sample_fields(cov, rng, 1)?;
    Ok(FieldSample {
        values: x.column(0).iter().copied().collect(),
    })
}

/// Weighted fraction of the grid where the field is `<= 0`.
pub fn occupation_below_zero(sample: &FieldSample, grid: &SphereGrid) -> Result<f64> {
    if sample.values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: sample.values.len(),
        });
    }
    let total: f64 = grid.weights.iter().sum();
    let below: f64 = sample
        .values
        .iter()
        .zip(&grid.weights)
        .filter(|(x, _)| **x <= 0.0)
        .map(|(_, w)| w)
        .sum();
    Ok(below / total)
}

/// Samples per Monte Carlo batch; each batch owns one RNG stream.
pub const BATCH_SIZE: usize = 512;

fn batch_rng(master_seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(batch);
    rng
}

/// Runs `per_batch` over all batches on `workers` threads and returns the
/// results in batch order.
fn run_batches<T, F>(n_samples: usize, workers: usize, per_batch: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, usize) -> Result<T> + Sync,
{
    let n_batches = n_samples.div_ceil(BATCH_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let count = BATCH_SIZE.min(n_samples - b * BATCH_SIZE);
                per_batch(b as u64, count)
            })
            .collect()
    })
}

/// Occupation fractions of `n_samples` independent fields.
pub fn occupation_samples(
    cov: &CovMatrix,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    require_factor(cov)?;
    let total: f64 = cov.grid.weights.iter().sum();
    let parts = run_batches(n_samples, workers, |b, count| {
        let x = sample_fields(cov, &mut batch_rng(master_seed, b), count)?;
        Ok(x.column_iter()
            .map(|col| {
                col.iter()
                    .zip(&cov.grid.weights)
                    .filter(|(v, _)| **v <= 0.0)
                    .map(|(_, w)| w)
                    .sum::<f64>()
                    / total
            })
            .collect::<Vec<f64>>())
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and U[0,1].
pub fn ks_distance_uniform(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - u).max(u - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistenceEntry {
    pub eps: f64,
    pub p_hat: f64,
    pub half_width: f64,
}

/// Estimated `P(max over grid < ε)` for a list of levels, from one shared
/// sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceCurve {
    pub d: usize,
    pub hurst: f64,
    pub grid_kind: &'static str,
    pub grid_size: usize,
    pub n_samples: usize,
    pub master_seed: u64,
    pub entries: Vec<PersistenceEntry>,
}

fn check_eps(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(domain("at least one level ε is required"));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(domain("levels ε must be positive"));
    }
    if eps_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("levels ε must be strictly ascending"));
    }
    Ok(())
}

/// Counts of samples with grid maximum below each level.
fn count_below(
    cov: &CovMatrix,
    eps_list: &[f64],
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<u64>> {
    let parts = run_batches(n_samples, workers, |b, count| {
        let x = sample_fields(cov, &mut batch_rng(master_seed, b), count)?;
        let mut c = vec![0u64; eps_list.len()];
        for col in x.column_iter() {
            let mx = col.max();
            for (ci, &e) in c.iter_mut().zip(eps_list) {
                if mx < e {
                    *ci += 1;
                }
            }
        }
        Ok(c)
    })?;
    let mut total = vec![0u64; eps_list.len()];
    for p in parts {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total)
}

fn half_width(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn persistence_curve(
    cov: &CovMatrix,
    eps_list: &[f64],
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<PersistenceCurve> {
    check_eps(eps_list)?;
    if n_samples < 1000 {
        return Err(domain(format!(
            "persistence estimates need at least 1000 samples, got {n_samples}"
        )));
    }
    require_factor(cov)?;
    let counts = count_below(cov, eps_list, n_samples, master_seed, workers)?;
    let entries = eps_list
        .iter()
        .zip(counts)
        .map(|(&eps, c)| {
            let p = c as f64 / n_samples as f64;
            PersistenceEntry {
                eps,
                p_hat: p,
                half_width: half_width(p, n_samples),
            }
        })
        .collect();
    Ok(PersistenceCurve {
        d: cov.grid.d,
        hurst: cov.hurst.value(),
        grid_kind: cov.grid.kind.as_str(),
        grid_size: cov.grid.len(),
        n_samples,
        master_seed,
        entries,
    })
}

/// Weighted power-law fits of `p̂(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Slope of `log p̂` against `log ε`.
    pub slope: f64,
    pub stderr: f64,
    pub n_points: usize,
    /// Power and its standard error from the joint fit on `log ε` and
    /// `log|log ε|`, when at least four usable levels lie below 1.
    pub log_corrected: Option<LogCorrectedFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogCorrectedFit {
    pub slope: f64,
    pub stderr: f64,
    pub log_coefficient: f64,
}

/// Weighted least squares; returns coefficients and their covariance.
fn wls(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let p = rows[0].len();
    let mut xtwx = DMatrix::zeros(p, p);
    let mut xtwy = DVector::zeros(p);
    for ((r, &yi), &wi) in rows.iter().zip(y).zip(w) {
        for a in 0..p {
            xtwy[a] += wi * r[a] * yi;
            for b in 0..p {
                xtwx[(a, b)] += wi * r[a] * r[b];
            }
        }
    }
    let inv = xtwx
        .try_inverse()
        .ok_or_else(|| Error::Numeric("degenerate design in exponent fit".into()))?;
    let beta = &inv * xtwy;
    Ok((beta, inv))
}

pub fn fit_persistence_exponent(curve: &PersistenceCurve) -> Result<ExponentFit> {
    let n = curve.n_samples as f64;
    let usable: Vec<&PersistenceEntry> = curve
        .entries
        .iter()
        .filter(|e| e.p_hat > 0.0 && e.p_hat < 1.0)
        .collect();
    if usable.len() < 3 {
        return Err(Error::Numeric(format!(
            "exponent fit needs at least 3 levels with 0 < p̂ < 1, got {}",
            usable.len()
        )));
    }
    // var(log p̂) ≈ (1-p)/(n p)
    let weight = |e: &PersistenceEntry| n * e.p_hat / (1.0 - e.p_hat);
    let y: Vec<f64> = usable.iter().map(|e| e.p_hat.ln()).collect();
    let w: Vec<f64> = usable.iter().map(|e| weight(e)).collect();
    let rows: Vec<Vec<f64>> = usable.iter().map(|e| vec![1.0, e.eps.ln()]).collect();
    let (beta, cov) = wls(&rows, &y, &w)?;

    let below: Vec<&&PersistenceEntry> = usable.iter().filter(|e| e.eps < 1.0).collect();
    let log_corrected = if below.len() >= 4 {
        let y: Vec<f64> = below.iter().map(|e| e.p_hat.ln()).collect();
        let w: Vec<f64> = below.iter().map(|e| weight(e)).collect();
        let rows: Vec<Vec<f64>> = below
            .iter()
            .map(|e| vec![1.0, e.eps.ln(), e.eps.ln().abs().ln()])
            .collect();
        let (b, c) = wls(&rows, &y, &w)?;
        Some(LogCorrectedFit {
            slope: b[1],
            stderr: c[(1, 1)].sqrt(),
            log_coefficient: b[2],
        })
    } else {
        None
    };
    Ok(ExponentFit {
        slope: beta[1],
        stderr: cov[(1, 1)].sqrt(),
        n_points: usable.len(),
        log_corrected,
    })
}

/// Estimates for `P(max_E < ε)`, `P(max_A < ε)`, `P(max_B < ε)` from one
/// sample set, with `diff = p_full - p_A p_B`, its delta-method standard
/// error, and `margin = diff + 3 se`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlepianResult {
    pub eps: f64,
    pub p_full: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub diff: f64,
    pub stderr: f64,
    pub margin: f64,
}

pub fn slepian_product_check(
    cov: &CovMatrix,
    in_a: &[bool],
    in_b: &[bool],
    eps: f64,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<SlepianResult> {
    let m = cov.len();
    if in_a.len() != m || in_b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: in_a.len().min(in_b.len()),
        });
    }
    if in_a.iter().zip(in_b).any(|(a, b)| !a && !b) {
        return Err(domain("the two parts must cover the grid"));
    }
    check_eps(&[eps])?;
    require_factor(cov)?;
    let parts = run_batches(n_samples, workers, |b, count| {
        let x = sample_fields(cov, &mut batch_rng(master_seed, b), count)?;
        let mut c = [0u64; 3];
        for col in x.column_iter() {
            let (mut ma, mut mb) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (i, &v) in col.iter().enumerate() {
                if in_a[i] {
                    ma = ma.max(v);
                }
                if in_b[i] {
                    mb = mb.max(v);
                }
            }
            let (a, bb) = (ma < eps, mb < eps);
            c[0] += (a && bb) as u64;
            c[1] += a as u64;
            c[2] += bb as u64;
        }
        Ok(c)
    })?;
    let mut c = [0u64; 3];
    for p in parts {
        for k in 0..3 {
            c[k] += p[k];
        }
    }
    let n = n_samples as f64;
    let (pf, pa, pb) = (c[0] as f64 / n, c[1] as f64 / n, c[2] as f64 / n);
    // the full event is the intersection of the two part events
    let sigma = [
        [pf * (1.0 - pf), pf * (1.0 - pa), pf * (1.0 - pb)],
        [pf * (1.0 - pa), pa * (1.0 - pa), pf - pa * pb],
        [pf * (1.0 - pb), pf - pa * pb, pb * (1.0 - pb)],
    ];
    let g = [1.0, -pb, -pa];
    let mut var = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            var += g[i] * sigma[i][j] * g[j];
        }
    }
    let stderr = (var.max(0.0) / n).sqrt();
    let diff = pf - pa * pb;
    Ok(SlepianResult {
        eps,
        p_full: pf,
        p_a: pa,
        p_b: pb,
        diff,
        stderr,
        margin: diff + 3.0 * stderr,
    })
}

/// Split of a grid by the sign of coordinate 1, a hyperplane through `O`.
pub fn hemispheric_split(grid: &SphereGrid) -> (Vec<bool>, Vec<bool>) {
    let a: Vec<bool> = grid.points.iter().map(|p| p.coords()[1] >= 0.0).collect();
    let b = a.iter().map(|x| !x).collect();
    (a, b)
}
