//! The auxiliary function `G^{(H)}`, the shift function `f_{δ,α}` with an
//! upper bound on its squared RKHS norm, and the Legendre-series form of the
//! spherical fBm kernel.

use crate::error::{domain, Error, Result};
use crate::gaussfield::{covariance, Hurst};
use crate::polybasis::{
    build_singular_quadrature, n_mult, series_eval, BasisSpec, CoeffSeries, CoeffSource,
};
use crate::singular_coeffs::{
    arccos_power_coeffs, coeff_one_minus_t_pow, linear_fit, KernelCoeffs,
};
use crate::sphere_geom::{north_pole, SpherePoint};
use serde::Serialize;
use std::f64::consts::PI;

/// Parameters of the shift function `f_{δ,α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RkhsShiftSpec {
    pub hurst: f64,
    pub alpha: f64,
    pub delta: f64,
    pub d: u32,
    pub n_trunc: usize,
}

impl RkhsShiftSpec {
    pub fn new(hurst: f64, alpha: f64, delta: f64, d: u32, n_trunc: usize) -> Result<Self> {
        Hurst::new(hurst)?;
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(domain(format!("α must satisfy 0 < α < 1/2, got {alpha}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(domain(format!("δ must satisfy 0 < δ <= 1, got {delta}")));
        }
        BasisSpec::new(d)?;
        if n_trunc < 20 {
            return Err(domain(format!(
                "series truncation must be >= 20, got {n_trunc}"
            )));
        }
        Ok(Self {
            hurst,
            alpha,
            delta,
            d,
            n_trunc,
        })
    }

    /// `(H+α)/2`, the index of the auxiliary function used by `f_{δ,α}`.
    pub fn aux_index(&self) -> f64 {
        (self.hurst + self.alpha) / 2.0
    }

    fn basis(&self) -> BasisSpec {
        BasisSpec::new(self.d).expect("validated")
    }
}

/// `G^{(H)}(t) = 2^H - (1-t)^H + (1+t)^H`.
pub fn g_aux(h: f64, t: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(domain(format!("G^(H) needs H > 0, got {h}")));
    }
    if !(t.abs() <= 1.0) {
        return Err(domain(format!("G^(H) needs |t| <= 1, got {t}")));
    }
    Ok(2f64.powf(h) - (1.0 - t).powf(h) + (1.0 + t).powf(h))
}

/// Raw coefficients of `G^{(H)}` and amplitudes `b_n = √(raw_n N(d,n))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GAuxCoeffs {
    pub raw: CoeffSeries,
    pub amplitudes: CoeffSeries,
}

/// Raw coefficient `n` of `G^{(H)}`: `2^H` at `n = 0`, `-a^-_{H,n}(1-(-1)^n)` after.
pub fn g_aux_raw(spec: &BasisSpec, h: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(2f64.powf(h));
    }
    if n % 2 == 0 {
        return Ok(0.0);
    }
    Ok(-2.0 * coeff_one_minus_t_pow(spec, h, n)?)
}

pub fn g_aux_coeffs(spec: &BasisSpec, h: f64, n_max: usize) -> Result<GAuxCoeffs> {
    if !(h > 0.0) {
        return Err(domain(format!("G^(H) needs H > 0, got {h}")));
    }
    let raw = (0..=n_max)
        .map(|n| g_aux_raw(spec, h, n))
        .collect::<Result<Vec<_>>>()?;
    if let Some((n, &v)) = raw.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::PositivityViolation {
            index: n,
            value: v,
            tolerance: 0.0,
        });
    }
    let amps = raw
        .iter()
        .enumerate()
        .map(|(n, &r)| (r * n_mult(spec, n)).sqrt())
        .collect();
    Ok(GAuxCoeffs {
        raw: CoeffSeries::new(*spec, raw, CoeffSource::ClosedForm)?,
        amplitudes: CoeffSeries::new(*spec, amps, CoeffSource::ClosedForm)?,
    })
}

/// `f_{δ,α}` as a function of `⟨η, O⟩`:
/// `16^{H+α} [G^{(h)}(1) - G^{(h)}(inner)] δ^{-(H+α)}` with `h = (H+α)/2`.
pub fn shift_eval(s: &RkhsShiftSpec, inner: f64) -> Result<f64> {
    let p = s.hurst + s.alpha;
    let h = s.aux_index();
    let gap = g_aux(h, 1.0)? - g_aux(h, inner)?;
    Ok(16f64.powf(p) * gap * s.delta.powf(-p))
}

/// Upper bound on `‖f_{δ,α}‖²` and its parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBound {
    pub hurst: f64,
    pub alpha: f64,
    pub delta: f64,
    pub n_trunc: usize,
    /// `δ^{-2(H+α)} 2 π^{-2H} 16^{2(H+α)}`.
    pub prefactor: f64,
    /// Sum over `n ∈ {0} ∪ odd, n <= n_trunc`.
    pub partial_sum: f64,
    pub tail_estimate: f64,
    /// Fitted `c` in `summand_n ≈ c n^{-1-2α}`.
    pub tail_constant: f64,
    /// Indices where the kernel amplitude fell below the division floor and
    /// the fitted power law was used instead.
    pub substituted: Vec<usize>,
    pub bound: f64,
}

/// Division floor for kernel amplitudes, relative to `a_0^{(H)}`.
pub const AMPLITUDE_FLOOR: f64 = 1e-13;

/// Norm bound using precomputed kernel coefficients (`n_max >= n_trunc`).
pub fn norm_bound_sq_with(s: &RkhsShiftSpec, kernel: &KernelCoeffs) -> Result<NormBound> {
    let spec = s.basis();
    if kernel.raw.spec != spec {
        return Err(Error::DimensionMismatch {
            expected: s.d as usize,
            got: kernel.raw.spec.d() as usize,
        });
    }
    if kernel.hurst != s.hurst {
        return Err(domain(format!(
            "kernel coefficients are for H = {}, expected {}",
            kernel.hurst, s.hurst
        )));
    }
    let n_trunc = s.n_trunc;
    if kernel.amplitudes.degree() < n_trunc {
        return Err(domain(format!(
            "kernel coefficients reach n = {}, truncation needs {n_trunc}",
            kernel.amplitudes.degree()
        )));
    }
    let amps = &kernel.amplitudes.values;
    let floor = AMPLITUDE_FLOOR * amps[0];
    let index: Vec<usize> = std::iter::once(0).chain((1..=n_trunc).step_by(2)).collect();

    // power-law fallback a_n ≈ exp(c0) n^{c1} over the last decade of good indices
    let mut fallback: Option<(f64, f64)> = None;
    let mut amplitude = |n: usize| -> Result<(f64, bool)> {
        let a = amps[n];
        if a >= floor && a > 0.0 {
            return Ok((a, false));
        }
        if fallback.is_none() {
            let (xs, ys): (Vec<f64>, Vec<f64>) = (n_trunc / 10..=n_trunc)
                .filter(|&k| k % 2 == 1 && amps[k] >= floor && amps[k] > 0.0)
                .map(|k| ((k as f64).ln(), amps[k].ln()))
                .unzip();
            if xs.len() < 2 {
                return Err(Error::Numeric(format!(
                    "kernel amplitude a_{n} = {a:e} is below the division floor {floor:e} and no \
                     power law can be fitted"
                )));
            }
            let (slope, _) = linear_fit(&xs, &ys);
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            fallback = Some((my - slope * mx, slope));
        }
        let (c0, c1) = fallback.unwrap();
        Ok(((c0 + c1 * (n as f64).ln()).exp(), true))
    };

    let h = s.aux_index();
    let mut partial = 0.0;
    let mut substituted = Vec::new();
    let mut tail_logs = Vec::new();
    for &n in &index {
        let (a, sub) = amplitude(n)?;
        if sub {
            substituted.push(n);
        }
        let g = g_aux_raw(&spec, h, n)?;
        let raw_k = a * a / n_mult(&spec, n);
        let term = g * g / raw_k;
        partial += term;
        if n >= (n_trunc / 10).max(1) {
            tail_logs.push(term.ln() + (1.0 + 2.0 * s.alpha) * (n as f64).ln());
        }
    }
    let c = (tail_logs.iter().sum::<f64>() / tail_logs.len() as f64).exp();
    let tail = 2.0 * c * (n_trunc as f64).powf(-2.0 * s.alpha) / (2.0 * s.alpha);
    let p = s.hurst + s.alpha;
    let prefactor = s.delta.powf(-2.0 * p) * 2.0 * PI.powf(-2.0 * s.hurst) * 16f64.powf(2.0 * p);
    Ok(NormBound {
        hurst: s.hurst,
        alpha: s.alpha,
        delta: s.delta,
        n_trunc,
        prefactor,
        partial_sum: partial,
        tail_estimate: tail,
        tail_constant: c,
        substituted,
        bound: prefactor * (partial + tail),
    })
}

/// Norm bound with kernel coefficients projected up to `n_trunc`.
pub fn norm_bound_sq(s: &RkhsShiftSpec) -> Result<NormBound> {
    let series = KernelSeries::new(&s.basis(), s.hurst, s.n_trunc)?;
    norm_bound_sq_with(s, series.coeffs())
}

/// Truncated series `Σ b_n P_n(t)` of `1 - (arccos t/π)^{2H}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    coeffs: KernelCoeffs,
}

impl KernelSeries {
    pub fn new(spec: &BasisSpec, h: f64, n_max: usize) -> Result<Self> {
        let rule = build_singular_quadrature(spec, n_max);
        Ok(Self {
            coeffs: arccos_power_coeffs(spec, h, n_max, &rule)?,
        })
    }

    pub fn from_coeffs(coeffs: KernelCoeffs) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &KernelCoeffs {
        &self.coeffs
    }

    pub fn hurst(&self) -> f64 {
        self.coeffs.hurst
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        series_eval(&self.coeffs.raw, s)
    }

    /// `Σ_{n>N} b_n = 1 - Σ_{n<=N} b_n`, which bounds the uniform truncation error.
    pub fn tail(&self) -> f64 {
        (1.0 - self.coeffs.raw.values.iter().sum::<f64>()).max(0.0)
    }
}

/// Single evaluation of the truncated kernel series.
pub fn kernel_series(spec: &BasisSpec, h: f64, s: f64, n_max: usize) -> Result<f64> {
    KernelSeries::new(spec, h, n_max)?.eval(s)
}

/// SFBM covariance of `(η, ζ)` directly (`lhs`) and rebuilt from the kernel
/// series as `π^{2H}/2 [k(⟨η,ζ⟩) - k(⟨η,O⟩) - k(⟨ζ,O⟩) + k(1)]` (`rhs`).
pub fn covariance_series_check(
    series: &KernelSeries,
    eta: &SpherePoint,
    zeta: &SpherePoint,
) -> Result<(f64, f64)> {
    let d = series.coeffs.raw.spec.d() as usize;
    if eta.dim() != d || zeta.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if eta.dim() != d {
                eta.dim()
            } else {
                zeta.dim()
            },
        });
    }
    let h = series.hurst();
    let lhs = covariance(Hurst::new(h)?, eta, zeta)?;
    let o = north_pole(d)?;
    let k = |a: &SpherePoint, b: &SpherePoint| -> Result<f64> {
        series.eval(a.inner(b)?.clamp(-1.0, 1.0))
    };
    let rhs =
        PI.powf(2.0 * h) / 2.0 * (k(eta, zeta)? - k(eta, &o)? - k(zeta, &o)? + series.eval(1.0)?);
    Ok((lhs, rhs))
}
