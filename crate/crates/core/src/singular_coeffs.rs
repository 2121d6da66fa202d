//! Legendre coefficients of functions with algebraic endpoint singularities.
//!
//! Covers the closed-form coefficients of `(1 ∓ t)^γ`, the classification of
//! coefficient decay from endpoint expansions, and the coefficients of the
//! spherical fBm kernel `1 - (arccos t / π)^{2H}`.

use crate::error::{domain, Error, Result};
use crate::polybasis::{n_mult, project, BasisSpec, CoeffSeries, CoeffSource, QuadratureRule};
use crate::specfun::{gen_binomial, log_gamma, log_gamma_ratio, log_gamma_signed, GammaRatioQuery};
use std::f64::consts::PI;

fn is_nonneg_integer(v: f64) -> bool {
    v >= 0.0 && v == v.floor()
}

/// Asymptotic expansions `f(t) ~ Σ A_i (1+t)^{α_i}` at `t = -1` and
/// `f(t) ~ Σ B_i (1-t)^{β_i}` at `t = 1`, stored as `(coefficient, exponent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointExpansion {
    at_minus_one: Vec<(f64, f64)>,
    at_plus_one: Vec<(f64, f64)>,
}

fn check_side(side: &[(f64, f64)], name: &str) -> Result<()> {
    for (i, &(c, e)) in side.iter().enumerate() {
        if !c.is_finite() || !e.is_finite() {
            return Err(domain(format!("{name}: non-finite term {i}")));
        }
    }
    if side.windows(2).any(|w| w[0].1 >= w[1].1) {
        return Err(domain(format!(
            "{name}: exponents must be strictly increasing"
        )));
    }
    if let Some(z) = side.iter().position(|&(c, _)| c == 0.0) {
        if side[z..].iter().any(|&(c, _)| c != 0.0) {
            return Err(domain(format!(
                "{name}: non-zero term after a zero coefficient at index {z}"
            )));
        }
    }
    Ok(())
}

impl EndpointExpansion {
    pub fn new(at_minus_one: Vec<(f64, f64)>, at_plus_one: Vec<(f64, f64)>) -> Result<Self> {
        check_side(&at_minus_one, "expansion at -1")?;
        check_side(&at_plus_one, "expansion at +1")?;
        Ok(Self {
            at_minus_one,
            at_plus_one,
        })
    }

    pub fn at_minus_one(&self) -> &[(f64, f64)] {
        &self.at_minus_one
    }

    pub fn at_plus_one(&self) -> &[(f64, f64)] {
        &self.at_plus_one
    }

    /// Checks that every exponent exceeds `(1-d)/2`, i.e. each term is square
    /// integrable for the weight of dimension `d`.
    pub fn check_dimension(&self, spec: &BasisSpec) -> Result<()> {
        let floor = (1.0 - spec.d() as f64) / 2.0;
        match self
            .at_minus_one
            .iter()
            .chain(&self.at_plus_one)
            .find(|&&(_, e)| e <= floor)
        {
            Some(&(_, e)) => Err(domain(format!(
                "exponent {e} <= (1-d)/2 = {floor} for d = {}",
                spec.d()
            ))),
            None => Ok(()),
        }
    }

    /// Truncated expansion at `-1` evaluated at `1 + t = v`.
    pub fn eval_minus(&self, v: f64) -> f64 {
        self.at_minus_one.iter().map(|&(a, e)| a * v.powf(e)).sum()
    }

    /// Truncated expansion at `+1` evaluated at `1 - t = u`.
    pub fn eval_plus(&self, u: f64) -> f64 {
        self.at_plus_one.iter().map(|&(b, e)| b * u.powf(e)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    Superpolynomial,
    SingleRate,
    ParityDependent,
}

impl DecayMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayMode::Superpolynomial => "superpolynomial",
            DecayMode::SingleRate => "single_rate",
            DecayMode::ParityDependent => "parity_dependent",
        }
    }
}

/// Leading-order decay `|a_n| ~ |c_n| n^{-2γ-1}`.
///
/// `parity_coefficients = (c_even, c_odd)` is the combination
/// `(-1)^n A + B` of the leading non-integer terms at each endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayLaw {
    pub gamma: f64,
    pub mode: DecayMode,
    pub parity_coefficients: (f64, f64),
}

impl DecayLaw {
    /// Exponent `-2γ-1` of the raw coefficients; `-∞` when superpolynomial.
    pub fn rate(&self) -> f64 {
        -2.0 * self.gamma - 1.0
    }

    /// Whether the leading term vanishes on the subsequence of parity `n`.
    pub fn vanishes_for(&self, n: usize) -> bool {
        let c = if n % 2 == 0 {
            self.parity_coefficients.0
        } else {
            self.parity_coefficients.1
        };
        self.mode != DecayMode::Superpolynomial && c == 0.0
    }
}

fn check_gamma(spec: &BasisSpec, gamma: f64) -> Result<()> {
    let floor = (1.0 - spec.d() as f64) / 2.0;
    if !(gamma > floor) || !gamma.is_finite() {
        return Err(domain(format!(
            "(1 ∓ t)^γ with γ = {gamma} is not an L²_w function for d = {} (need γ > {floor})",
            spec.d()
        )));
    }
    Ok(())
}

/// Legendre coefficient `a^-_{γ,n}` of `(1-t)^γ`.
pub fn coeff_one_minus_t_pow(spec: &BasisSpec, gamma: f64, n: usize) -> Result<f64> {
    check_gamma(spec, gamma)?;
    let d = spec.d() as f64;
    let nf = n as f64;
    // N(d,n) Γ(d/2)/√π 2^{d-2+γ} Γ(γ+(d-1)/2) / Γ(γ+d+n-1)
    let ln_prefix = crate::polybasis::ln_n_mult(spec, n) + log_gamma(d / 2.0)? - 0.5 * PI.ln()
        + (d - 2.0 + gamma) * std::f64::consts::LN_2
        + log_gamma(gamma + (d - 1.0) / 2.0)?;

    if is_nonneg_integer(gamma) {
        if gamma <= nf - 1.0 {
            return Ok(0.0);
        }
        // (-1)^n Γ(γ+1)/Γ(γ-n+1) in place of Γ(n-γ)/Γ(-γ)
        let ln_fall = log_gamma(gamma + 1.0)? - log_gamma(gamma - nf + 1.0)?;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign * (ln_prefix + ln_fall - log_gamma(gamma + d + nf - 1.0)?).exp());
    }

    let (ln_den, s_den) = log_gamma_signed(-gamma)?;
    let (ln_ratio, s_num) = if nf > gamma {
        // Γ(n-γ)/Γ(n+γ+d-1) with the large-n cancellation handled analytically
        let q = GammaRatioQuery::new(
            nf.max(1.0),
            nf - gamma - nf.max(1.0),
            nf + gamma + d - 1.0 - nf.max(1.0),
        )?;
        (log_gamma_ratio(&q)?, 1.0)
    } else {
        let (ln_num, s) = log_gamma_signed(nf - gamma)?;
        (ln_num - log_gamma(gamma + d + nf - 1.0)?, s)
    };
    Ok(s_num * s_den * (ln_prefix + ln_ratio - ln_den).exp())
}

/// Legendre coefficient `a^+_{γ,n} = (-1)^n a^-_{γ,n}` of `(1+t)^γ`.
pub fn coeff_one_plus_t_pow(spec: &BasisSpec, gamma: f64, n: usize) -> Result<f64> {
    let a = coeff_one_minus_t_pow(spec, gamma, n)?;
    Ok(if n % 2 == 0 { a } else { -a })
}

/// Closed-form coefficient table `a^-_{γ,0..=n_max}`.
pub fn closed_form_series(spec: &BasisSpec, gamma: f64, n_max: usize) -> Result<CoeffSeries> {
    let values = (0..=n_max)
        .map(|n| coeff_one_minus_t_pow(spec, gamma, n))
        .collect::<Result<Vec<_>>>()?;
    CoeffSeries::new(*spec, values, CoeffSource::ClosedForm)
}

/// Leading non-integer exponent with non-zero coefficient on one side.
fn dominant(side: &[(f64, f64)]) -> Option<(f64, f64)> {
    side.iter()
        .filter(|&&(c, e)| c != 0.0 && !is_nonneg_integer(e))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(c, e)| (e, c))
}

/// Decay law of the Legendre coefficients implied by the endpoint expansions.
pub fn predict_decay(exp: &EndpointExpansion) -> DecayLaw {
    match (dominant(&exp.at_minus_one), dominant(&exp.at_plus_one)) {
        (None, None) => DecayLaw {
            gamma: f64::INFINITY,
            mode: DecayMode::Superpolynomial,
            parity_coefficients: (0.0, 0.0),
        },
        (Some((ga, a)), Some((gb, b))) if ga == gb => {
            // round-off cancellation is an exact zero
            let snap = |c: f64| {
                if c.abs() <= 8.0 * f64::EPSILON * (a.abs() + b.abs()) {
                    0.0
                } else {
                    c
                }
            };
            DecayLaw {
                gamma: ga,
                mode: DecayMode::ParityDependent,
                parity_coefficients: (snap(a + b), snap(b - a)),
            }
        }
        (Some((ga, a)), other) if other.is_none_or(|(gb, _)| ga < gb) => DecayLaw {
            gamma: ga,
            mode: DecayMode::SingleRate,
            parity_coefficients: (a, -a),
        },
        (_, Some((gb, b))) => DecayLaw {
            gamma: gb,
            mode: DecayMode::SingleRate,
            parity_coefficients: (b, b),
        },
        (Some(_), None) => unreachable!(),
    }
}

/// Which indices enter a decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityFilter {
    All,
    Odd,
    Even,
}

impl ParityFilter {
    pub fn admits(self, n: usize) -> bool {
        match self {
            ParityFilter::All => true,
            ParityFilter::Odd => n % 2 == 1,
            ParityFilter::Even => n % 2 == 0,
        }
    }
}

impl std::str::FromStr for ParityFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(ParityFilter::All),
            "odd" => Ok(ParityFilter::Odd),
            "even" => Ok(ParityFilter::Even),
            _ => Err(Error::Validation(format!(
                "unknown parity filter {s:?} (all|odd|even)"
            ))),
        }
    }
}

/// Least-squares slope and `R²` of `log|a_n|` against `log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub r_squared: f64,
}

/// Fits the decay of a coefficient generator over `n_min..=n_max`.
pub fn fit_decay_with<F>(
    mut coeff: F,
    n_min: usize,
    n_max: usize,
    parity: ParityFilter,
) -> Result<DecayFit>
where
    F: FnMut(usize) -> Result<f64>,
{
    if n_min < 10 || n_max < 2 * n_min {
        return Err(domain(format!(
            "decay fit needs n_max >= 2 n_min >= 20, got n_min = {n_min}, n_max = {n_max}"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in (n_min..=n_max).filter(|&n| parity.admits(n)) {
        let a = coeff(n)?;
        if a == 0.0 {
            return Err(Error::ZeroCoefficient { index: n });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite {
                value: a,
                location: format!("coefficient {n}"),
            });
        }
        xs.push((n as f64).ln());
        ys.push(a.abs().ln());
    }
    let (slope, r_squared) = linear_fit(&xs, &ys);
    Ok(DecayFit { slope, r_squared })
}

/// Fits the decay of a stored coefficient table.
pub fn fit_decay(
    coeffs: &CoeffSeries,
    n_min: usize,
    n_max: usize,
    parity: ParityFilter,
) -> Result<DecayFit> {
    if n_max >= coeffs.len() {
        return Err(domain(format!(
            "n_max = {n_max} exceeds the table length {}",
            coeffs.len()
        )));
    }
    fit_decay_with(|n| Ok(coeffs.values[n]), n_min, n_max, parity)
}

/// Ordinary least squares `y = a + b x`; returns `(b, R²)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let r2 = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    (slope, r2)
}

/// `B_i` in `arccos t = Σ_i B_i (1-t)^{1/2+i}` near `t = 1`.
fn arccos_plus_coeffs(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| {
            let e = 0.5 + i as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * gen_binomial(-0.5, i as u32) / e * 2f64.powf(-e)
        })
        .collect()
}

/// Endpoint expansions of `arccos t`, `m + 1` singular terms per side; the
/// constant `π` appears at `-1` as the exponent-zero term.
pub fn arccos_endpoint_expansion(m: usize) -> EndpointExpansion {
    let b = arccos_plus_coeffs(m);
    let plus = b
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, 0.5 + i as f64))
        .collect();
    let minus = std::iter::once((PI, 0.0))
        .chain(b.iter().enumerate().map(|(i, &c)| (-c, 0.5 + i as f64)))
        .collect();
    EndpointExpansion::new(minus, plus).expect("arccos expansion is well formed")
}

/// Coefficients of `(1 + Σ_{i>=1} s_i x^i)^p` up to `x^m`.
fn series_pow(s: &[f64], p: f64, m: usize) -> Vec<f64> {
    let h = |j: usize| {
        if j == 0 {
            1.0
        } else {
            s.get(j).copied().unwrap_or(0.0)
        }
    };
    let mut g = vec![1.0; m + 1];
    for k in 1..=m {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += ((p + 1.0) * j as f64 - k as f64) * h(j) * g[k - j];
        }
        g[k] = acc / k as f64;
    }
    g
}

/// Truncated product of two power series.
fn series_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    for (i, &x) in a.iter().enumerate().take(m + 1) {
        for (j, &y) in b.iter().enumerate().take(m + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn check_hurst(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(domain(format!(
            "Hurst index must satisfy 0 < H <= 1/2, got {h}"
        )));
    }
    Ok(())
}

/// Endpoint expansions of the kernel `1 - (arccos t / π)^{2H}`.
///
/// At `+1` the terms are `1` and `(1-t)^{H+k}`, `k = 0..=m`; at `-1` the
/// exponents are `r/2`, `r = 1..=2m+1`, with vanishing terms omitted.
pub fn kernel_endpoint_expansion(h: f64, m: usize) -> Result<EndpointExpansion> {
    check_hurst(h)?;
    let b = arccos_plus_coeffs(m + 1);
    let two_h = 2.0 * h;

    // arccos = √2 u^{1/2} (1 + s(u)), s_i = B_i / B_0
    let s: Vec<f64> = b.iter().map(|c| c / b[0]).collect();
    let pow = series_pow(&s, two_h, m);
    let lead = -(2f64.powf(h)) / PI.powf(two_h);
    let plus = std::iter::once((1.0, 0.0))
        .chain(
            pow.iter()
                .enumerate()
                .map(|(k, &e)| (lead * e, h + k as f64)),
        )
        .collect();

    // 1 - (1 - q)^{2H} = -Σ_k C(2H,k) (-q)^k,  q = v^{1/2} Σ_i (B_i/π) v^i
    let r_max = 2 * m + 1;
    let base: Vec<f64> = b.iter().map(|c| c / PI).collect();
    let mut minus_coeffs = vec![0.0; r_max + 1];
    let mut qk = vec![1.0];
    for k in 1..=r_max {
        qk = series_mul(&qk, &base, r_max);
        let w = -gen_binomial(two_h, k as u32) * if k % 2 == 0 { 1.0 } else { -1.0 };
        // q^k contributes v^{k/2 + j}
        for (j, &c) in qk.iter().enumerate() {
            let r = k + 2 * j;
            if r <= r_max {
                minus_coeffs[r] += w * c;
            }
        }
    }
    let minus = (1..=r_max)
        .filter(|&r| minus_coeffs[r] != 0.0)
        .map(|r| (minus_coeffs[r], r as f64 / 2.0))
        .collect();
    EndpointExpansion::new(minus, plus)
}

/// `1 - (arccos t / π)^{2H}` evaluated without cancellation at either end.
pub fn kernel_fn(h: f64, t: f64) -> f64 {
    let two_h = 2.0 * h;
    if t >= 0.0 {
        1.0 - (t.acos() / PI).powf(two_h)
    } else {
        // arccos t = π - arccos(-t)
        let q = (-t).acos() / PI;
        -(two_h * (-q).ln_1p()).exp_m1()
    }
}

/// Raw kernel coefficients `b_n` and amplitudes `a_n^{(H)} = √(b_n N(d,n))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCoeffs {
    pub hurst: f64,
    pub raw: CoeffSeries,
    pub amplitudes: CoeffSeries,
    /// Raw values in `(-tol_neg, 0)` set to zero.
    pub clamped: usize,
    pub tol_neg: f64,
}

/// Projects the kernel `1 - (arccos t/π)^{2H}` onto `P_0..P_N`.
pub fn arccos_power_coeffs(
    spec: &BasisSpec,
    h: f64,
    n_max: usize,
    rule: &QuadratureRule,
) -> Result<KernelCoeffs> {
    check_hurst(h)?;
    let mut raw = project(|t| kernel_fn(h, t), spec, n_max, rule)?;
    let tol_neg = 1e-10 * raw.values[0].abs();
    let mut clamped = 0;
    for (n, b) in raw.values.iter_mut().enumerate() {
        if *b < -tol_neg {
            return Err(Error::PositivityViolation {
                index: n,
                value: *b,
                tolerance: tol_neg,
            });
        }
        if *b < 0.0 {
            *b = 0.0;
            clamped += 1;
        }
    }
    let amps = raw
        .values
        .iter()
        .enumerate()
        .map(|(n, &b)| (b * n_mult(spec, n)).sqrt())
        .collect();
    let amplitudes = CoeffSeries::new(*spec, amps, CoeffSource::Quadrature)?;
    raw.source = CoeffSource::Quadrature;
    Ok(KernelCoeffs {
        hurst: h,
        raw,
        amplitudes,
        clamped,
        tol_neg,
    })
}

fn ln_moment(spec: &BasisSpec, n: usize, m: usize) -> Result<Option<f64>> {
    if n < m || (n - m) % 2 == 1 {
        return Ok(None);
    }
    let d = spec.d() as f64;
    let (nf, mf) = (n as f64, m as f64);
    let v = log_gamma(nf + 1.0)? + log_gamma((d - 1.0) / 2.0)? + log_gamma((nf - mf + 1.0) / 2.0)?
        - mf * std::f64::consts::LN_2
        - log_gamma(nf - mf + 1.0)?
        - log_gamma(mf + (nf - mf + d) / 2.0)?;
    Ok(Some(v))
}

/// `∫ t^n P_m(t) w(t) dt`.
pub fn monomial_moment(spec: &BasisSpec, n: usize, m: usize) -> f64 {
    ln_moment(spec, n, m)
        .expect("arguments are positive")
        .map_or(0.0, f64::exp)
}

/// `∫ t^n (P_m(t) - P_{m+2}(t)) w(t) dt`, which is non-negative.
pub fn monomial_gap_integral(spec: &BasisSpec, n: usize, m: usize) -> f64 {
    monomial_moment(spec, n, m) - monomial_moment(spec, n, m + 2)
}
