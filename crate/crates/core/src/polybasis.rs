//! Generalized Legendre polynomials of dimension `d`.
//!
//! `P_n^{(d)}` is the Gegenbauer polynomial `C_n^{(λ)}` with `λ = d/2 - 1`,
//! rescaled so that `P_n(1) = 1`. The family is orthogonal on `[-1, 1]` for the
//! weight `w(t) = (1 - t²)^{(d-3)/2}`; `d = 3` gives the classical Legendre
//! polynomials and `d = 2` the Chebyshev polynomials of the first kind.
//!
//! Besides evaluation this module provides the basis norms, two quadrature
//! rules for the weight `w` (a Gauss rule from the Jacobi matrix, and a
//! double-exponential rule in the angle variable for integrands with algebraic
//! endpoint singularities), series projection and evaluation, and the
//! spherical integration identities built on them.

use crate::error::{domain, Error, Result};
use crate::specfun::log_gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Dimension parameter of the basis; `λ = d/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBasisSpec", into = "RawBasisSpec")]
pub struct BasisSpec {
    d: u32,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBasisSpec {
    d: u32,
    lambda: f64,
}

impl TryFrom<RawBasisSpec> for BasisSpec {
    type Error = Error;

    fn try_from(raw: RawBasisSpec) -> Result<Self> {
        let spec = BasisSpec::new(raw.d)?;
        if spec.lambda != raw.lambda {
            return Err(domain(format!(
                "λ = {} does not match d/2 - 1 for d = {}",
                raw.lambda, raw.d
            )));
        }
        Ok(spec)
    }
}

impl From<BasisSpec> for RawBasisSpec {
    fn from(s: BasisSpec) -> Self {
        RawBasisSpec {
            d: s.d,
            lambda: s.lambda,
        }
    }
}

impl BasisSpec {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(domain(format!(
                "basis dimension must satisfy d >= 2, got {d}"
            )));
        }
        Ok(Self {
            d,
            lambda: d as f64 / 2.0 - 1.0,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Exponent `(d-3)/2` of the weight `w(t) = (1-t²)^{(d-3)/2}`.
    pub fn weight_exponent(&self) -> f64 {
        (self.d as f64 - 3.0) / 2.0
    }

    pub fn weight(&self, t: f64) -> f64 {
        (1.0 - t * t).powf(self.weight_exponent())
    }

    /// Coefficients `(A_n, B_n)` of `P_n = A_n t P_{n-1} - B_n P_{n-2}`, `n >= 2`.
    #[inline]
    fn recurrence(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let den = nf + 2.0 * self.lambda - 1.0;
        (2.0 * (nf + self.lambda - 1.0) / den, (nf - 1.0) / den)
    }
}

fn check_abscissa(t: f64) -> Result<()> {
    if t.abs() <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("abscissa must lie in [-1, 1], got {t}")))
    }
}

/// `P_n^{(d)}(t)` by the normalized three-term recurrence.
pub fn legendre_eval(spec: &BasisSpec, n: usize, t: f64) -> Result<f64> {
    check_abscissa(t)?;
    // Endpoint values are exact by normalization.
    if t == 1.0 {
        return Ok(1.0);
    }
    if t == -1.0 {
        return Ok(if n % 2 == 0 { 1.0 } else { -1.0 });
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = t;
    for k in 2..=n {
        let (a, b) = spec.recurrence(k);
        let next = a * t * cur - b * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `P_0(t), …, P_{n_max}(t)` written into `out` (resized to `n_max + 1`).
pub fn legendre_all_into(spec: &BasisSpec, n_max: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n_max == 0 {
        return;
    }
    out.push(t);
    for k in 2..=n_max {
        let (a, b) = spec.recurrence(k);
        let v = a * t * out[k - 1] - b * out[k - 2];
        out.push(v);
    }
}

pub fn legendre_all(spec: &BasisSpec, n_max: usize, t: f64) -> Result<Vec<f64>> {
    check_abscissa(t)?;
    let mut out = Vec::with_capacity(n_max + 1);
    legendre_all_into(spec, n_max, t, &mut out);
    Ok(out)
}

/// `ln N(d, n)`.
pub fn ln_n_mult(spec: &BasisSpec, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let d = spec.d as f64;
    let nf = n as f64;
    let lead = ((2.0 * nf + d - 2.0) / nf).ln();
    if spec.d == 2 {
        return lead;
    }
    // C(n+d-3, n-1) = Γ(n+d-2) / (Γ(n) Γ(d-1))
    let binom =
        log_gamma(nf + d - 2.0).unwrap() - log_gamma(nf).unwrap() - log_gamma(d - 1.0).unwrap();
    lead + binom
}

/// Multiplicity factor `N(d, n) = (2n+d-2)/n · C(n+d-3, n-1)`, `N(d, 0) = 1`.
pub fn n_mult(spec: &BasisSpec, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > 100 {
        return ln_n_mult(spec, n).exp();
    }
    // C(n+d-3, n-1) as a product over the shorter side
    let top = n + spec.d as usize - 3;
    let k = (n - 1).min(spec.d as usize - 2);
    let mut binom = 1.0;
    for j in 0..k {
        binom *= (top - j) as f64 / (j + 1) as f64;
    }
    (2 * n + spec.d as usize - 2) as f64 / n as f64 * binom
}

/// Surface area `|S_{d-1}| = 2 π^{d/2} / Γ(d/2)` of the unit sphere in `R^d`.
pub fn sphere_area(d: u32) -> Result<f64> {
    if d < 1 {
        return Err(domain("sphere_area requires d >= 1"));
    }
    let h = d as f64 / 2.0;
    Ok(2.0 * (h * PI.ln() - log_gamma(h)?).exp())
}

/// `|S_{d-2}| / |S_{d-1}|`.
pub fn sphere_area_ratio(spec: &BasisSpec) -> f64 {
    sphere_area(spec.d - 1).unwrap() / sphere_area(spec.d).unwrap()
}

/// `∫ P_n² w = |S_{d-1}| / (N(d,n) |S_{d-2}|)`.
pub fn basis_norm_sq(spec: &BasisSpec, n: usize) -> f64 {
    1.0 / (sphere_area_ratio(spec) * n_mult(spec, n))
}

/// How a quadrature rule was built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Gauss rule exact for polynomials up to `exactness_degree`.
    Gauss { exactness_degree: usize },
    /// Double-exponential rule in `θ = arccos t`; resolves polynomial factors
    /// up to `resolved_degree` and converges geometrically for integrands
    /// with algebraic endpoint singularities.
    DoubleExponential { step: f64, resolved_degree: usize },
}

/// Nodes and weights for `∫_{-1}^{1} g(t) w(t) dt ≈ Σ w_i g(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub spec: BasisSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    /// Highest polynomial degree of the `P_n` factor the rule is built for.
    pub fn degree(&self) -> usize {
        match self.kind {
            RuleKind::Gauss { exactness_degree } => exactness_degree,
            RuleKind::DoubleExponential {
                resolved_degree, ..
            } => resolved_degree,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix, by implicit QL with Wilkinson shifts.
fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&offdiag[..n - 1]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Numeric(format!(
                    "Jacobi-matrix eigensolver did not converge for eigenvalue {l} of {n} \
                     (|e| = {:e})",
                    e[l].abs()
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// `m`-node Gauss rule for the weight `(1-t²)^{(d-3)/2}` via the Golub–Welsch
/// eigenproblem of the monic Jacobi matrix.
pub fn build_quadrature(spec: &BasisSpec, m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(domain("quadrature needs at least one node"));
    }
    let lam = spec.lambda;
    // squared off-diagonal β_k = k (k+2λ-1) / (4 (k+λ)(k+λ-1)); β_1 = 1/(2(λ+1))
    let off: Vec<f64> = (1..m)
        .map(|k| {
            let kf = k as f64;
            let beta = if k == 1 {
                1.0 / (2.0 * (lam + 1.0))
            } else {
                kf * (kf + 2.0 * lam - 1.0) / (4.0 * (kf + lam) * (kf + lam - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    let diag = vec![0.0; m];
    let (vals, first) = tridiagonal_eigen(&diag, &off)?;
    let mu0 = basis_norm_sq(spec, 0);

    let mut pairs: Vec<(f64, f64)> = vals
        .into_iter()
        .zip(first)
        .map(|(x, v)| (x, mu0 * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // The weight is even: symmetrize to remove eigensolver round-off.
    let sym: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let (x, w) = pairs[i];
            let (xr, wr) = pairs[m - 1 - i];
            (0.5 * (x - xr), 0.5 * (w + wr))
        })
        .collect();
    let (nodes, weights): (Vec<f64>, Vec<f64>) = sym.into_iter().unzip();
    if weights.iter().any(|w| !(*w > 0.0)) || nodes.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Numeric(format!(
            "Gauss rule with {m} nodes for d = {} produced degenerate nodes or weights",
            spec.d
        )));
    }
    Ok(QuadratureRule {
        spec: *spec,
        nodes,
        weights,
        kind: RuleKind::Gauss {
            exactness_degree: 2 * m - 1,
        },
    })
}

/// Node count for projecting up to degree `n_max` with a Gauss rule.
pub fn margin_nodes(n_max: usize) -> usize {
    (4 * n_max).max(400)
}

const DE_UMAX: f64 = 3.5;

/// Double-exponential (tanh-sinh) rule in `θ = arccos t` resolving degree
/// `resolved_degree`.
///
/// With `t = cos θ` the weighted integral becomes
/// `∫_0^π g(cos θ) sin^{d-2} θ dθ`, on which `θ = π/2 (1 + tanh(π/2 sinh u))`
/// clusters nodes double-exponentially at both endpoints.
pub fn build_singular_quadrature(spec: &BasisSpec, resolved_degree: usize) -> QuadratureRule {
    let step = (1.0 / 64.0f64).min(1.5 / resolved_degree.max(1) as f64);
    let k_max = (DE_UMAX / step).ceil() as i64;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * k_max as usize + 1);
    let edge = 1.0 - f64::EPSILON / 2.0;
    for k in -k_max..=k_max {
        let u = k as f64 * step;
        let s = 0.5 * PI * u.sinh();
        // θ and π - θ evaluated separately to keep both ends accurate
        let theta = PI / (1.0 + (-2.0 * s).exp());
        let comp = PI / (1.0 + (2.0 * s).exp());
        let near = theta.min(comp);
        let dtheta = PI * PI * u.cosh() / (4.0 * s.cosh().powi(2));
        let w = step * dtheta * near.sin().powi(spec.d as i32 - 2);
        if !(w > 0.0) || !w.is_finite() {
            continue;
        }
        let t = if theta <= comp {
            theta.cos()
        } else {
            -comp.cos()
        };
        pts.push((t.clamp(-edge, edge), w));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // nodes that round to the same abscissa are merged
    let mut nodes: Vec<f64> = Vec::with_capacity(pts.len());
    let mut weights: Vec<f64> = Vec::with_capacity(pts.len());
    for (t, w) in pts {
        if nodes.last() == Some(&t) {
            *weights.last_mut().unwrap() += w;
        } else {
            nodes.push(t);
            weights.push(w);
        }
    }
    QuadratureRule {
        spec: *spec,
        nodes,
        weights,
        kind: RuleKind::DoubleExponential {
            step,
            resolved_degree,
        },
    }
}

/// How a coefficient sequence was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSource {
    ClosedForm,
    Quadrature,
    Analytic,
}

/// Legendre-series coefficients `a_0 … a_N` for a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeries {
    pub spec: BasisSpec,
    pub values: Vec<f64>,
    pub source: CoeffSource,
}

impl CoeffSeries {
    pub fn new(spec: BasisSpec, values: Vec<f64>, source: CoeffSource) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: *v,
                location: format!("coefficient {i}"),
            });
        }
        Ok(Self {
            spec,
            values,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Highest index `N` held.
    pub fn degree(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// CSV with header `n,a_n`; reals as 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "a_n"])?;
        for (n, v) in self.values.iter().enumerate() {
            wr.write_record([n.to_string(), format_real(*v)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, spec: BasisSpec, source: CoeffSource) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut values = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let n: usize = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Validation(format!("row {row}: bad index")))?;
            if n != values.len() {
                return Err(Error::Validation(format!(
                    "row {row}: expected n = {}, got {n}",
                    values.len()
                )));
            }
            let v: f64 = rec
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Validation(format!("row {row}: bad coefficient")))?;
            values.push(v);
        }
        Self::new(spec, values, source)
    }
}

/// Decimal with 17 significant digits; parses back to the identical `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Legendre coefficients `a_n = N(d,n) |S_{d-2}|/|S_{d-1}| ∫ f P_n w`, `n <= n_max`.
pub fn project<F: Fn(f64) -> f64>(
    f: F,
    spec: &BasisSpec,
    n_max: usize,
    rule: &QuadratureRule,
) -> Result<CoeffSeries> {
    if rule.spec != *spec {
        return Err(Error::DimensionMismatch {
            expected: spec.d as usize,
            got: rule.spec.d as usize,
        });
    }
    if rule.degree() < n_max {
        return Err(domain(format!(
            "quadrature resolves degree {} but projection up to {n_max} was requested",
            rule.degree()
        )));
    }
    let mut acc = vec![0.0; n_max + 1];
    let mut p = Vec::with_capacity(n_max + 1);
    for (i, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let fv = f(t);
        if !fv.is_finite() {
            return Err(Error::NonFinite {
                value: fv,
                location: format!("quadrature node {i} (t = {t:e})"),
            });
        }
        let wf = w * fv;
        legendre_all_into(spec, n_max, t, &mut p);
        for (a, pn) in acc.iter_mut().zip(&p) {
            *a += wf * pn;
        }
    }
    let ratio = sphere_area_ratio(spec);
    let values = acc
        .into_iter()
        .enumerate()
        .map(|(n, a)| n_mult(spec, n) * ratio * a)
        .collect();
    CoeffSeries::new(*spec, values, CoeffSource::Quadrature)
}

/// Partial sum `Σ a_n P_n(t)`, recurrence and accumulation in one pass.
pub fn series_eval(coeffs: &CoeffSeries, t: f64) -> Result<f64> {
    check_abscissa(t)?;
    let spec = &coeffs.spec;
    let a = &coeffs.values;
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut sum = a[0];
    if a.len() == 1 {
        return Ok(sum);
    }
    let (mut prev, mut cur) = (1.0, t);
    sum += a[1] * cur;
    for (n, an) in a.iter().enumerate().skip(2) {
        let (ca, cb) = spec.recurrence(n);
        let next = ca * t * cur - cb * prev;
        prev = cur;
        cur = next;
        sum += an * cur;
    }
    Ok(sum)
}

/// `∫_{S_{d-1}} f(⟨η,ξ⟩) dσ(ξ) = |S_{d-2}| ∫ f w`.
pub fn radial_sphere_integral<F: Fn(f64) -> f64>(
    f: F,
    spec: &BasisSpec,
    rule: &QuadratureRule,
) -> Result<f64> {
    if rule.spec != *spec {
        return Err(Error::DimensionMismatch {
            expected: spec.d as usize,
            got: rule.spec.d as usize,
        });
    }
    let mut acc = 0.0;
    for (i, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let fv = f(t);
        if !fv.is_finite() {
            return Err(Error::NonFinite {
                value: fv,
                location: format!("quadrature node {i} (t = {t:e})"),
            });
        }
        acc += w * fv;
    }
    Ok(sphere_area(spec.d - 1)? * acc)
}

/// `∫ f(⟨η,ξ⟩) g(⟨ζ,ξ⟩) dσ(ξ) = |S_{d-1}| Σ a_n b_n / N(d,n) P_n(⟨η,ζ⟩)`,
/// truncated at the shorter series.
pub fn product_integral_series(a: &CoeffSeries, b: &CoeffSeries, s: f64) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::DimensionMismatch {
            expected: a.spec.d as usize,
            got: b.spec.d as usize,
        });
    }
    let spec = a.spec;
    let len = a.len().min(b.len());
    let combined: Vec<f64> = (0..len)
        .map(|n| a.values[n] * b.values[n] / n_mult(&spec, n))
        .collect();
    let series = CoeffSeries::new(spec, combined, CoeffSource::Analytic)?;
    Ok(sphere_area(spec.d)? * series_eval(&series, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(d: u32) -> BasisSpec {
        BasisSpec::new(d).unwrap()
    }

    /// Monomial coefficients of P_n^{(d)} from the Rodrigues formula (computed
    /// symbolically, normalized by the value at t = 1).
    const RODRIGUES: &[(u32, usize, &[f64])] = &[
        (2, 0, &[1.0]),
        (2, 1, &[0.0, 1.0]),
        (2, 2, &[-1.0, 0.0, 2.0]),
        (2, 3, &[0.0, -3.0, 0.0, 4.0]),
        (2, 4, &[1.0, 0.0, -8.0, 0.0, 8.0]),
        (2, 5, &[0.0, 5.0, 0.0, -20.0, 0.0, 16.0]),
        (2, 6, &[-1.0, 0.0, 18.0, 0.0, -48.0, 0.0, 32.0]),
        (2, 7, &[0.0, -7.0, 0.0, 56.0, 0.0, -112.0, 0.0, 64.0]),
        (
            2,
            8,
            &[1.0, 0.0, -32.0, 0.0, 160.0, 0.0, -256.0, 0.0, 128.0],
        ),
        (3, 0, &[1.0]),
        (3, 1, &[0.0, 1.0]),
        (3, 2, &[-1.0 / 2.0, 0.0, 3.0 / 2.0]),
        (3, 3, &[0.0, -3.0 / 2.0, 0.0, 5.0 / 2.0]),
        (3, 4, &[3.0 / 8.0, 0.0, -15.0 / 4.0, 0.0, 35.0 / 8.0]),
        (3, 5, &[0.0, 15.0 / 8.0, 0.0, -35.0 / 4.0, 0.0, 63.0 / 8.0]),
        (
            3,
            6,
            &[
                -5.0 / 16.0,
                0.0,
                105.0 / 16.0,
                0.0,
                -315.0 / 16.0,
                0.0,
                231.0 / 16.0,
            ],
        ),
        (
            3,
            7,
            &[
                0.0,
                -35.0 / 16.0,
                0.0,
                315.0 / 16.0,
                0.0,
                -693.0 / 16.0,
                0.0,
                429.0 / 16.0,
            ],
        ),
        (
            3,
            8,
            &[
                35.0 / 128.0,
                0.0,
                -315.0 / 32.0,
                0.0,
                3465.0 / 64.0,
                0.0,
                -3003.0 / 32.0,
                0.0,
                6435.0 / 128.0,
            ],
        ),
        (4, 0, &[1.0]),
        (4, 1, &[0.0, 1.0]),
        (4, 2, &[-1.0 / 3.0, 0.0, 4.0 / 3.0]),
        (4, 3, &[0.0, -1.0, 0.0, 2.0]),
        (4, 4, &[1.0 / 5.0, 0.0, -12.0 / 5.0, 0.0, 16.0 / 5.0]),
        (4, 5, &[0.0, 1.0, 0.0, -16.0 / 3.0, 0.0, 16.0 / 3.0]),
        (
            4,
            6,
            &[
                -1.0 / 7.0,
                0.0,
                24.0 / 7.0,
                0.0,
                -80.0 / 7.0,
                0.0,
                64.0 / 7.0,
            ],
        ),
        (4, 7, &[0.0, -1.0, 0.0, 10.0, 0.0, -24.0, 0.0, 16.0]),
        (
            4,
            8,
            &[
                1.0 / 9.0,
                0.0,
                -40.0 / 9.0,
                0.0,
                80.0 / 3.0,
                0.0,
                -448.0 / 9.0,
                0.0,
                256.0 / 9.0,
            ],
        ),
        (5, 0, &[1.0]),
        (5, 1, &[0.0, 1.0]),
        (5, 2, &[-1.0 / 4.0, 0.0, 5.0 / 4.0]),
        (5, 3, &[0.0, -3.0 / 4.0, 0.0, 7.0 / 4.0]),
        (5, 4, &[1.0 / 8.0, 0.0, -7.0 / 4.0, 0.0, 21.0 / 8.0]),
        (5, 5, &[0.0, 5.0 / 8.0, 0.0, -15.0 / 4.0, 0.0, 33.0 / 8.0]),
        (
            5,
            6,
            &[
                -5.0 / 64.0,
                0.0,
                135.0 / 64.0,
                0.0,
                -495.0 / 64.0,
                0.0,
                429.0 / 64.0,
            ],
        ),
        (
            5,
            7,
            &[
                0.0,
                -35.0 / 64.0,
                0.0,
                385.0 / 64.0,
                0.0,
                -1001.0 / 64.0,
                0.0,
                715.0 / 64.0,
            ],
        ),
        (
            5,
            8,
            &[
                7.0 / 128.0,
                0.0,
                -77.0 / 32.0,
                0.0,
                1001.0 / 64.0,
                0.0,
                -1001.0 / 32.0,
                0.0,
                2431.0 / 128.0,
            ],
        ),
    ];

    fn horner(c: &[f64], t: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
    }

    #[test]
    fn legendre_examples() {
        assert!((legendre_eval(&spec(3), 2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        for d in 2..7 {
            assert_eq!(legendre_eval(&spec(d), 0, 0.37).unwrap(), 1.0);
        }
        let t = 0.7f64.cos();
        assert!((legendre_eval(&spec(2), 3, t).unwrap() - 2.1f64.cos()).abs() < 1e-14);
        assert!(legendre_eval(&spec(3), 3, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn legendre_endpoints_exact() {
        for d in 2..8 {
            for n in 0..50 {
                assert_eq!(legendre_eval(&spec(d), n, 1.0).unwrap(), 1.0);
                let want = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(legendre_eval(&spec(d), n, -1.0).unwrap(), want);
            }
        }
    }

    #[test]
    fn recurrence_matches_rodrigues_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(d, n, c) in RODRIGUES {
            for _ in 0..20 {
                let t: f64 = rng.random_range(-1.0..1.0);
                let got = legendre_eval(&spec(d), n, t).unwrap();
                assert!((got - horner(c, t)).abs() < 1e-12, "d={d} n={n} t={t}");
            }
        }
    }

    #[test]
    fn n_mult_examples() {
        assert_eq!(n_mult(&spec(3), 0), 1.0);
        assert_eq!(n_mult(&spec(3), 1), 3.0);
        assert_eq!(n_mult(&spec(2), 5), 2.0);
        assert_eq!(n_mult(&spec(3), 17), 35.0);
        // d = 4: N = (n+1)^2
        assert!((n_mult(&spec(4), 9) - 100.0).abs() < 1e-12);
        // log-domain branch agrees with the product branch
        for d in 2..7 {
            let s = spec(d);
            for n in [101usize, 150, 1000] {
                let direct = {
                    let top = n + d as usize - 3;
                    let k = (n - 1).min(d as usize - 2);
                    let mut b = 1.0;
                    for j in 0..k {
                        b *= (top - j) as f64 / (j + 1) as f64;
                    }
                    (2 * n + d as usize - 2) as f64 / n as f64 * b
                };
                assert!(((n_mult(&s, n) - direct) / direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn n_mult_growth_rate() {
        for d in 2..7 {
            let s = spec(d);
            let r = |n: usize| n_mult(&s, n) / (n as f64).powi(d as i32 - 2);
            assert!(((r(1000) - r(10_000)) / r(10_000)).abs() < 0.01);
        }
    }

    #[test]
    fn norm_examples() {
        assert!((basis_norm_sq(&spec(3), 0) - 2.0).abs() < 1e-14);
        assert!((basis_norm_sq(&spec(3), 2) - 0.4).abs() < 1e-14);
        assert!((basis_norm_sq(&spec(2), 4) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_area_examples() {
        assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(1).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_rule_examples() {
        let r = build_quadrature(&spec(3), 1).unwrap();
        assert!(r.nodes[0].abs() < 1e-15 && (r.weights[0] - 2.0).abs() < 1e-14);
        let r = build_quadrature(&spec(3), 2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-14 && (r.weights[1] - 1.0).abs() < 1e-14);
        let r = build_quadrature(&spec(2), 3).unwrap();
        for (k, (&t, &w)) in r.nodes.iter().zip(&r.weights).enumerate() {
            let want = ((2.0 * (3 - k) as f64 - 1.0) * PI / 6.0).cos();
            assert!((t - want).abs() < 1e-14);
            assert!((w - PI / 3.0).abs() < 1e-14);
        }
        assert!(build_quadrature(&spec(3), 0).is_err());
    }

    #[test]
    fn gauss_rule_is_exact_to_degree() {
        for d in 2..6 {
            let s = spec(d);
            let r = build_quadrature(&s, 12).unwrap();
            for k in 0..=23usize {
                let got = r.integrate(|t| t.powi(k as i32));
                // ∫ t^k w = B((k+1)/2, (d-1)/2) for even k
                let want = if k % 2 == 1 {
                    0.0
                } else {
                    let a = (k as f64 + 1.0) / 2.0;
                    let b = (d as f64 - 1.0) / 2.0;
                    (log_gamma(a).unwrap() + log_gamma(b).unwrap() - log_gamma(a + b).unwrap())
                        .exp()
                };
                assert!(
                    (got - want).abs() <= 1e-13 * (1.0 + want.abs()),
                    "d={d} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn large_gauss_rule_builds() {
        let r = build_quadrature(&spec(3), 2000).unwrap();
        assert_eq!(r.len(), 2000);
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_rule_integrates_weight() {
        for d in 2..7 {
            let s = spec(d);
            let r = build_singular_quadrature(&s, 50);
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let mass: f64 = r.weights.iter().sum();
            assert!(
                ((mass - basis_norm_sq(&s, 0)) / mass).abs() < 1e-13,
                "d={d}"
            );
        }
    }

    #[test]
    fn projection_examples() {
        let s = spec(4);
        let rule = build_quadrature(&s, 40).unwrap();
        let c = project(|t| legendre_eval(&s, 3, t).unwrap(), &s, 10, &rule).unwrap();
        for (n, v) in c.values.iter().enumerate() {
            let want = if n == 3 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "n={n}: {v}");
        }
        let c = project(|_| 1.0, &s, 10, &rule).unwrap();
        assert!((c.values[0] - 1.0).abs() < 1e-13);
        assert!(c.values[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn projection_reports_bad_node() {
        let s = spec(3);
        let rule = build_quadrature(&s, 8).unwrap();
        let err = project(|t| if t > 0.5 { f64::NAN } else { t }, &s, 4, &rule).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        let err = project(|t| t, &s, 40, &rule).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn series_eval_examples() {
        let s = spec(3);
        let one = CoeffSeries::new(s, vec![1.0], CoeffSource::Analytic).unwrap();
        assert_eq!(series_eval(&one, -0.3).unwrap(), 1.0);
        let lin = CoeffSeries::new(s, vec![0.0, 1.0], CoeffSource::Analytic).unwrap();
        assert!((series_eval(&lin, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!(series_eval(&lin, 1.5).is_err());
        let rule = build_singular_quadrature(&s, 200);
        let c = project(|t| (1.0 - t).sqrt(), &s, 200, &rule).unwrap();
        assert!((series_eval(&c, 0.0).unwrap() - 1.0).abs() < 2e-3);
    }

    #[test]
    fn radial_integral_examples() {
        let s = spec(3);
        let rule = build_quadrature(&s, 10).unwrap();
        assert!((radial_sphere_integral(|_| 1.0, &s, &rule).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!(radial_sphere_integral(|t| t, &s, &rule).unwrap().abs() < 1e-14);
        assert!(
            (radial_sphere_integral(|t| t * t, &s, &rule).unwrap() - 4.0 * PI / 3.0).abs() < 1e-13
        );
    }

    #[test]
    fn product_integral_examples() {
        let s = spec(3);
        let c0 = CoeffSeries::new(s, vec![1.0], CoeffSource::Analytic).unwrap();
        assert!((product_integral_series(&c0, &c0, 0.2).unwrap() - 4.0 * PI).abs() < 1e-13);
        let c1 = CoeffSeries::new(s, vec![0.0, 1.0], CoeffSource::Analytic).unwrap();
        assert!((product_integral_series(&c1, &c1, 1.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-13);
        let p2 = CoeffSeries::new(s, vec![0.0, 0.0, 1.0, 0.0], CoeffSource::Analytic).unwrap();
        let p3 = CoeffSeries::new(s, vec![0.0, 0.0, 0.0, 1.0], CoeffSource::Analytic).unwrap();
        assert_eq!(product_integral_series(&p2, &p3, 0.4).unwrap(), 0.0);
        let other = CoeffSeries::new(spec(4), vec![1.0], CoeffSource::Analytic).unwrap();
        assert!(product_integral_series(&c0, &other, 0.0).is_err());
    }

    #[test]
    fn coeff_series_rejects_non_finite() {
        assert!(
            CoeffSeries::new(spec(3), vec![1.0, f64::INFINITY], CoeffSource::Analytic).is_err()
        );
    }

    #[test]
    fn csv_and_json_round_trip_bit_exact() {
        let s = spec(5);
        let vals = vec![1.0, -0.1, 1.0 / 3.0, 2.5e-300, std::f64::consts::E * 1e12];
        let c = CoeffSeries::new(s, vals, CoeffSource::ClosedForm).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = CoeffSeries::read_csv(&buf[..], s, CoeffSource::ClosedForm).unwrap();
        assert_eq!(back, c);
        let json = serde_json::to_string(&c).unwrap();
        let back: CoeffSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<BasisSpec>(r#"{"d":3,"lambda":0.25}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounded_by_one(d in 2u32..8, n in 0usize..500, t in -1.0f64..=1.0) {
                let v = legendre_eval(&spec(d), n, t).unwrap();
                prop_assert!(v.abs() <= 1.0 + 1e-10);
            }

            #[test]
            fn parity(d in 2u32..8, n in 0usize..200, t in -1.0f64..=1.0) {
                let s = spec(d);
                let a = legendre_eval(&s, n, -t).unwrap();
                let b = legendre_eval(&s, n, t).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!((a - sign * b).abs() <= 1e-12);
            }
        }
    }
}
