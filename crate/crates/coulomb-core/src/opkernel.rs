//! Exact 1-point densities via weighted orthogonal polynomials.
//!
//! For a radial potential the monomials are orthogonal under the weight
//! `e^{-nQ}`, so the kernel diagonal reduces to
//! `R_n(r) = Σ_{j<n} r^{2j} e^{-n q(r)} / h_j` with squared norms
//! `h_j = 2 ∫_0^∞ r^{2j+1} e^{-n q(r)} dr`. The norms span thousands of
//! orders of magnitude once `n` reaches a few hundred, so everything is
//! carried in log scale: [`radial_norms`] integrates each norm with its
//! Laplace maximum factored out, and [`density_radial`] assembles the sum
//! with [`crate::specfun::logsumexp`].
//!
//! Independent cross-checks live alongside the fast paths: a closed form
//! for the Ginibre potential ([`ginibre_density_closed`]), a brute-force
//! Gram–Schmidt oracle valid for any planar weight at small `n`
//! ([`gram_oracle`]), and a Hermite-recurrence evaluator for the elliptic
//! Ginibre potential ([`EllipticKernel`]) that refuses to construct unless
//! it matches the oracle.

use std::sync::Arc;

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::potential::{EdgeData, EllipticGinibrePotential, RadialPotential};
use crate::quad;
use crate::specfun::{logsumexp, LogScaleValue};
use crate::{Error, Result};

/// Largest supported polynomial count for [`radial_norms`].
pub const MAX_BASIS_N: usize = 100_000;

/// Log-scale squared norms `h_j = ⟨z^j, z^j⟩` of the monomials under
/// `e^{-nQ} dA/π`, for one radial potential at one `n`.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    n: usize,
    log_h: Vec<f64>,
    label: String,
}

impl OrthoBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `log h_j` for `j < n`.
    pub fn log_h(&self) -> &[f64] {
        &self.log_h
    }

    /// Label of the potential the basis was built for.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Negative-control hook: a copy with every norm inflated by the
    /// relative factor `rel`. Densities built from the result are wrong by
    /// construction; verification harnesses use it to prove their checks
    /// can fail.
    pub fn with_perturbed_norms(&self, rel: f64) -> Self {
        let shift = rel.ln_1p();
        Self {
            n: self.n,
            log_h: self.log_h.iter().map(|l| l + shift).collect(),
            label: self.label.clone(),
        }
    }
}

/// Log of the norm integrand, `g_j(r) = (2j+1) log r − n q(r)`.
fn log_norm_integrand(pot: &RadialPotential, nf: f64, target: f64, r: f64) -> f64 {
    target * r.ln() - nf * pot.q(r)
}

/// Solves `n r q'(r) = target` (the maximum of the norm integrand) by
/// Newton iteration from a warm-start guess, with a bracketing fallback.
fn laplace_point(pot: &RadialPotential, nf: f64, target: f64, guess: f64) -> Result<f64> {
    let phi = |r: f64| nf * r * pot.dq(r) - target;
    let dphi = |r: f64| nf * (pot.dq(r) + r * pot.d2q(r));

    let mut r = guess;
    for _ in 0..100 {
        let f = phi(r);
        if f.abs() <= 1e-10 * target.max(1.0) {
            return Ok(r);
        }
        let next = r - f / dphi(r);
        if !(next.is_finite() && next > 0.0) {
            break;
        }
        r = next;
    }

    // Newton failed to settle; bisect a bracket grown from below
    let mut lo = 1e-8;
    let mut hi = guess.max(1e-8);
    let mut tries = 0;
    while phi(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Numeric(format!(
                "no maximum of the norm integrand found for target {target}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Integrates one norm with its Laplace maximum factored out, returning
/// `log h_j = log 2 + g_j(r*) + log ∫ e^{g_j − g_j(r*)} dr`.
fn log_norm(pot: &RadialPotential, nf: f64, j: usize, r_star: f64) -> Result<f64> {
    let target = 2.0 * j as f64 + 1.0;
    let peak = log_norm_integrand(pot, nf, target, r_star);
    // Gaussian width at the maximum sets the initial bracket
    let curvature = target / (r_star * r_star) + nf * pot.d2q(r_star);
    let sigma = curvature.recip().sqrt().min(r_star);

    let drop = |r: f64| log_norm_integrand(pot, nf, target, r) - peak;
    let mut width = 6.0 * sigma;
    let mut lo = (r_star - width).max(0.0);
    while lo > 0.0 && drop(lo) > -45.0 {
        width *= 2.0;
        lo = (r_star - width).max(0.0);
    }
    let mut hi = r_star + 6.0 * sigma;
    let mut tries = 0;
    while drop(hi) > -45.0 {
        hi = r_star + (hi - r_star) * 2.0;
        tries += 1;
        if tries > 300 {
            return Err(Error::Numeric(format!(
                "norm integrand for j = {j} does not decay above the maximum"
            )));
        }
    }

    let integral = quad::integrate(|r| drop(r).exp(), lo, hi, 1e-12)
        .map_err(|e| Error::Numeric(format!("norm quadrature failed for j = {j}: {e}")))?;
    Ok(2.0f64.ln() + peak + integral.value.ln())
}

/// Monomial norms for `e^{-nQ} dA/π`, computed by Laplace-stabilized
/// quadrature with relative accuracy around `1e-12` per norm.
///
/// The `n` maxima are located sequentially (each Newton solve warm-starts
/// from the previous maximum); the `n` quadratures then run independently.
pub fn radial_norms(pot: &RadialPotential, n: usize) -> Result<OrthoBasis> {
    if !(1..=MAX_BASIS_N).contains(&n) {
        return Err(Error::Domain(format!(
            "basis size n = {n} is outside [1, {MAX_BASIS_N}]"
        )));
    }
    let nf = n as f64;

    let mut peaks = Vec::with_capacity(n);
    let mut guess = 1.0;
    for j in 0..n {
        let target = 2.0 * j as f64 + 1.0;
        let r_star = laplace_point(pot, nf, target, guess)?;
        peaks.push(r_star);
        guess = r_star;
    }

    #[cfg(feature = "parallel")]
    let log_h = peaks
        .par_iter()
        .enumerate()
        .map(|(j, &r_star)| log_norm(pot, nf, j, r_star))
        .collect::<Result<Vec<f64>>>()?;
    #[cfg(not(feature = "parallel"))]
    let log_h = peaks
        .iter()
        .enumerate()
        .map(|(j, &r_star)| log_norm(pot, nf, j, r_star))
        .collect::<Result<Vec<f64>>>()?;

    for (j, value) in log_h.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "norm for j = {j} is not finite in log scale"
            )));
        }
    }
    Ok(OrthoBasis {
        n,
        log_h,
        label: pot.label().to_string(),
    })
}

/// Log-scale term `r^{2j} e^{-n q(r)} / h_j` of the density sum.
fn density_term(basis: &OrthoBasis, pot: &RadialPotential, r: f64, j: usize) -> LogScaleValue {
    if r == 0.0 && j > 0 {
        return LogScaleValue::zero();
    }
    let log_pow = if j == 0 { 0.0 } else { 2.0 * j as f64 * r.ln() };
    let log_term = log_pow - basis.n as f64 * pot.q(r) - basis.log_h[j];
    LogScaleValue::from_log(1, log_term)
}

fn density_partial_sum(
    basis: &OrthoBasis,
    pot: &RadialPotential,
    r: f64,
    j_lo: usize,
) -> Result<f64> {
    if basis.label != pot.label() {
        return Err(Error::Misuse(format!(
            "basis built for '{}' evaluated with potential '{}'",
            basis.label,
            pot.label()
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("density requires r >= 0, got {r}")));
    }
    if j_lo >= basis.n {
        return Ok(0.0);
    }
    let terms: Vec<LogScaleValue> = (j_lo..basis.n)
        .map(|j| density_term(basis, pot, r, j))
        .collect();
    Ok(logsumexp(&terms)?.value())
}

/// The 1-point density `R_n(r) = Σ_{j<n} r^{2j} e^{-n q(r)} / h_j`.
///
/// Errors with [`Error::Misuse`] if the basis was built for a different
/// potential (by label), and with [`Error::Domain`] for `r < 0`.
pub fn density_radial(basis: &OrthoBasis, pot: &RadialPotential, r: f64) -> Result<f64> {
    density_partial_sum(basis, pot, r, 0)
}

/// Partial density over the top `C √(n log n)` indices only, the part of
/// the sum that carries the edge profile.
///
/// Near the edge (`|t| ≲ √(log n)`) the truncation error is below
/// `1e-6 · n` for `C ≥ 3`; in the deep bulk the discarded indices dominate
/// and the truncated sum is far below the full one.
pub fn truncated_density(basis: &OrthoBasis, pot: &RadialPotential, r: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "truncation constant must be positive, got {c}"
        )));
    }
    let nf = basis.n as f64;
    let count = (c * (nf * nf.ln()).sqrt()).ceil() as usize;
    let j_lo = basis.n.saturating_sub(count);
    density_partial_sum(basis, pot, r, j_lo)
}

/// Total mass `∫ R_n dA/π = 2 ∫_0^∞ R_n(r) r dr` of the density.
///
/// Equals `n` (the trace of a rank-`n` reproducing kernel) up to quadrature
/// error; the mass acceptance checks hold this to `1e-8 · n`.
pub fn kernel_mass(basis: &OrthoBasis, pot: &RadialPotential) -> Result<f64> {
    if basis.label != pot.label() {
        return Err(Error::Misuse(format!(
            "basis built for '{}' evaluated with potential '{}'",
            basis.label,
            pot.label()
        )));
    }
    let result = quad::integrate_to_inf(
        |r| 2.0 * r * density_partial_sum(basis, pot, r, 0).expect("density is defined for r >= 0"),
        0.0,
        1e-11,
    )?;
    Ok(result.value)
}

/// Ginibre (`Q = r²`) density in closed form,
/// `R_n(r) = n e^{-nr²} Σ_{j<n} (nr²)^j/j! = n Q(n, nr²)` with the
/// regularized upper incomplete gamma function.
pub fn ginibre_density_closed(n: usize, r: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain(format!("requires n >= 1, got {n}")));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("requires r >= 0, got {r}")));
    }
    let nf = n as f64;
    Ok(nf * crate::specfun::regularized_gamma_q(nf, nf * r * r)?)
}

type PlanarWeight = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// Brute-force reproducing-kernel oracle for an arbitrary planar potential
/// at small `n`. See [`gram_oracle`].
pub struct GramOracle {
    n: usize,
    n_weight: f64,
    q: PlanarWeight,
    // orthonormal polynomial coefficients over monomials, row i = p_i
    coeffs: Vec<Vec<Complex64>>,
    gram: Vec<Vec<Complex64>>,
    condition: f64,
}

impl std::fmt::Debug for GramOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GramOracle")
            .field("n", &self.n)
            .field("condition", &self.condition)
            .finish_non_exhaustive()
    }
}

impl GramOracle {
    /// Kernel diagonal `K_n(z, z) = Σ_i |p_i(z)|² e^{-n Q(z)}`.
    pub fn density(&self, z: Complex64) -> f64 {
        let weight = (-self.n_weight * (self.q)(z)).exp();
        let mut total = 0.0;
        for row in &self.coeffs {
            let mut p = Complex64::new(0.0, 0.0);
            let mut zk = Complex64::new(1.0, 0.0);
            for &c in row {
                p += c * zk;
                zk *= z;
            }
            total += p.norm_sqr();
        }
        total * weight
    }

    /// Monomial inner product `⟨z^j, z^k⟩` under `e^{-nQ} dA/π`.
    pub fn monomial_gram(&self, j: usize, k: usize) -> Complex64 {
        self.gram[j][k]
    }

    /// Estimated 2-norm condition number of the monomial Gram matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

fn mat_vec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
#[allow(clippy::needless_range_loop)]
fn lu_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = b.len();
    let mut m: Vec<Vec<Complex64>> = a.iter().map(|row| row.to_vec()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .expect("non-empty pivot range");
        if m[pivot][col].norm() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
            let sub = factor * x[col];
            x[row] -= sub;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Largest eigenvalue of a Hermitian positive semi-definite operator by
/// power iteration with a fixed deterministic start.
fn power_iteration(apply: impl Fn(&[Complex64]) -> Vec<Complex64>, n: usize) -> f64 {
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.3 * (i as f64 + 1.0)))
        .collect();
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let scale = norm(&v);
    v.iter_mut().for_each(|c| *c /= scale);
    let mut lambda = 0.0;
    for _ in 0..300 {
        let w = apply(&v);
        let next = norm(&w);
        if next == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|c| c / next).collect();
        if (next - lambda).abs() <= 1e-12 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Brute-force kernel oracle: orthonormalizes `{z^j}_{j<n}` under
/// `e^{-nQ} dA/π` by modified Gram–Schmidt on a tensor Gauss–Legendre grid
/// (200×200 nodes over a box grown from half-width `3 · droplet_scale`
/// until the weight at the box boundary is below `1e-18`).
///
/// Errors with [`Error::Domain`] for `n > 8`, and with [`Error::Numeric`]
/// when the monomial Gram matrix has condition number above `1e8` or the
/// produced basis fails to be orthonormal to `1e-10`.
pub fn gram_oracle(
    weight: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    droplet_scale: f64,
    n: usize,
) -> Result<GramOracle> {
    if !(1..=8).contains(&n) {
        return Err(Error::Domain(format!(
            "gram oracle supports 1 <= n <= 8, got {n}"
        )));
    }
    if !(droplet_scale > 0.0) {
        return Err(Error::Domain(format!(
            "droplet scale must be positive, got {droplet_scale}"
        )));
    }
    let q: PlanarWeight = Arc::new(weight);
    let nf = n as f64;

    let mut half_width = 3.0 * droplet_scale;
    let mut grown = 0;
    loop {
        let mut worst: f64 = 0.0;
        for i in 0..=32 {
            let u = -half_width + 2.0 * half_width * f64::from(i) / 32.0;
            for z in [
                Complex64::new(u, half_width),
                Complex64::new(u, -half_width),
                Complex64::new(half_width, u),
                Complex64::new(-half_width, u),
            ] {
                worst = worst.max((-nf * q(z)).exp());
            }
        }
        if worst <= 1e-18 {
            break;
        }
        half_width *= 1.25;
        grown += 1;
        if grown > 60 {
            return Err(Error::Numeric(
                "weight does not decay on any attempted quadrature box".into(),
            ));
        }
    }

    let (nodes, weights) = quad::gauss_legendre(200);
    let axis: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| (half_width * x, half_width * w))
        .collect();

    let mut gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut powers = vec![Complex64::new(0.0, 0.0); n];
    for &(x, wx) in &axis {
        for &(y, wy) in &axis {
            let z = Complex64::new(x, y);
            let w = wx * wy * (-nf * q(z)).exp() / std::f64::consts::PI;
            if w == 0.0 {
                continue;
            }
            let mut zk = Complex64::new(1.0, 0.0);
            for p in powers.iter_mut() {
                *p = zk;
                zk *= z;
            }
            for j in 0..n {
                for k in 0..n {
                    gram[j][k] += powers[j] * powers[k].conj() * w;
                }
            }
        }
    }

    let lambda_max = power_iteration(|v| mat_vec(&gram, v), n);
    let inv_lambda_min = power_iteration(
        |v| lu_solve(&gram, v).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n]),
        n,
    );
    let condition = if inv_lambda_min == 0.0 {
        f64::INFINITY
    } else {
        lambda_max * inv_lambda_min
    };
    if !(condition <= 1e8) {
        return Err(Error::Numeric(format!(
            "monomial Gram matrix condition {condition:.3e} exceeds 1e8; oracle unreliable"
        )));
    }

    // modified Gram-Schmidt in coefficient space, two passes
    let ip = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += u[j] * v[k].conj() * gram[j][k];
            }
        }
        acc
    };
    let mut coeffs: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[i] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    for i in 0..n {
        for _pass in 0..2 {
            for prev in 0..i {
                let proj = ip(&coeffs[i], &coeffs[prev]);
                let prev_row = coeffs[prev].clone();
                for (c, p) in coeffs[i].iter_mut().zip(prev_row) {
                    *c -= proj * p;
                }
            }
        }
        let norm = ip(&coeffs[i], &coeffs[i]).re.sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numeric(format!(
                "orthonormalization collapsed at polynomial {i}"
            )));
        }
        coeffs[i].iter_mut().for_each(|c| *c /= norm);
    }

    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((ip(&coeffs[i], &coeffs[j]) - expected).norm());
        }
    }
    if defect > 1e-10 {
        return Err(Error::Numeric(format!(
            "orthonormalization defect {defect:.3e} exceeds 1e-10"
        )));
    }

    Ok(GramOracle {
        n,
        n_weight: nf,
        q,
        coeffs,
        gram,
        condition,
    })
}

/// Fast elliptic Ginibre density via a rescaled Hermite recurrence.
///
/// Construction is gated: the same recurrence at `n ∈ {4, 8}` must match
/// [`gram_oracle`] within `1e-7` at five probe points, and for `n ≤ 64`
/// the mass `∫ R_n dA/π` must equal `n` within `1e-6 · n`, otherwise the
/// constructor refuses.
#[derive(Debug, Clone, Copy)]
pub struct EllipticKernel {
    tau: f64,
    n: usize,
}

impl EllipticKernel {
    /// Requires `τ ∈ (0, 0.8]` and `1 ≤ n ≤ 4096`.
    pub fn new(tau: f64, n: usize) -> Result<Self> {
        if !(tau > 0.0 && tau <= 0.8) {
            return Err(Error::Domain(format!(
                "elliptic kernel requires tau in (0, 0.8], got {tau}"
            )));
        }
        if !(1..=4096).contains(&n) {
            return Err(Error::Domain(format!(
                "elliptic kernel requires 1 <= n <= 4096, got {n}"
            )));
        }
        let kernel = Self { tau, n };

        let probes = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, 0.2),
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.7, 0.1),
            Complex64::new(0.5, -0.4),
        ];
        for m in [4usize, 8] {
            let pot = EllipticGinibrePotential::new(tau)?;
            let oracle = gram_oracle(move |z| pot.q(z), 1.0 + tau, m)?;
            let small = Self { tau, n: m };
            for &z in &probes {
                let fast = small.density(z)?;
                let slow = oracle.density(z);
                if (fast - slow).abs() > 1e-7 * slow.abs().max(1e-20) {
                    return Err(Error::Validation(format!(
                        "elliptic recurrence disagrees with the Gram oracle at n = {m}, z = {z}: {fast:.12e} vs {slow:.12e}"
                    )));
                }
            }
        }

        if n <= 64 {
            let mass = kernel.mass()?;
            if (mass - n as f64).abs() > 1e-6 * n as f64 {
                return Err(Error::Validation(format!(
                    "elliptic kernel mass {mass:.9} differs from n = {n} beyond 1e-6 n"
                )));
            }
        }
        Ok(kernel)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `R_n(z)` for `Q = (|z|² − τ Re z²)/(1−τ²)`.
    ///
    /// Uses `R_n = (n/√(1−τ²)) e^{-nQ} Σ_{j<n} |g_j(u)|²` with
    /// `g_j = (τ/2)^{j/2} H_j(u)/√(j!)`, `u = z √(n/(2τ))`, carried by the
    /// three-term recurrence with log-magnitude rescaling.
    pub fn density(&self, z: Complex64) -> Result<f64> {
        let tau = self.tau;
        let nf = self.n as f64;
        let u = z * (nf / (2.0 * tau)).sqrt();
        let pot = EllipticGinibrePotential::new(tau)?;

        let mut terms = Vec::with_capacity(self.n);
        let mut offset = 0.0;
        let mut prev = Complex64::new(0.0, 0.0); // g_{-1}
        let mut cur = Complex64::new(1.0, 0.0); // g_0
        for j in 0..self.n {
            let mag = cur.norm();
            if mag > 0.0 {
                terms.push(LogScaleValue::from_log(1, 2.0 * (mag.ln() + offset)));
            } else {
                terms.push(LogScaleValue::zero());
            }
            if j + 1 < self.n {
                let jf = j as f64;
                let next = u * (2.0 * tau / (jf + 1.0)).sqrt() * cur
                    - tau * (jf / (jf + 1.0)).sqrt() * prev;
                if !(next.re.is_finite() && next.im.is_finite()) {
                    return Err(Error::Numeric(format!(
                        "elliptic recurrence overflowed at j = {j} for z = {z}"
                    )));
                }
                prev = cur;
                cur = next;
                let big = prev.norm().max(cur.norm());
                if big > 1e100 {
                    prev /= big;
                    cur /= big;
                    offset += big.ln();
                }
            }
        }
        let sum = logsumexp(&terms)?;
        let log_density =
            nf.ln() - 0.5 * (1.0 - tau * tau).ln() - nf * pot.q(z) + sum.log_magnitude();
        Ok(if sum.sign() == 0 {
            0.0
        } else {
            log_density.exp()
        })
    }

    /// `∫ R_n dA/π` by tensor Gauss–Legendre over a box containing the
    /// droplet, grown until the weight at the box boundary is negligible.
    pub fn mass(&self) -> Result<f64> {
        let pot = EllipticGinibrePotential::new(self.tau)?;
        let nf = self.n as f64;
        let mut half_width = 3.0 * (1.0 + self.tau);
        while (-nf * pot.q(Complex64::new(half_width, 0.0))).exp() > 1e-18
            || (-nf * pot.q(Complex64::new(0.0, half_width))).exp() > 1e-18
        {
            half_width *= 1.25;
        }
        let (nodes, weights) = quad::gauss_legendre(200);
        let axis: Vec<(f64, f64)> = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| (half_width * x, half_width * w))
            .collect();
        let mut mass = 0.0;
        for &(x, wx) in &axis {
            for &(y, wy) in &axis {
                mass += wx * wy * self.density(Complex64::new(x, y))?;
            }
        }
        Ok(mass / std::f64::consts::PI)
    }
}

/// Edge profile of one density: the exact values against the predicted
/// leading term and `1/√n` correction on a `t`-grid.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    /// Rescaled normal coordinates of the sample points.
    pub t_values: Vec<f64>,
    /// `R_n` at the rescaled points.
    pub exact: Vec<f64>,
    /// `n ΔQ · erfc(t)/2`.
    pub leading: Vec<f64>,
    /// `√(n ΔQ) · C(t)`.
    pub subleading: Vec<f64>,
    /// `exact − leading − subleading`, stored elementwise.
    pub residual: Vec<f64>,
    pub n: usize,
    pub edge: EdgeData,
}
