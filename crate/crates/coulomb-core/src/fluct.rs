//! Expectation of linear-statistics fluctuations and its large-`n` limit.
//!
//! For a radial test function `f`, the fluctuation of the `n`-point gas is
//! `Σ f(z_j) − n∫f dσ`. Its expectation is the exact integral
//! `∫ f·(R_n − nΔQ·1_S) dA/π`, and as `n → ∞` it converges to the
//! boundary-weighted functional
//!
//! ```text
//! ρ_{1/2}(f) = ∫_S f·(ΔL/2) dA/π − (1/8π)∮ f·∂_nL ds + (1/8π)∮ ∂_nf ds
//! ```
//!
//! with `L = log ΔQ`. [`expected_fluct`] evaluates the exact side,
//! [`rho_half`] the limit, and [`fluct_convergence`] watches the gap close.

use std::fmt;
use std::sync::Arc;

use crate::opkernel;
use crate::potential::{self, RadialPotential};
use crate::quad;
use crate::{Error, Result};

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial linear-statistics test function with its radial derivative.
#[derive(Clone)]
pub struct TestFunction {
    f: RadialFn,
    df: RadialFn,
    label: String,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("TestFunction")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// Wraps a profile and its derivative, checking them against each other
    /// by finite differences on a fixed radius grid.
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let tf = Self {
            f: Arc::new(f),
            df: Arc::new(df),
            label: label.into(),
        };
        tf.check_derivative()?;
        Ok(tf)
    }

    /// The even monomial `r^{2m}`; `m = 0` gives the constant 1.
    pub fn monomial(m: u32) -> Self {
        let p = 2 * m;
        let label = if m == 0 {
            "1".to_string()
        } else {
            format!("r^{p}")
        };
        Self {
            f: Arc::new(move |r: f64| r.powi(p as i32)),
            df: Arc::new(move |r: f64| {
                if m == 0 {
                    0.0
                } else {
                    f64::from(p) * r.powi(p as i32 - 1)
                }
            }),
            label,
        }
    }

    fn check_derivative(&self) -> Result<()> {
        let radii: Vec<f64> = (0..16)
            .map(|i| 0.05 * (2.5f64 / 0.05).powf(f64::from(i) / 15.0))
            .collect();
        let scale = radii
            .iter()
            .map(|&r| (self.df)(r).abs())
            .fold(0.0f64, f64::max);
        for &r in &radii {
            if !(self.f)(r).is_finite() || !(self.f)(3.0 * r).is_finite() {
                return Err(Error::Validation(format!(
                    "test function '{}' is not finite near r = {r:.4}",
                    self.label
                )));
            }
            let h = 1e-5 * r.max(1.0);
            let fd = ((self.f)(r + h) - (self.f)(r - h)) / (2.0 * h);
            let exact = (self.df)(r);
            // the absolute floor keeps isolated zeros of the derivative
            // from inflating the relative error
            if (fd - exact).abs() > 1e-6 * (exact.abs() + 0.01 * scale + 1e-9) {
                return Err(Error::Validation(format!(
                    "test function '{}': derivative at r = {r:.4} is {exact:.9e} but finite differences give {fd:.9e}",
                    self.label
                )));
            }
        }
        Ok(())
    }

    pub fn f(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn df(&self, r: f64) -> f64 {
        (self.df)(r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The limiting fluctuation expectation `ρ_{1/2}(f)`.
///
/// For a radial potential the definition above reduces, after integrating
/// the bulk term `∫_0^R f·ΔL·r dr` by parts against `ΔL = (rL')'/(4r)`, to
///
/// ```text
/// ρ_{1/2}(f) = (R/4)·f'(R) − (1/4)∫_0^R f'(r)·L'(r)·r dr
/// ```
///
/// which needs only `L' = (ΔQ)'/ΔQ` from the analytic derivative stack: the
/// boundary flux `(R/4)·f(R)·L'(R)` produced by the by-parts step cancels
/// the `∂_nL` contour term exactly. A constant test function therefore maps
/// to zero identically.
pub fn rho_half(pot: &RadialPotential, f: &TestFunction) -> Result<f64> {
    let radius = potential::droplet_radius(pot)?;
    let boundary = radius / 4.0 * f.df(radius);
    // the bulk integrand vanishes identically for Hele-Shaw potentials, so
    // the quadrature needs an absolute floor alongside the relative target
    let slope = quad::integrate_with_floor(
        |r| {
            f.df(r) * potential::delta_q_prime(pot, r).expect("interior radius is positive")
                / potential::delta_q(pot, r).expect("interior radius is positive")
                * r
        },
        0.0,
        radius,
        1e-12,
        1e-13 * (1.0 + boundary.abs()),
    )?;
    Ok(boundary - slope.value / 4.0)
}

/// Largest particle count accepted by [`expected_fluct`].
pub const MAX_FLUCT_N: usize = 8192;

/// The exact fluctuation expectation `∫ f·(R_n − nΔQ·1_S) dA/π` at finite `n`.
///
/// The integral is split at the droplet boundary: inside, the integrand is
/// the near-cancelling difference `f·(R_n − nΔQ)·2r`; outside, only
/// `f·R_n·2r` survives, integrated until the density falls below
/// `1e-16·n`, past which the super-exponential tail cannot move the result.
pub fn expected_fluct(pot: &RadialPotential, f: &TestFunction, n: usize) -> Result<f64> {
    if n == 0 || n > MAX_FLUCT_N {
        return Err(Error::Domain(format!(
            "n = {n} is outside the supported range 1..={MAX_FLUCT_N}"
        )));
    }
    let radius = potential::droplet_radius(pot)?;
    let basis = opkernel::radial_norms(pot, n)?;
    let nf = n as f64;

    // each density evaluation carries roundoff proportional to n times the
    // bulk height, so the quadrature target needs a floor that grows with n
    let noise_floor = 1e-13 * nf;
    let interior = quad::integrate_with_floor(
        |r| {
            let density =
                opkernel::density_radial(&basis, pot, r).expect("interior radius is positive");
            let background = nf * potential::delta_q(pot, r).expect("interior radius is positive");
            2.0 * r * f.f(r) * (density - background)
        },
        0.0,
        radius,
        1e-12,
        noise_floor,
    )?;

    let edge_width = (2.0 * nf * potential::delta_q(pot, radius)?).sqrt().recip();
    let floor = 1e-16 * nf;
    let mut cutoff = radius + 7.0 * edge_width;
    let mut expansions = 0;
    while opkernel::density_radial(&basis, pot, cutoff)? >= floor {
        cutoff += 2.0 * edge_width;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Numeric(format!(
                "density tail of '{}' has not decayed below {floor:.3e} by r = {cutoff:.6}",
                pot.label()
            )));
        }
    }
    let exterior = quad::integrate_with_floor(
        |r| {
            2.0 * r
                * f.f(r)
                * opkernel::density_radial(&basis, pot, r).expect("exterior radius is positive")
        },
        radius,
        cutoff,
        1e-12,
        noise_floor,
    )?;

    Ok(interior.value + exterior.value)
}

/// One `n` of a convergence table.
#[derive(Debug, Clone, Copy)]
pub struct FluctRow {
    pub n: usize,
    pub expected: f64,
    /// `|expected − ρ_{1/2}(f)|`.
    pub gap: f64,
}

/// Gap table between [`expected_fluct`] and [`rho_half`] across `n`.
#[derive(Debug, Clone)]
pub struct FluctReport {
    pub pot_label: String,
    pub f_label: String,
    pub rho_half: f64,
    pub rows: Vec<FluctRow>,
    /// True when the gap at the largest `n` is at most half the gap at the
    /// smallest, or both already sit below `1e-6`.
    pub decay: bool,
}

/// Evaluates the exact expectation on each `n` and compares with the limit.
///
/// `n_list` must be strictly ascending and span at least a factor 16 so the
/// decay verdict has a lever arm.
pub fn fluct_convergence(
    pot: &RadialPotential,
    f: &TestFunction,
    n_list: &[usize],
) -> Result<FluctReport> {
    let (&n_min, &n_max) = match (n_list.first(), n_list.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Domain("n_list must not be empty".into())),
    };
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "n_list must be strictly ascending, got {n_list:?}"
        )));
    }
    if n_max / n_min < 16 {
        return Err(Error::Validation(format!(
            "n_list must span at least a factor 16, got {n_min}..{n_max}"
        )));
    }
    let limit = rho_half(pot, f)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let expected = expected_fluct(pot, f, n)?;
        rows.push(FluctRow {
            n,
            expected,
            gap: (expected - limit).abs(),
        });
    }
    let first = rows.first().expect("non-empty rows").gap;
    let last = rows.last().expect("non-empty rows").gap;
    let decay = last <= first / 2.0 || (first <= 1e-6 && last <= 1e-6);
    Ok(FluctReport {
        pot_label: pot.label().to_string(),
        f_label: f.label().to_string(),
        rho_half: limit,
        rows,
        decay,
    })
}

/// Renders a convergence report as CSV rows under the header
/// `pot_label,f_label,n,expected_fluct,rho_half,gap`.
pub fn fluct_report_to_csv(report: &FluctReport) -> String {
    let mut out = String::from("pot_label,f_label,n,expected_fluct,rho_half,gap\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e}\n",
            report.pot_label, report.f_label, row.n, row.expected, report.rho_half, row.gap
        ));
    }
    out
}
