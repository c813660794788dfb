//! Special functions and log-scale arithmetic.
//!
//! Everything downstream rests on four primitives: the complementary error
//! function (Maclaurin series on the centre, rational tail elsewhere), the
//! scaled tail erfcx for cancellation-free asymptotics, the log-gamma /
//! regularized incomplete-gamma pair, and sign-tracked log-scale summation
//! for series whose terms span thousands of orders of magnitude.

use num_complex::Complex64;

use crate::{Error, Result};

/// sqrt(2*pi)
pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
/// 1/sqrt(2*pi)
pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// sqrt(pi)
pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;

// Rational tail coefficients for erfc on [1.25, 1/0.35] and [1/0.35, 28],
// in the variable s = 1/x^2 (SunPro/FreeBSD fdlibm constants; the classical
// double-precision fit, good to under one ulp on the fitted intervals).
const RA: [f64; 8] = [
    -9.864_944_034_847_148e-3,
    -6.938_585_727_071_818e-1,
    -1.055_862_622_532_329e1,
    -6.237_533_245_032_6e1,
    -1.623_966_694_625_734_7e2,
    -1.846_050_929_067_110_4e2,
    -8.128_743_550_630_66e1,
    -9.814_329_344_169_145,
];
const SA: [f64; 8] = [
    1.965_127_166_743_925_7e1,
    1.376_577_541_435_190_4e2,
    4.345_658_774_752_292_3e2,
    6.453_872_717_332_679e2,
    4.290_081_400_275_678_6e2,
    1.086_350_055_417_794_4e2,
    6.570_249_770_319_282,
    -6.042_441_521_485_81e-2,
];
const RB: [f64; 7] = [
    -9.864_942_924_700_099e-3,
    -7.992_832_376_805_23e-1,
    -1.775_795_491_775_475_2e1,
    -1.606_363_848_558_219_2e2,
    -6.375_664_433_683_896e2,
    -1.025_095_131_611_077_2e3,
    -4.835_191_916_086_514e2,
];
const SB: [f64; 7] = [
    3.033_806_074_348_246e1,
    3.257_925_129_965_739_2e2,
    1.536_729_586_084_437e3,
    3.199_858_219_508_595_4e3,
    2.553_050_406_433_164_4e3,
    4.745_285_412_069_553_7e2,
    -2.244_095_244_658_581_8e1,
];

/// Maclaurin series for erf on |x| <= 1.5: erf(x) = (2/sqrt(pi)) *
/// sum_k (-1)^k x^(2k+1) / (k! (2k+1)). Terms are generated by the ratio
/// recurrence; at x = 1.5 the worst-case cancellation costs about one bit.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 0..200 {
        let kf = k as f64;
        term *= -x2 * (2.0 * kf + 1.0) / ((kf + 1.0) * (2.0 * kf + 3.0));
        sum += term;
        if term.abs() <= 0.5 * f64::EPSILON * sum.abs() {
            break;
        }
    }
    std::f64::consts::FRAC_2_SQRT_PI * sum
}

/// Rational-tail R/S in s = 1/x^2, valid for x > 1.25. Shared by the erfc
/// tail and erfcx.
fn tail_rs(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    if x < 1.0 / 0.35 {
        let r = RA[0]
            + s * (RA[1]
                + s * (RA[2] + s * (RA[3] + s * (RA[4] + s * (RA[5] + s * (RA[6] + s * RA[7]))))));
        let q = 1.0
            + s * (SA[0]
                + s * (SA[1]
                    + s * (SA[2]
                        + s * (SA[3] + s * (SA[4] + s * (SA[5] + s * (SA[6] + s * SA[7])))))));
        r / q
    } else {
        let r =
            RB[0] + s * (RB[1] + s * (RB[2] + s * (RB[3] + s * (RB[4] + s * (RB[5] + s * RB[6])))));
        let q = 1.0
            + s * (SB[0]
                + s * (SB[1] + s * (SB[2] + s * (SB[3] + s * (SB[4] + s * (SB[5] + s * SB[6]))))));
        r / q
    }
}

/// erfc on the full line without input validation; used internally where
/// finiteness is already guaranteed. Infinities map to their limits.
pub(crate) fn erfc_raw(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    if x < -1.5 {
        // reflection: erfc(-|x|) = 2 - erfc(|x|); the subtrahend is < 0.034,
        // so no cancellation
        return 2.0 - erfc_raw(-x);
    }
    if x <= 1.5 {
        return 1.0 - erf_series(x);
    }
    if x >= 28.0 {
        // underflows past the smallest subnormal
        return 0.0;
    }
    // split x into a 32-bit head z and residual so that z*z is exact and the
    // exponent can be formed as a product of two moderately sized exps
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let r = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + tail_rs(x)).exp();
    r / x
}

/// Scaled complementary error function e^(x^2) erfc(x) for x >= 1.5.
/// No exponential factor, hence no underflow and no cancellation; this is
/// the stable route to deep-tail ratios.
pub(crate) fn erfcx_raw(x: f64) -> f64 {
    debug_assert!(x >= 1.5);
    (tail_rs(x) - 0.5625).exp() / x
}

/// Complementary error function erfc(t) = (2/sqrt(pi)) * int_t^inf e^(-u^2) du.
///
/// Relative error at most ~5e-15 for |t| <= 10; for large positive t the
/// value underflows gracefully (nonzero through t = 26, zero from t = 28).
///
/// Errors with [`Error::Domain`] on non-finite input.
pub fn erfc(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!(
            "erfc requires finite input, got {t}"
        )));
    }
    Ok(erfc_raw(t))
}

/// Ratio of `erfc(t)/2 - 1` to its leading asymptotic `e^(-t^2)/(2 sqrt(pi) t)`
/// for t <= -2.
///
/// Evaluated in the cancellation-free form `sqrt(pi) |t| erfcx(|t|)`; the
/// textbook form `(erfc(t)/2 - 1) * (2 sqrt(pi) t) / e^(-t^2)` is identically
/// zero in double precision once t < -9.5 because erfc(t) rounds to 2.
/// The result lies in [1 - 2/t^2, 1] for t <= -3 and increases to 1 as
/// t -> -inf.
///
/// Errors with [`Error::Domain`] for t > -2 (asymptotic regime not entered).
pub fn erfc_tail_ratio(t: f64) -> Result<f64> {
    if !(t <= -2.0) {
        return Err(Error::Domain(format!(
            "erfc_tail_ratio requires t <= -2, got {t}"
        )));
    }
    Ok(SQRT_PI * (-t) * erfcx_raw(-t))
}

/// Half-line Gaussian moments I_j(a) = int_0^inf y^j e^(-(y+a)^2/2) dy / sqrt(2 pi)
/// for j in 0..3, via the closed forms in erfc(a/sqrt(2))/2 and
/// e^(-a^2/2)/sqrt(2 pi).
///
/// Errors with [`Error::Domain`] for j > 3 or non-finite a.
pub fn half_gaussian_moment(j: u32, a: f64) -> Result<f64> {
    if j > 3 {
        return Err(Error::Domain(format!(
            "half_gaussian_moment supports j in 0..3, got {j}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::Domain(format!(
            "half_gaussian_moment requires finite a, got {a}"
        )));
    }
    let i0 = 0.5 * erfc_raw(a / std::f64::consts::SQRT_2);
    let phi = FRAC_1_SQRT_2PI * (-0.5 * a * a).exp();
    Ok(match j {
        0 => i0,
        1 => phi - a * i0,
        2 => -a * phi + (a * a + 1.0) * i0,
        _ => (a * a + 2.0) * phi - (a * a * a + 3.0 * a) * i0,
    })
}

/// The half-line Gaussian integral int_0^inf e^(-(x omega + a)^2 / 2) dx
/// = (sqrt(2 pi) / omega) * erfc(a / sqrt(2)) / 2.
///
/// Errors with [`Error::Domain`] for omega <= 0.
pub fn halfline_gaussian(omega: f64, a: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "halfline_gaussian requires omega > 0, got {omega}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::Domain(format!(
            "halfline_gaussian requires finite a, got {a}"
        )));
    }
    Ok(SQRT_2PI / omega * 0.5 * erfc_raw(a / std::f64::consts::SQRT_2))
}

/// The Gaussian (Ginibre) kernel G(zeta, eta) = e^((2 zeta conj(eta) -
/// |zeta|^2 - |eta|^2)/4). Satisfies |G(zeta, eta)| = e^(-|zeta - eta|^2 / 4).
///
/// Errors with [`Error::Domain`] on non-finite components.
pub fn ginibre_kernel(zeta: Complex64, eta: Complex64) -> Result<Complex64> {
    if !(zeta.re.is_finite() && zeta.im.is_finite() && eta.re.is_finite() && eta.im.is_finite()) {
        return Err(Error::Domain(format!(
            "ginibre_kernel requires finite inputs, got {zeta}, {eta}"
        )));
    }
    let exponent = (2.0 * zeta * eta.conj() - zeta.norm_sqr() - eta.norm_sqr()) / 4.0;
    Ok(exponent.exp())
}

/// Diagonal of the free-boundary kernel: k(t, t) = erfc(t)/2.
pub fn free_boundary_kernel_diag(t: f64) -> f64 {
    0.5 * erfc_raw(t)
}

/// Free-boundary kernel restricted to the real normal section:
/// k(zeta, eta) = e^(-(zeta - eta)^2 / 4) * erfc((zeta + eta)/2) / 2 for
/// real zeta, eta (the Gaussian factor is |G| on the section).
pub fn free_boundary_kernel_section(zeta: f64, eta: f64) -> f64 {
    let d = zeta - eta;
    (-0.25 * d * d).exp() * 0.5 * erfc_raw(0.5 * (zeta + eta))
}

/// A real number carried as (sign, log of absolute value), so that terms
/// like r^(2j) e^(-n Q) / h_j spanning thousands of orders of magnitude
/// stay representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaleValue {
    sign: i8,
    log_magnitude: f64,
}

impl LogScaleValue {
    /// Exact zero.
    pub fn zero() -> Self {
        LogScaleValue {
            sign: 0,
            log_magnitude: f64::NEG_INFINITY,
        }
    }

    /// Converts a plain double. Zero maps to the zero value.
    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else {
            LogScaleValue {
                sign: if x > 0.0 { 1 } else { -1 },
                log_magnitude: x.abs().ln(),
            }
        }
    }

    /// Assembles from a sign and the natural log of the magnitude.
    /// `sign == 0` yields exact zero regardless of `log_magnitude`.
    pub fn from_log(sign: i8, log_magnitude: f64) -> Self {
        assert!(
            sign == -1 || sign == 0 || sign == 1,
            "sign must be -1, 0, or +1"
        );
        if sign == 0 {
            Self::zero()
        } else {
            LogScaleValue {
                sign,
                log_magnitude,
            }
        }
    }

    /// Sign in {-1, 0, +1}.
    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the absolute value; `-inf` when the value is zero.
    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    /// Back to a plain double (may overflow to +-inf or underflow to 0).
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.log_magnitude.exp()
    }

    /// Multiplies by e^shift without leaving log scale.
    pub fn scaled_by_log(&self, shift: f64) -> Self {
        if self.sign == 0 {
            *self
        } else {
            LogScaleValue {
                sign: self.sign,
                log_magnitude: self.log_magnitude + shift,
            }
        }
    }
}

/// Sum of log-scale terms, accumulated relative to the largest magnitude.
/// Positive and negative terms are summed separately before the single
/// subtraction, so same-sign sums are as accurate as the shift allows.
///
/// Errors with [`Error::Domain`] on an empty slice.
pub fn logsumexp(terms: &[LogScaleValue]) -> Result<LogScaleValue> {
    if terms.is_empty() {
        return Err(Error::Domain("logsumexp of an empty sequence".into()));
    }
    let mut max_log = f64::NEG_INFINITY;
    for t in terms {
        if t.sign != 0 && t.log_magnitude > max_log {
            max_log = t.log_magnitude;
        }
    }
    if max_log == f64::NEG_INFINITY {
        return Ok(LogScaleValue::zero());
    }
    let mut pos = 0.0f64;
    let mut neg = 0.0f64;
    for t in terms {
        match t.sign {
            1 => pos += (t.log_magnitude - max_log).exp(),
            -1 => neg += (t.log_magnitude - max_log).exp(),
            _ => {}
        }
    }
    let diff = pos - neg;
    if diff == 0.0 {
        return Ok(LogScaleValue::zero());
    }
    Ok(LogScaleValue {
        sign: if diff > 0.0 { 1 } else { -1 },
        log_magnitude: max_log + diff.abs().ln(),
    })
}

// Lanczos approximation (g = 7, 9 terms), the standard double-precision set.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for x > 0.
///
/// Lanczos approximation, relative error ~1e-14 across the positive axis.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // reflection keeps the approximation in its accurate range
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
/// for a > 0, x >= 0. Series for the lower function when x < a + 1,
/// continued fraction for the upper function otherwise; both carry the
/// exponential prefactor in log scale.
///
///// Errors with [`Error::Numeric`] if neither expansion converges.
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    assert!(a > 0.0 && x >= 0.0, "requires a > 0, x >= 0");
    if x == 0.0 {
        return Ok(1.0);
    }
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-290;
    const ITMAX: usize = 4000;
    // log of the prefactor x^a e^{-x} / Gamma(a)
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series for P(a, x), then Q = 1 - P
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        let mut converged = false;
        for _ in 0..ITMAX {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "incomplete gamma series did not converge for a={a}, x={x}"
            )));
        }
        let p = sum * log_prefactor.exp();
        Ok(1.0 - p)
    } else {
        // Lentz continued fraction for Q(a, x)
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut converged = false;
        for i in 1..=ITMAX {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "incomplete gamma continued fraction did not converge for a={a}, x={x}"
            )));
        }
        Ok(log_prefactor.exp() * h)
    }
}
