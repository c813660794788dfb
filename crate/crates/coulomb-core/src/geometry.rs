//! Boundary geometry: curvature, normal-coordinate charts, and the
//! Laplacian decomposition near a curve.
//!
//! The edge expansion lives in a belt around the droplet boundary,
//! parameterized by arclength `s` along the boundary and a rescaled normal
//! coordinate `t`. This module supplies that chart ([`NormalChart`]), the
//! area density of the `(s, t)` coordinates ([`jacobian_factor`]), a
//! finite-difference curvature oracle used to validate closed-form
//! curvatures, and a defect check for the identity
//! `4Δu = ∂_s²u + ∂_n²u + κ ∂_n u` on circles.

use std::sync::Arc;

use num_complex::Complex64;

use crate::potential::{DropletShape, EdgeData};
use crate::{Error, Result};

/// A curve parameterized by arclength, oriented counterclockwise.
///
/// Implementors only provide points; tangents, normals, and curvature are
/// derived by finite differences so that closed-form geometry can be
/// cross-checked against the curve itself.
pub trait ArclengthCurve {
    fn point(&self, s: f64) -> Complex64;
}

/// Origin-centered circle traversed counterclockwise from `(R, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct CircleBoundary {
    radius: f64,
}

impl CircleBoundary {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    pub fn total_length(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.radius
    }
}

impl ArclengthCurve for CircleBoundary {
    fn point(&self, s: f64) -> Complex64 {
        let theta = s / self.radius;
        Complex64::new(self.radius * theta.cos(), self.radius * theta.sin())
    }
}

/// Origin-centered ellipse with semi-axes `(a, b)`, traversed
/// counterclockwise from `(a, 0)`.
///
/// Arclength is inverted through a cumulative table over 1024 parameter
/// intervals (each integrated with a 5-point Gauss rule) refined by Newton
/// iteration on the exact speed, so `point(s)` is accurate to machine
/// precision.
#[derive(Debug, Clone)]
pub struct EllipseBoundary {
    a: f64,
    b: f64,
    // cumulative arclength at theta = 2*pi*i/KNOTS
    knots: Vec<f64>,
    gauss: Vec<(f64, f64)>,
}

const ELLIPSE_KNOTS: usize = 1024;

impl EllipseBoundary {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Domain(format!(
                "ellipse semi-axes must be positive, got ({a}, {b})"
            )));
        }
        let (nodes, weights) = crate::quad::gauss_legendre(5);
        let gauss = nodes.into_iter().zip(weights).collect();
        let mut ellipse = Self {
            a,
            b,
            knots: Vec::new(),
            gauss,
        };
        let h = 2.0 * std::f64::consts::PI / ELLIPSE_KNOTS as f64;
        let mut knots = Vec::with_capacity(ELLIPSE_KNOTS + 1);
        knots.push(0.0);
        let mut acc = 0.0;
        for i in 0..ELLIPSE_KNOTS {
            acc += ellipse.speed_integral(i as f64 * h, (i + 1) as f64 * h);
            knots.push(acc);
        }
        ellipse.knots = knots;
        Ok(ellipse)
    }

    pub fn total_length(&self) -> f64 {
        *self.knots.last().expect("knot table is non-empty")
    }

    fn speed(&self, theta: f64) -> f64 {
        let (sin, cos) = theta.sin_cos();
        (self.a * sin).hypot(self.b * cos)
    }

    fn speed_integral(&self, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.gauss
            .iter()
            .map(|&(x, w)| w * half * self.speed(mid + half * x))
            .sum()
    }

    fn arclength_to(&self, theta: f64) -> f64 {
        let h = 2.0 * std::f64::consts::PI / ELLIPSE_KNOTS as f64;
        let i = ((theta / h) as usize).min(ELLIPSE_KNOTS - 1);
        self.knots[i] + self.speed_integral(i as f64 * h, theta)
    }

    fn theta_of(&self, s: f64) -> f64 {
        let total = self.total_length();
        let s = s.rem_euclid(total);
        let h = 2.0 * std::f64::consts::PI / ELLIPSE_KNOTS as f64;
        let i = self.knots.partition_point(|&v| v <= s).saturating_sub(1);
        let i = i.min(ELLIPSE_KNOTS - 1);
        let mut theta = i as f64 * h + (s - self.knots[i]) / self.speed(i as f64 * h);
        for _ in 0..40 {
            let residual = self.arclength_to(theta) - s;
            if residual.abs() <= 1e-13 * (1.0 + total) {
                break;
            }
            theta = (theta - residual / self.speed(theta)).clamp(0.0, 2.0 * std::f64::consts::PI);
        }
        theta
    }
}

impl ArclengthCurve for EllipseBoundary {
    fn point(&self, s: f64) -> Complex64 {
        let theta = self.theta_of(s);
        Complex64::new(self.a * theta.cos(), self.b * theta.sin())
    }
}

/// Unit outward normal of a counterclockwise arclength curve at `s`,
/// computed from a fourth-order finite-difference tangent.
///
/// Errors with [`Error::Domain`] if the numerical tangent is degenerate
/// (an arclength parameterization has unit tangent, so anything far from
/// unit length signals a bad curve).
pub fn outward_normal<C: ArclengthCurve + ?Sized>(curve: &C, s: f64) -> Result<Complex64> {
    let h = 1e-5;
    let tangent = (-curve.point(s + 2.0 * h) + 8.0 * curve.point(s + h) - 8.0 * curve.point(s - h)
        + curve.point(s - 2.0 * h))
        / (12.0 * h);
    let norm = tangent.norm();
    if !(norm > 0.5) {
        return Err(Error::Domain(format!(
            "tangent degenerate at s = {s}: |z'(s)| = {norm:.3e}"
        )));
    }
    let t = tangent / norm;
    Ok(Complex64::new(t.im, -t.re))
}

fn wrap_angle(x: f64) -> f64 {
    x - 2.0 * std::f64::consts::PI * (x / (2.0 * std::f64::consts::PI)).round()
}

/// Signed curvature `κ = ∂_s arg ν` by Richardson-extrapolated central
/// differences of the outward normal angle, with nearest-branch unwrapping.
///
/// Accurate to about `1e-7` for analytic curves of order-one scale.
pub fn curvature_finite_difference<C: ArclengthCurve + ?Sized>(curve: &C, s: f64) -> Result<f64> {
    let h = 1e-3;
    let slope = |h: f64| -> Result<f64> {
        let hi = outward_normal(curve, s + h)?.arg();
        let lo = outward_normal(curve, s - h)?.arg();
        Ok(wrap_angle(hi - lo) / (2.0 * h))
    };
    Ok((4.0 * slope(0.5 * h)? - slope(h)?) / 3.0)
}

/// Area density of the `(s, t)` normal coordinates:
/// `dA(w)/π = jacobian_factor · dt ds` with
/// `jacobian_factor = (2nΔQ)^{-1/2} (1 + tκ/√(2nΔQ)) / π`.
///
/// Errors with [`Error::Domain`] on invalid inputs or when the factor is
/// not positive (`t` so negative that the chart folds over itself).
pub fn jacobian_factor(delta_q: f64, kappa: f64, t: f64, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("jacobian_factor requires n >= 1".into()));
    }
    if !(delta_q > 0.0) {
        return Err(Error::Domain(format!(
            "jacobian_factor requires delta_q > 0, got {delta_q}"
        )));
    }
    let c = (2.0 * f64::from(n) * delta_q).sqrt();
    let factor = (1.0 + t * kappa / c) / (std::f64::consts::PI * c);
    if !(factor > 0.0) {
        return Err(Error::Domain(format!(
            "normal chart degenerate at t = {t} (kappa = {kappa}, scale {c:.3})"
        )));
    }
    Ok(factor)
}

/// The belt chart `(s, t) ↦ z(s) + t ν(z(s))/√(2nΔQ)` around the droplet
/// boundary.
#[derive(Debug, Clone)]
pub struct NormalChart {
    edge: EdgeData,
    n: u32,
    boundary: ChartBoundary,
}

#[derive(Debug, Clone)]
enum ChartBoundary {
    Circle(CircleBoundary),
    Ellipse(EllipseBoundary),
}

impl NormalChart {
    pub fn new(edge: EdgeData, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("normal chart requires n >= 1".into()));
        }
        let boundary = match edge.shape {
            DropletShape::Disk(r) => ChartBoundary::Circle(CircleBoundary::new(r)?),
            DropletShape::Ellipse(a, b) => ChartBoundary::Ellipse(EllipseBoundary::new(a, b)?),
        };
        Ok(Self { edge, n, boundary })
    }

    pub fn edge(&self) -> &EdgeData {
        &self.edge
    }

    pub fn boundary_length(&self) -> f64 {
        match &self.boundary {
            ChartBoundary::Circle(c) => c.total_length(),
            ChartBoundary::Ellipse(e) => e.total_length(),
        }
    }

    fn boundary_point(&self, s: f64) -> Complex64 {
        match &self.boundary {
            ChartBoundary::Circle(c) => c.point(s),
            ChartBoundary::Ellipse(e) => e.point(s),
        }
    }

    /// Maps belt coordinates to the plane. `ΔQ` is constant along the
    /// boundary for every supported droplet, so the normal rescaling uses
    /// the edge value.
    pub fn point(&self, s: f64, t: f64) -> Result<Complex64> {
        let z = self.boundary_point(s);
        let nu = match &self.boundary {
            ChartBoundary::Circle(c) => outward_normal(c, s)?,
            ChartBoundary::Ellipse(e) => outward_normal(e, s)?,
        };
        let scale = (2.0 * f64::from(self.n) * self.edge.delta_q).sqrt();
        Ok(z + nu * (t / scale))
    }

    /// `dA/π` density of the chart at `(s, t)`, with the curvature taken
    /// from the finite-difference oracle at `s`.
    pub fn jacobian(&self, s: f64, t: f64) -> Result<f64> {
        let kappa = match &self.boundary {
            ChartBoundary::Circle(c) => curvature_finite_difference(c, s)?,
            ChartBoundary::Ellipse(e) => curvature_finite_difference(e, s)?,
        };
        jacobian_factor(self.edge.delta_q, kappa, t, self.n)
    }
}

type Value2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Grad2 = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type Hess2 = Arc<dyn Fn(f64, f64) -> (f64, f64, f64) + Send + Sync>;

/// A planar scalar field with first and second derivatives, either supplied
/// analytically or generated by central finite differences.
#[derive(Clone)]
pub struct ScalarField {
    value: Value2,
    grad: Grad2,
    hessian: Hess2,
}

impl ScalarField {
    pub fn analytic(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
        hessian: impl Fn(f64, f64) -> (f64, f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            grad: Arc::new(grad),
            hessian: Arc::new(hessian),
        }
    }

    /// Derivatives by second-order central differences with step `2e-4`.
    pub fn from_value(value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let value: Value2 = Arc::new(value);
        let h = 2e-4;
        let v = value.clone();
        let grad = move |x: f64, y: f64| {
            (
                (v(x + h, y) - v(x - h, y)) / (2.0 * h),
                (v(x, y + h) - v(x, y - h)) / (2.0 * h),
            )
        };
        let v = value.clone();
        let hessian = move |x: f64, y: f64| {
            let uxx = (v(x + h, y) - 2.0 * v(x, y) + v(x - h, y)) / (h * h);
            let uyy = (v(x, y + h) - 2.0 * v(x, y) + v(x, y - h)) / (h * h);
            let uxy = (v(x + h, y + h) - v(x + h, y - h) - v(x - h, y + h) + v(x - h, y - h))
                / (4.0 * h * h);
            (uxx, uxy, uyy)
        };
        Self {
            value,
            grad: Arc::new(grad),
            hessian: Arc::new(hessian),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }
}

/// Defect of the boundary decomposition `4Δu = ∂_s²u + ∂_n²u + κ ∂_n u`
/// on the circle of the given radius, at angle `theta`.
///
/// The left side is the Cartesian Laplacian from the field's Hessian; the
/// right side assembles the arclength and normal derivatives along the
/// circle (with `∂_s²` the second derivative of the restriction, which
/// carries a `−κ ∂_n u` curve-acceleration term). Returns `|lhs − rhs|`;
/// callers pick the tolerance appropriate to the field's derivative source.
pub fn laplacian_normal_identity_check(u: &ScalarField, circle_radius: f64, theta: f64) -> f64 {
    assert!(circle_radius > 0.0, "requires a positive circle radius");
    let (sin, cos) = theta.sin_cos();
    let (x, y) = (circle_radius * cos, circle_radius * sin);
    let (ux, uy) = (u.grad)(x, y);
    let (uxx, uxy, uyy) = (u.hessian)(x, y);
    let kappa = 1.0 / circle_radius;

    let laplacian = uxx + uyy;
    let dn = ux * cos + uy * sin;
    let dnn = uxx * cos * cos + 2.0 * uxy * cos * sin + uyy * sin * sin;
    let dss = (uxx * sin * sin - 2.0 * uxy * sin * cos + uyy * cos * cos) - kappa * dn;
    (laplacian - (dss + dnn + kappa * dn)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{
        edge_data_elliptic, edge_data_radial, EllipticGinibrePotential, RadialPotential,
    };
    use crate::quad;
    use crate::test_util::{assert_abs, assert_rel};

    #[test]
    fn jacobian_factor_closed_forms() {
        let f = jacobian_factor(1.0, 0.7, 0.0, 4).unwrap();
        assert_rel(f, 1.0 / (std::f64::consts::PI * 8.0f64.sqrt()), 1e-14);
        // flat boundary: no t dependence
        let a = jacobian_factor(2.0, 0.0, -1.5, 9).unwrap();
        let b = jacobian_factor(2.0, 0.0, 2.5, 9).unwrap();
        assert_rel(a, b, 1e-15);
    }

    #[test]
    fn jacobian_factor_rejects_bad_inputs() {
        assert!(matches!(
            jacobian_factor(0.0, 1.0, 0.0, 4),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            jacobian_factor(1.0, 1.0, 0.0, 0),
            Err(Error::Domain(_))
        ));
        // 1 + t*kappa/sqrt(2n delta_q) <= 0 folds the chart
        assert!(matches!(
            jacobian_factor(1.0, 1.0, -2.0, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn jacobian_factor_is_exact_on_annuli() {
        // integrating the factor over s in [0, 2 pi R], t in [t1, t2] must
        // reproduce the annulus area r2^2 - r1^2 in dA/pi units
        let cases = [
            (1.0, 1, -0.5, 0.5, 1.0),
            (2.0, 4, -1.0, 3.0, 3.0),
            (0.7, 16, 0.0, 2.0, 1.0),
            (1.5, 64, -2.0, -1.0, 2.5),
        ];
        for (radius, n, t1, t2, delta_q) in cases {
            let kappa = 1.0 / radius;
            let integral = quad::integrate(
                |t| jacobian_factor(delta_q, kappa, t, n).unwrap(),
                t1,
                t2,
                1e-13,
            )
            .unwrap()
            .value
                * 2.0
                * std::f64::consts::PI
                * radius;
            let c = (2.0 * f64::from(n) * delta_q).sqrt();
            let (r1, r2) = (radius + t1 / c, radius + t2 / c);
            assert_rel(integral, r2 * r2 - r1 * r1, 1e-12);
        }
    }

    #[test]
    fn curvature_of_circle_is_inverse_radius() {
        let circle = CircleBoundary::new(2.0).unwrap();
        for s in [0.0, 1.3, 5.0, 12.0] {
            assert_rel(curvature_finite_difference(&circle, s).unwrap(), 0.5, 1e-6);
        }
    }

    #[test]
    fn curvature_of_ellipse_matches_closed_form() {
        let ellipse = EllipseBoundary::new(1.5, 0.5).unwrap();
        // at (a, 0): kappa = a/b^2
        let k = curvature_finite_difference(&ellipse, 0.0).unwrap();
        assert_abs(k, 6.0, 1e-5);
        // at (0, b), one quarter of the way around: kappa = b/a^2
        let quarter = ellipse.total_length() / 4.0;
        let k = curvature_finite_difference(&ellipse, quarter).unwrap();
        assert_abs(k, 0.5 / 2.25, 1e-6);
    }

    #[test]
    fn curvature_of_segment_vanishes() {
        struct Segment;
        impl ArclengthCurve for Segment {
            fn point(&self, s: f64) -> Complex64 {
                Complex64::new(0.3 + s * 0.6, -1.0 + s * 0.8)
            }
        }
        let k = curvature_finite_difference(&Segment, 2.0).unwrap();
        assert_abs(k, 0.0, 1e-7);
    }

    #[test]
    fn degenerate_tangent_is_rejected() {
        struct Stuck;
        impl ArclengthCurve for Stuck {
            fn point(&self, _: f64) -> Complex64 {
                Complex64::new(1.0, 1.0)
            }
        }
        assert!(matches!(
            curvature_finite_difference(&Stuck, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ellipse_curvature_integrates_to_two_pi() {
        let ellipse = EllipseBoundary::new(1.5, 0.5).unwrap();
        let total = ellipse.total_length();
        let loop_integral = quad::integrate(
            |s| curvature_finite_difference(&ellipse, s).unwrap(),
            0.0,
            total,
            1e-9,
        )
        .unwrap();
        assert_abs(loop_integral.value, 2.0 * std::f64::consts::PI, 1e-5);
    }

    #[test]
    fn ellipse_arclength_inversion_round_trips() {
        let ellipse = EllipseBoundary::new(1.5, 0.5).unwrap();
        let total = ellipse.total_length();
        for i in 0..24 {
            let s = total * f64::from(i) / 24.0;
            let z = ellipse.point(s);
            assert_abs((z.re / 1.5).powi(2) + (z.im / 0.5).powi(2), 1.0, 1e-11);
        }
        // wrapping: one full loop returns to the start
        let z0 = ellipse.point(0.0);
        let z1 = ellipse.point(total);
        assert_abs((z0 - z1).norm(), 0.0, 1e-10);
    }

    #[test]
    fn radial_chart_stays_on_the_boundary() {
        let pot = RadialPotential::from_even_poly(&[(1.0, 2), (1.0, 4)]).unwrap();
        let edge = edge_data_radial(&pot).unwrap();
        let radius = edge.boundary_point.re;
        let chart = NormalChart::new(edge, 32).unwrap();
        for i in 0..12 {
            let s = chart.boundary_length() * f64::from(i) / 12.0;
            let z = chart.point(s, 0.0).unwrap();
            assert_abs(z.norm(), radius, 1e-12);
        }
        // moving along t = +1 from s = 0 steps radially outward
        let c = (2.0 * 32.0 * edge.delta_q).sqrt();
        let z = chart.point(0.0, 1.0).unwrap();
        assert_abs(z.re, radius + 1.0 / c, 1e-10);
        assert_abs(z.im, 0.0, 1e-10);
    }

    #[test]
    fn elliptic_chart_matches_the_ellipse_and_its_jacobian() {
        let pot = EllipticGinibrePotential::new(0.5).unwrap();
        let edge = edge_data_elliptic(&pot).unwrap();
        let chart = NormalChart::new(edge, 16).unwrap();
        for i in 0..8 {
            let s = chart.boundary_length() * f64::from(i) / 8.0;
            let z = chart.point(s, 0.0).unwrap();
            assert_abs((z.re / 1.5).powi(2) + (z.im / 0.5).powi(2), 1.0, 1e-10);
        }
        // at s = 0 the oracle curvature is a/b^2 = 6
        let j = chart.jacobian(0.0, 0.3).unwrap();
        let expected = jacobian_factor(edge.delta_q, 6.0, 0.3, 16).unwrap();
        assert_rel(j, expected, 1e-5);
    }

    fn test_fields() -> Vec<(&'static str, ScalarField, ScalarField)> {
        let cases: Vec<(&'static str, Value2, Grad2, Hess2)> = vec![
            (
                "|z|^2",
                Arc::new(|x: f64, y: f64| x * x + y * y),
                Arc::new(|x: f64, y: f64| (2.0 * x, 2.0 * y)),
                Arc::new(|_, _| (2.0, 0.0, 2.0)),
            ),
            (
                "Re z",
                Arc::new(|x: f64, _| x),
                Arc::new(|_, _| (1.0, 0.0)),
                Arc::new(|_, _| (0.0, 0.0, 0.0)),
            ),
            (
                "log|z|",
                Arc::new(|x: f64, y: f64| 0.5 * (x * x + y * y).ln()),
                Arc::new(|x: f64, y: f64| {
                    let r2 = x * x + y * y;
                    (x / r2, y / r2)
                }),
                Arc::new(|x: f64, y: f64| {
                    let r2 = x * x + y * y;
                    (
                        (y * y - x * x) / (r2 * r2),
                        -2.0 * x * y / (r2 * r2),
                        (x * x - y * y) / (r2 * r2),
                    )
                }),
            ),
            (
                "Re z^2",
                Arc::new(|x: f64, y: f64| x * x - y * y),
                Arc::new(|x: f64, y: f64| (2.0 * x, -2.0 * y)),
                Arc::new(|_, _| (2.0, 0.0, -2.0)),
            ),
        ];
        cases
            .into_iter()
            .map(|(name, v, g, h)| {
                let analytic = ScalarField {
                    value: v.clone(),
                    grad: g,
                    hessian: h,
                };
                let vv = v.clone();
                let fd = ScalarField::from_value(move |x, y| vv(x, y));
                (name, analytic, fd)
            })
            .collect()
    }

    #[test]
    fn laplacian_decomposition_holds_on_circles() {
        for (name, analytic, fd) in test_fields() {
            for radius in [0.5, 1.0, 2.0] {
                for theta in [0.3, 2.1, 4.0] {
                    let defect = laplacian_normal_identity_check(&analytic, radius, theta);
                    assert!(
                        defect <= 1e-10,
                        "analytic defect {defect:.3e} for {name} at r={radius}, theta={theta}"
                    );
                    let defect = laplacian_normal_identity_check(&fd, radius, theta);
                    assert!(
                        defect <= 1e-6,
                        "finite-difference defect {defect:.3e} for {name} at r={radius}, theta={theta}"
                    );
                }
            }
        }
    }
}
