//! Closed-form objects: the circle family through ±1, the reduced kernel,
//! the extremal values `I_θ` and the convex region Ω₁ they bound.
//!
//! Every circle Γ_θ (0 < θ < π) passes through −1 and +1, has center
//! `i·cot θ` and radius `csc θ`; each point off the real axis lies on exactly
//! one of them. The open disc bounded by Γ_θ is written D_θ.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ComplexValue;

/// An angle in the open interval (0, π) labelling the circle Γ_θ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ThetaAngle(f64);

impl ThetaAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && theta > 0.0 && theta < PI {
            Ok(ThetaAngle(theta))
        } else {
            Err(Error::Domain(format!("theta = {theta} is not in (0, pi)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The reflected angle π − θ (conjugate circle).
    pub fn reflect(self) -> Self {
        ThetaAngle(PI - self.0)
    }
}

impl TryFrom<f64> for ThetaAngle {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        ThetaAngle::new(v)
    }
}

impl From<ThetaAngle> for f64 {
    fn from(t: ThetaAngle) -> f64 {
        t.0
    }
}

/// The circle Γ_θ: center `i·cot θ`, radius `csc θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleTheta {
    pub theta: ThetaAngle,
    #[serde(with = "crate::complex_serde")]
    pub center: ComplexValue,
    pub radius: f64,
}

impl CircleTheta {
    /// True when `u` lies strictly inside D_θ.
    ///
    /// Decided through the circle through `u` rather than the distance to the
    /// centre, so points of Γ_θ itself (such as `i` on Γ_{π/2}) come out
    /// exactly on the boundary.
    pub fn contains(&self, u: ComplexValue) -> bool {
        if u.im == 0.0 {
            return u.re.abs() < 1.0;
        }
        match theta_of(u) {
            Ok(t) if u.im > 0.0 => t.value() > self.theta.value(),
            Ok(t) => t.value() < self.theta.value(),
            Err(_) => false,
        }
    }
}

pub fn circle_for_theta(theta: ThetaAngle) -> CircleTheta {
    let th = theta.value();
    CircleTheta {
        theta,
        center: Complex64::new(0.0, th.cos() / th.sin()),
        radius: 1.0 / th.sin(),
    }
}

/// The label θ(u) of the unique circle Γ_θ through `u`.
///
/// `cot θ = (|u|² − 1) / (2 Im u)`, evaluated with `atan2` so that no branch of
/// arccot has to be chosen.
pub fn theta_of(u: ComplexValue) -> Result<ThetaAngle> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite point {u}")));
    }
    if u.im == 0.0 {
        return Err(Error::Domain(format!("{u} lies on the real axis")));
    }
    let mut th = (2.0 * u.im).atan2(u.norm_sqr() - 1.0);
    if th <= 0.0 {
        th += PI;
    }
    ThetaAngle::new(th)
}

/// The reduced kernel `k(u) = −(1/π) / (conj(u + 1)·(u − 1))`.
pub fn kernel(u: ComplexValue) -> Result<ComplexValue> {
    let den = (u + 1.0).conj() * (u - 1.0);
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Singular(format!("kernel pole at {u}")));
    }
    Ok(-1.0 / (PI * den))
}

/// `k(u)` written through the label of the circle containing `u`:
/// `(1/π)·cos θ·e^{−iθ} / (1 − |u|²)` off the unit circle.
pub fn kernel_on_circle(u: ComplexValue) -> Result<ComplexValue> {
    let th = theta_of(u)?.value();
    let den = 1.0 - u.norm_sqr();
    if den == 0.0 {
        return kernel_on_unit_circle(u);
    }
    Ok(th.cos() * Complex64::from_polar(1.0, -th) / (PI * den))
}

/// `k(u) = i / (2π Im u)` for `u` on the unit circle.
pub fn kernel_on_unit_circle(u: ComplexValue) -> Result<ComplexValue> {
    if u.im == 0.0 {
        return Err(Error::Singular(format!("kernel pole at {u}")));
    }
    Ok(Complex64::new(0.0, 1.0 / (2.0 * PI * u.im)))
}

/// `I_θ = ln(2 sin θ) + i(π/2 − θ)`, the value of the transform at the
/// indicator of D_θ.
pub fn i_theta(theta: ThetaAngle) -> ComplexValue {
    let th = theta.value();
    Complex64::new((2.0 * th.sin()).ln(), FRAC_PI_2 - th)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Omega1Class {
    Interior,
    Boundary,
    Exterior,
}

/// Classifies `p` against Ω₁ using `d = |exp(p) − 1|`.
///
/// Ω₁ is the principal-logarithm image of the disc `|z − 1| < 1`, so points
/// with `|Im p| ≥ π/2` are outside whatever `d` says.
pub fn omega1_membership(p: ComplexValue, tol: f64) -> Omega1Class {
    if p.im.abs() >= FRAC_PI_2 {
        return Omega1Class::Exterior;
    }
    let d = omega1_distance(p);
    if (d - 1.0).abs() <= tol {
        Omega1Class::Boundary
    } else if d < 1.0 - tol {
        Omega1Class::Interior
    } else {
        Omega1Class::Exterior
    }
}

/// `|exp(p) − 1|`; equals 1 exactly on the boundary curve of Ω₁.
pub fn omega1_distance(p: ComplexValue) -> f64 {
    // Re(e^p - 1) = expm1(x) cos y - 2 sin^2(y/2), accurate near p = 0
    let re = p.re.exp_m1() * p.im.cos() - 2.0 * (p.im / 2.0).sin().powi(2);
    let im = p.re.exp() * p.im.sin();
    Complex64::new(re, im).norm()
}

/// Distance of the outermost boundary samples from θ = 0 and θ = π.
pub const BOUNDARY_SAMPLE_INSET: f64 = 1e-3;

/// `n` samples `(θ, I_θ)` of the boundary of Ω₁ on the uniform grid from
/// `δ` to `π − δ` with `δ = BOUNDARY_SAMPLE_INSET`, ordered by increasing θ.
/// Odd `n` puts the middle sample at θ = π/2.
pub fn omega1_boundary_samples(n: usize) -> Result<Vec<(f64, ComplexValue)>> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let d = BOUNDARY_SAMPLE_INSET;
    Ok((0..n)
        .map(|k| {
            let th = if 2 * k + 1 == n {
                FRAC_PI_2
            } else {
                d + (PI - 2.0 * d) * k as f64 / (n - 1) as f64
            };
            (th, i_theta(ThetaAngle(th)))
        })
        .collect())
}
