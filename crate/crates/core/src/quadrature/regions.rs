//! The six-region split of the cylinder used to compare `I_φ` against its
//! neighbours, and the preimage of the disc `|u| < R`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cylinder::Z_TOLERANCE;
use super::rules::{adaptive, adaptive_panels};
use super::IntegralResult;
use crate::error::{Error, Result};
use crate::geometry::ThetaAngle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
    E,
    F,
    Boundary,
}

/// A = L∩{θ>π/2}, B = L∩{φ<θ<π/2}, C = L∩{θ<φ},
/// D = U∩{θ>π/2}, E = U∩{φ<θ<π/2}, F = U∩{θ<φ}.
pub fn classify_region(t: f64, theta: f64, phi: ThetaAngle) -> Result<Region> {
    let phi = phi.value();
    if phi >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "phi = {phi} must be below pi/2; use I(pi - phi) = conj(I(phi))"
        )));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
    }
    let s = t.sin() + theta.cos();
    if s.abs() <= Z_TOLERANCE || theta == phi || theta == FRAC_PI_2 {
        return Ok(Region::Boundary);
    }
    let band = if theta > FRAC_PI_2 {
        0
    } else if theta > phi {
        1
    } else {
        2
    };
    Ok(match (s > 0.0, band) {
        (false, 0) => Region::A,
        (false, 1) => Region::B,
        (false, _) => Region::C,
        (true, 0) => Region::D,
        (true, 1) => Region::E,
        (true, _) => Region::F,
    })
}

/// The cylinder integrand of I restricted to C ∪ D ∪ E.
fn cde_integrand(t: f64, theta: f64, phi: ThetaAngle) -> Complex64 {
    let coef = Complex64::new(-theta.cos() / theta.sin(), 1.0) / (2.0 * PI);
    match classify_region(t, theta, phi) {
        Ok(Region::D | Region::E) => coef,
        Ok(Region::C) => -coef,
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Iterated integral of the cylinder integrand over C ∪ D ∪ E, θ-direction
/// first. The union is the cylinder image of D_φ, so the result is `I_φ`.
pub fn region_iterated_integral(phi: ThetaAngle, tol: f64) -> Result<IntegralResult> {
    let p = phi.value();
    if p >= FRAC_PI_2 {
        return Err(Error::Domain(format!("phi = {p} must be below pi/2")));
    }
    let depth = 50;
    let inner = |t: f64| {
        // θ_Z(t) separates U (below) from L (above) along this column
        let tz = (-t.sin()).clamp(-1.0, 1.0).acos();
        let mut cuts = vec![0.0, p, FRAC_PI_2, tz, PI];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let f = |theta: f64| cde_integrand(t, theta, phi);
        adaptive_panels(&f, &cuts, tol * 1e-2, depth).value
    };
    let t_breaks = [-PI, -FRAC_PI_2 - p, -FRAC_PI_2, p - FRAC_PI_2, FRAC_PI_2, PI];
    let mut total = super::rules::Estimate::zero();
    for w in t_breaks.windows(2) {
        total = total.combine(adaptive(&inner, w[0], w[1], tol / 5.0, depth));
    }
    Ok(IntegralResult {
        value: total.value,
        error_estimate: total.error,
        converged: total.converged,
        evaluations: total.evaluations,
    })
}

/// Data of the preimage of `|u| < R` under the cylinder map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreimageGeometry {
    pub r: f64,
    /// `(R² + 1)/2`.
    pub m: f64,
    /// `arccos((R² − 1)/(R² + 1))`: for θ below it Γ_θ leaves the disc.
    pub theta_r: f64,
    /// Zero of `s₁`, where `M sin²θ = 1`.
    pub theta_r0: f64,
}

pub fn preimage_geometry(r: f64) -> Result<PreimageGeometry> {
    if !(r.is_finite() && r > 1.0) {
        return Err(Error::Domain(format!("R = {r} must exceed 1")));
    }
    let r2 = r * r;
    let m = 0.5 * (r2 + 1.0);
    Ok(PreimageGeometry {
        r,
        m,
        theta_r: ((r2 - 1.0) / (r2 + 1.0)).acos(),
        theta_r0: m.sqrt().recip().asin(),
    })
}

/// `s₁(θ) = arcsin((M sin²θ − 1)/cos θ)`, where the U arc of Γ_θ crosses
/// `|u| = R`.
pub fn s1_curve(theta: f64, r: f64) -> Result<f64> {
    let geo = preimage_geometry(r)?;
    if !(theta > 0.0 && theta < geo.theta_r) || theta == FRAC_PI_2 {
        return Err(Error::Domain(format!("theta = {theta} outside (0, theta_R = {})", geo.theta_r)));
    }
    let arg = (geo.m * theta.sin().powi(2) - 1.0) / theta.cos();
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::Domain(format!("arcsin argument {arg} outside [-1, 1]")));
    }
    Ok(arg.asin())
}
