//! The inequality `|1 − E_g(z, w)| ≤ 1`, its equality case, and the
//! geometry of the value set `{I_g}`.

pub mod corpus;
pub mod diagonal;
pub mod support;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

pub use diagonal::{diag_integral, DiagonalResult, DiagonalStatus};
pub use support::{support_function, support_function_on_grid, BangBang, SupportResult};

use crate::error::{Error, Result};
use crate::geometry::{i_theta, omega1_distance, omega1_membership, Omega1Class, ThetaAngle};
use crate::gfunction::{affine_pullback, GSpec};
use crate::quadrature::{cylinder_integrate, planar_integrate, IntegralResult, QuadConfig, Route};
use crate::ComplexValue;

/// Smallest tolerance used when deciding that a value lies on the boundary.
pub const BOUNDARY_FLOOR: f64 = 1e-6;

/// Grid used to compare a density with a matched extremal disc.
pub const MATCH_GRID: usize = 200;

/// Minimum fraction of agreeing grid cells for a match.
pub const MATCH_AGREEMENT: f64 = 0.999;

/// `C_g(z, w)` by the engine selected in `cfg.route`.
pub fn c_value(g: &GSpec, z: ComplexValue, w: ComplexValue, cfg: &QuadConfig) -> Result<IntegralResult> {
    if z == w {
        return Err(Error::Diagonal);
    }
    match cfg.route {
        Route::Planar => planar_integrate(g, z, w, cfg),
        Route::Cylinder => cylinder_integrate(&affine_pullback(g, z, w)?, cfg),
    }
}

/// Both engines side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineComparison {
    pub planar: IntegralResult,
    pub cylinder: IntegralResult,
    pub difference: f64,
    /// `difference ≤ 3·(sum of the two error estimates)`.
    pub agree: bool,
}

pub fn c_value_both(g: &GSpec, z: ComplexValue, w: ComplexValue, cfg: &QuadConfig) -> Result<EngineComparison> {
    let planar = c_value(g, z, w, &QuadConfig { route: Route::Planar, ..cfg.clone() })?;
    let cylinder = c_value(g, z, w, &QuadConfig { route: Route::Cylinder, ..cfg.clone() })?;
    let difference = (planar.value - cylinder.value).norm();
    Ok(EngineComparison {
        planar,
        cylinder,
        difference,
        agree: difference <= 3.0 * (planar.error_estimate + cylinder.error_estimate),
    })
}

/// `E(z, w)` with its propagated error.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EValue {
    value: ComplexValue,
    c: Option<IntegralResult>,
    error: f64,
    converged: bool,
}

fn e_with_error(g: &GSpec, z: ComplexValue, w: ComplexValue, cfg: &QuadConfig) -> Result<EValue> {
    if z != w {
        let c = c_value(g, z, w, cfg)?;
        let e = c.value.exp();
        return Ok(EValue {
            value: e,
            c: Some(c),
            error: e.norm() * c.error_estimate,
            converged: c.converged,
        });
    }
    let d = diag_integral(g, w, cfg)?;
    match d.status {
        DiagonalStatus::Divergent => Ok(EValue {
            value: Complex64::new(0.0, 0.0),
            c: None,
            error: 0.0,
            converged: true,
        }),
        DiagonalStatus::Finite => {
            let v = d.value.unwrap_or(0.0);
            let e = (-v).exp();
            Ok(EValue {
                value: Complex64::new(e, 0.0),
                c: None,
                error: e * d.error,
                converged: true,
            })
        }
        DiagonalStatus::Inconclusive => Err(Error::InconclusiveDiagonal { evidence: d.evidence }),
    }
}

/// `E_g(z, w) = exp C_g(z, w)`; on the diagonal 0 when the integral of
/// `g/|u − w|²` diverges and `exp(−(1/π)∫ g/|u − w|²)` otherwise.
pub fn e_value(g: &GSpec, z: ComplexValue, w: ComplexValue, cfg: &QuadConfig) -> Result<ComplexValue> {
    e_with_error(g, z, w, cfg).map(|e| e.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StrictInterior,
    BoundaryExtremal,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityVerdict {
    #[serde(with = "crate::complex_serde")]
    pub z: ComplexValue,
    #[serde(with = "crate::complex_serde")]
    pub w: ComplexValue,
    /// `C_g(z, w)`; absent on the diagonal.
    pub c_value: Option<IntegralResult>,
    #[serde(with = "crate::complex_serde")]
    pub e_value: ComplexValue,
    /// `1 − |1 − E|`.
    pub gap: f64,
    /// Error estimate of `gap`.
    pub error: f64,
    pub converged: bool,
    pub classification: Classification,
    pub matched_theta: Option<ThetaAngle>,
    /// Agreement of `g` with the matched disc on the comparison grid.
    pub pointwise_agreement: Option<f64>,
}

/// Evaluates `1 − |1 − E_g(z, w)|` and, near equality, tries to identify `g`
/// as the image of some D_θ under `v ↦ ½((z − w)v + (z + w))`.
pub fn verify_inequality(g: &GSpec, z: ComplexValue, w: ComplexValue, cfg: &QuadConfig) -> Result<InequalityVerdict> {
    let e = e_with_error(g, z, w, cfg)?;
    let gap = 1.0 - (Complex64::new(1.0, 0.0) - e.value).norm();
    let boundary_tol = BOUNDARY_FLOOR.max(10.0 * e.error);
    let classification = if gap < -e.error.max(f64::EPSILON) {
        Classification::Violation
    } else if gap.abs() <= boundary_tol {
        Classification::BoundaryExtremal
    } else {
        Classification::StrictInterior
    };
    let mut verdict = InequalityVerdict {
        z,
        w,
        c_value: e.c,
        e_value: e.value,
        gap,
        error: e.error,
        converged: e.converged,
        classification,
        matched_theta: None,
        pointwise_agreement: None,
    };
    if classification == Classification::BoundaryExtremal {
        if let Some(c) = e.c {
            match_extremal(g, z, w, &c, &mut verdict)?;
        }
    }
    Ok(verdict)
}

fn match_extremal(g: &GSpec, z: ComplexValue, w: ComplexValue, c: &IntegralResult, v: &mut InequalityVerdict) -> Result<()> {
    // Im I_θ = π/2 − θ is injective on the boundary curve
    let theta = FRAC_PI_2 - c.value.im;
    let Ok(theta) = ThetaAngle::new(theta) else {
        return Ok(());
    };
    let tol = BOUNDARY_FLOOR.max(10.0 * c.error_estimate);
    if (c.value - i_theta(theta)).norm() > tol {
        return Ok(());
    }
    let disc = GSpec::transformed_disc_theta(theta, z, w)?;
    let agreement = grid_agreement(g, &disc);
    v.pointwise_agreement = Some(agreement);
    if agreement >= MATCH_AGREEMENT {
        v.matched_theta = Some(theta);
    }
    Ok(())
}

/// Fraction of cell centres of a `MATCH_GRID²` grid over both supports where
/// `a` and `b` take the same value.
pub fn grid_agreement(a: &GSpec, b: &GSpec) -> f64 {
    let bb = a.support_box().hull(&b.support_box());
    let n = MATCH_GRID;
    let (hx, hy) = ((bb.x1 - bb.x0) / n as f64, (bb.y1 - bb.y0) / n as f64);
    let mut same = 0usize;
    for j in 0..n {
        for i in 0..n {
            let u = Complex64::new(bb.x0 + (i as f64 + 0.5) * hx, bb.y0 + (j as f64 + 0.5) * hy);
            if a.evaluate(u) == b.evaluate(u) {
                same += 1;
            }
        }
    }
    same as f64 / (n * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Omega1Location {
    pub class: Omega1Class,
    /// `|exp(I_g) − 1|`.
    pub distance: f64,
    pub tolerance: f64,
    pub value: IntegralResult,
}

/// Locates `I_g` (cylinder engine) relative to Ω₁.
pub fn omega1_locate(g: &GSpec, cfg: &QuadConfig) -> Result<Omega1Location> {
    let value = cylinder_integrate(g, cfg)?;
    if !value.converged {
        return Err(Error::NotConverged {
            error: value.error_estimate,
        });
    }
    let distance = omega1_distance(value.value);
    let tolerance = 1e-9f64.max(10.0 * value.error_estimate * value.value.exp().norm());
    Ok(Omega1Location {
        class: omega1_membership(value.value, tolerance),
        distance,
        tolerance,
        value,
    })
}

/// Smallest λ ∈ [0, 1] where `|exp(z) − 1| − 1` changes sign along
/// `z = (1 − λ)p + λq`, to 1e−12 in λ.
pub fn boundary_crossing(p: ComplexValue, q: ComplexValue) -> Result<f64> {
    let f = |lam: f64| omega1_distance(p * (1.0 - lam) + q * lam) - 1.0;
    const ON_CURVE: f64 = 1e-12;
    if f(0.0).abs() <= ON_CURVE {
        return Ok(0.0);
    }
    // bracket the first sign change on a fine scan
    const SCAN: usize = 256;
    let s0 = f(0.0).signum();
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=SCAN {
        let lam = k as f64 / SCAN as f64;
        let v = f(lam);
        if v.abs() <= ON_CURVE || v.signum() != s0 {
            hi = Some(lam);
            break;
        }
        lo = lam;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NoSignChange);
    };
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.signum() == s0 && v.abs() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() < f(hi).abs() { lo } else { hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripCheck {
    pub passed: bool,
    pub value: IntegralResult,
}

/// `Re I_g ≤ ln 2` and `|Im I_g| ≤ π/2`, both up to the engine error.
pub fn strip_bounds_check(g: &GSpec, cfg: &QuadConfig) -> Result<StripCheck> {
    let value = cylinder_integrate(g, cfg)?;
    let err = value.error_estimate;
    let passed = value.value.re <= 2f64.ln() + err && value.value.im.abs() <= FRAC_PI_2 + err;
    Ok(StripCheck { passed, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunction::{convex_path, g_theta};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disc_pi2() -> GSpec {
        g_theta(ThetaAngle::new(FRAC_PI_2).unwrap())
    }

    #[test]
    fn c_value_examples() {
        let cfg = QuadConfig::default();
        let (one, m1) = (c(1.0, 0.0), c(-1.0, 0.0));
        assert_eq!(c_value(&GSpec::Zero, one, m1, &cfg).unwrap().value, c(0.0, 0.0));
        let t = ThetaAngle::new(1.1).unwrap();
        let r = c_value(&g_theta(t), one, m1, &cfg).unwrap();
        assert!((r.value - i_theta(t)).norm() < 1e-6);
        let base = c_value(&disc_pi2(), one, m1, &cfg).unwrap();
        let scaled = c_value(&GSpec::scale(0.9, disc_pi2()).unwrap(), one, m1, &cfg).unwrap();
        assert!((scaled.value - base.value * 0.9).norm() < 1e-6);
        assert!(matches!(c_value(&disc_pi2(), one, one, &cfg), Err(Error::Diagonal)));
    }

    #[test]
    fn e_value_examples() {
        let cfg = QuadConfig::default();
        let (one, m1) = (c(1.0, 0.0), c(-1.0, 0.0));
        assert_eq!(e_value(&GSpec::Zero, one, m1, &cfg).unwrap(), c(1.0, 0.0));
        assert!((e_value(&disc_pi2(), one, m1, &cfg).unwrap() - c(2.0, 0.0)).norm() < 1e-6);
        let origin = c(0.0, 0.0);
        assert_eq!(e_value(&disc_pi2(), origin, origin, &cfg).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn verdict_examples() {
        let cfg = QuadConfig::default();
        let (one, m1) = (c(1.0, 0.0), c(-1.0, 0.0));
        let v = verify_inequality(&disc_pi2(), one, m1, &cfg).unwrap();
        assert_eq!(v.classification, Classification::BoundaryExtremal);
        assert!((v.matched_theta.unwrap().value() - FRAC_PI_2).abs() < 1e-6);
        let v = verify_inequality(&GSpec::Zero, one, m1, &cfg).unwrap();
        assert_eq!(v.gap, 1.0);
        let v = verify_inequality(&GSpec::scale(0.9, disc_pi2()).unwrap(), one, m1, &cfg).unwrap();
        assert_eq!(v.classification, Classification::StrictInterior);
        assert!((v.gap - 0.133_926).abs() < 1e-5, "{}", v.gap);
        assert!(v.matched_theta.is_none());
    }

    #[test]
    fn convex_path_is_affine_in_lambda() {
        let cfg = QuadConfig::default();
        let g = GSpec::rect(-0.5, 0.7, -0.2, 0.9).unwrap();
        let (one, m1) = (c(1.0, 0.0), c(-1.0, 0.0));
        let base = c_value(&g, one, m1, &cfg).unwrap().value;
        for lam in [0.25, 0.6] {
            let mixed = c_value(&convex_path(&g, lam).unwrap(), one, m1, &cfg).unwrap().value;
            let expect = base * (1.0 - lam) + c(2f64.ln() * lam, 0.0);
            assert!((mixed - expect).norm() < 1e-6);
        }
    }

    #[test]
    fn omega1_examples() {
        let cfg = QuadConfig::default();
        assert_eq!(omega1_locate(&GSpec::Zero, &cfg).unwrap().class, Omega1Class::Interior);
        let q = g_theta(ThetaAngle::new(PI / 4.0).unwrap());
        assert_eq!(omega1_locate(&q, &cfg).unwrap().class, Omega1Class::Boundary);
        let half = GSpec::intersection(disc_pi2(), GSpec::rect(-1.0, 1.0, 0.0, 1.0).unwrap());
        assert_eq!(omega1_locate(&half, &cfg).unwrap().class, Omega1Class::Interior);
    }

    #[test]
    fn crossing_examples() {
        let ln2 = c(2f64.ln(), 0.0);
        assert_eq!(boundary_crossing(ln2, ln2).unwrap(), 0.0);
        let lam = boundary_crossing(c(0.0, 0.0), c(1.2, 0.0)).unwrap();
        assert!((lam - 2f64.ln() / 1.2).abs() < 1e-12, "{lam}");
        let p = c(0.8, 0.8);
        let lam = boundary_crossing(p, c(0.0, 0.0)).unwrap();
        assert!((omega1_distance(p * (1.0 - lam)) - 1.0).abs() < 1e-10);
        assert!(matches!(boundary_crossing(c(0.0, 0.0), c(0.1, 0.1)), Err(Error::NoSignChange)));
    }

    #[test]
    fn strip_examples() {
        let cfg = QuadConfig::default();
        assert!(strip_bounds_check(&disc_pi2(), &cfg).unwrap().passed);
        assert!(strip_bounds_check(&GSpec::Zero, &cfg).unwrap().passed);
    }
}
