//! The cylinder engine.
//!
//! For fixed θ the circle Γ_θ is traversed by `t ↦ u(t, θ)`. Starting at
//! `t₁ = θ − π/2`, one turn splits into the U arc `(t₁, 3π/2 − θ)` in the
//! upper half-plane and the L arc `(3π/2 − θ, t₁ + 2π)` in the lower one.
//! Because every density is piecewise constant with computable edges, the
//! inner t-integrals are exact and only the θ-direction is quadrature.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rules::{adaptive, adaptive_panels, panel_breaks, Estimate, Quantity};
use super::{IntegralResult, QuadConfig};
use crate::error::{Error, Result};
use crate::gfunction::{CirclePath, GSpec, Piece};
use crate::ComplexValue;

/// Width of the band around `sin t + cos θ = 0` that is tagged Z.
pub const Z_TOLERANCE: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CylinderTag {
    U,
    L,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub t: f64,
    pub theta: f64,
    pub tag: CylinderTag,
}

impl CylinderPoint {
    /// `t` is reduced to (−π, π]; θ must lie in (0, π).
    pub fn new(t: f64, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        if !t.is_finite() {
            return Err(Error::Domain(format!("t = {t} is not finite")));
        }
        let t = crate::gfunction::wrap_angle(t);
        Ok(CylinderPoint {
            t,
            theta,
            tag: tag_of(t, theta),
        })
    }
}

fn tag_of(t: f64, theta: f64) -> CylinderTag {
    let s = t.sin() + theta.cos();
    if s.abs() <= Z_TOLERANCE {
        CylinderTag::Z
    } else if s > 0.0 {
        CylinderTag::U
    } else {
        CylinderTag::L
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::Domain(format!("theta = {theta} outside (0, pi)")))
    }
}

/// `u(t, θ) = csc θ·e^{it} + i cot θ`.
pub fn map_u(t: f64, theta: f64) -> Result<ComplexValue> {
    check_theta(theta)?;
    Ok(CirclePath::theta_family(theta).point(t))
}

/// `csc³θ·|sin t + cos θ|`, the area element of `map_u`.
pub fn jacobian(t: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((t.sin() + theta.cos()).abs() / theta.sin().powi(3))
}

/// `k(u(t, θ)) = −(cot θ − i) / (2π csc³θ (sin t + cos θ))`.
pub fn parametrized_kernel(t: f64, theta: f64) -> Result<ComplexValue> {
    check_theta(theta)?;
    if tag_of(t, theta) == CylinderTag::Z {
        return Err(Error::Singular(format!("(t, theta) = ({t}, {theta}) lies on Z")));
    }
    let s = theta.sin();
    let denom = (t.sin() + theta.cos()) / (s * s * s);
    Ok(Complex64::new(theta.cos() / s, -1.0) / denom * (-0.5 / PI))
}

/// Exact t-measure of `g` on the U arc and on the L arc of Γ_θ.
pub(crate) fn arc_masses(g: &GSpec, theta: f64, pieces: &mut Vec<Piece>) -> (f64, f64) {
    let t1 = theta - FRAC_PI_2;
    let tz = 3.0 * FRAC_PI_2 - theta;
    pieces.clear();
    g.pieces_on_circle(&CirclePath::theta_family(theta), t1, t1 + 2.0 * PI, &[tz], pieces);
    let (mut mu, mut ml) = (0.0, 0.0);
    for p in pieces.iter() {
        if 0.5 * (p.a + p.b) < tz {
            mu += p.value * p.len();
        } else {
            ml += p.value * p.len();
        }
    }
    (mu, ml)
}

/// The graded coordinate: `θ(s) = π s^p / (s^p + (1 − s)^p)` and `dθ/ds`.
fn graded(s: f64, p: f64) -> (f64, f64) {
    let (a, b) = (s.powf(p), (1.0 - s).powf(p));
    let den = a + b;
    let theta = PI * a / den;
    let d = PI * p * (s * (1.0 - s)).powf(p - 1.0) / (den * den);
    (theta, d)
}

fn graded_inverse(theta: f64, p: f64) -> f64 {
    let r = (theta / (PI - theta)).powf(1.0 / p);
    r / (1.0 + r)
}

/// Integrates `f` over θ ∈ (0, π) on the graded mesh of `cfg`; `theta_breaks`
/// become additional panel ends.
pub(crate) fn integrate_theta<T, F>(f: &F, cfg: &QuadConfig, theta_breaks: &[f64]) -> Estimate<T>
where
    T: Quantity,
    F: Fn(f64) -> T + Sync,
{
    let p = cfg.theta_grading_exponent;
    let extra: Vec<f64> = theta_breaks
        .iter()
        .filter(|th| **th > 0.0 && **th < PI)
        .map(|th| graded_inverse(*th, p))
        .collect();
    let breaks = panel_breaks(0.0, 1.0, cfg.cylinder_grid.1, &extra);
    let h = |s: f64| {
        let (theta, d) = graded(s, p);
        if theta <= 0.0 || theta >= PI || d == 0.0 {
            T::zero()
        } else {
            f(theta) * d
        }
    };
    adaptive_panels(&h, &breaks, cfg.target_tol, cfg.max_refinements)
}

fn to_result(e: Estimate<Complex64>, tol: f64) -> IntegralResult {
    IntegralResult {
        value: e.value,
        error_estimate: e.error,
        converged: e.converged && e.error <= tol,
        evaluations: e.evaluations,
    }
}

/// `I_g = (1/2π)∫_U (−cot θ + i) g dt dθ + (1/2π)∫_L (cot θ − i) g dt dθ`.
pub fn cylinder_integrate(g: &GSpec, cfg: &QuadConfig) -> Result<IntegralResult> {
    cfg.validate()?;
    g.validate()?;
    if matches!(g, GSpec::Zero) {
        return Ok(IntegralResult::zero());
    }
    let f = |theta: f64| {
        let mut pieces = Vec::new();
        let (mu, ml) = arc_masses(g, theta, &mut pieces);
        Complex64::new(-theta.cos() / theta.sin(), 1.0) * ((mu - ml) / (2.0 * PI))
    };
    let mut breaks = vec![FRAC_PI_2];
    g.critical_thetas(&mut breaks);
    Ok(to_result(integrate_theta(&f, cfg, &breaks), cfg.target_tol))
}

/// Measures of U and L computed on the cylinder mesh (both equal π²).
pub fn cylinder_region_areas(cfg: &QuadConfig) -> Result<(IntegralResult, IntegralResult)> {
    cfg.validate()?;
    let area = |upper: bool| {
        let f = |theta: f64| {
            let len_u = 2.0 * PI - 2.0 * theta;
            Complex64::new(if upper { len_u } else { 2.0 * PI - len_u }, 0.0)
        };
        to_result(integrate_theta(&f, cfg, &[]), cfg.target_tol)
    };
    Ok((area(true), area(false)))
}

/// `(1/2π)∫_{U∪L} |cot θ|·g(u(t, θ)) dt dθ`, with a sequence of truncations
/// `∫_{δ_k}^{π−δ_k}` that certifies absolute convergence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Mass {
    /// The full integral over (0, π); the value is real.
    pub result: IntegralResult,
    /// Truncation widths `δ_k = δ₀·2^{−k}`.
    pub cutoffs: Vec<f64>,
    /// Integral over `[δ_k, π − δ_k]` for each cutoff.
    pub levels: Vec<f64>,
}

impl Lemma1Mass {
    pub fn differences(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Ratios of successive differences; a zero difference followed by a
    /// zero difference counts as infinitely fast convergence.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences()
            .windows(2)
            .map(|d| {
                if d[1] == 0.0 {
                    f64::INFINITY
                } else {
                    d[0].abs() / d[1].abs()
                }
            })
            .collect()
    }
}

pub const LEMMA1_FIRST_CUTOFF: f64 = 0.1;
pub const LEMMA1_LEVELS: usize = 6;

pub fn lemma1_mass(g: &GSpec, cfg: &QuadConfig) -> Result<Lemma1Mass> {
    cfg.validate()?;
    g.validate()?;
    let f = |theta: f64| {
        let mut pieces = Vec::new();
        let (mu, ml) = arc_masses(g, theta, &mut pieces);
        (theta.cos() / theta.sin()).abs() * (mu + ml) / (2.0 * PI)
    };
    let mut breaks = vec![FRAC_PI_2];
    g.critical_thetas(&mut breaks);
    let full = integrate_theta(&f, cfg, &breaks);
    let result = IntegralResult {
        value: Complex64::new(full.value, 0.0),
        error_estimate: full.error,
        converged: full.converged && full.error <= cfg.target_tol,
        evaluations: full.evaluations,
    };

    let cutoffs: Vec<f64> = (0..LEMMA1_LEVELS)
        .map(|k| LEMMA1_FIRST_CUTOFF * 0.5f64.powi(k as i32))
        .collect();
    let depth = cfg.max_refinements;
    let tol = cfg.target_tol * 1e-2;
    let d0 = cutoffs[0];
    let core = adaptive_panels(
        &f,
        &panel_breaks(d0, PI - d0, cfg.cylinder_grid.1, &breaks),
        tol,
        depth,
    );
    let mut levels = vec![core.value];
    let mut acc = core.value;
    for w in cutoffs.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        acc += adaptive(&f, lo, hi, tol, depth).value + adaptive(&f, PI - hi, PI - lo, tol, depth).value;
        levels.push(acc);
    }
    Ok(Lemma1Mass {
        result,
        cutoffs,
        levels,
    })
}
