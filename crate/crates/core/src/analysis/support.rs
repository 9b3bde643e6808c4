//! Support function of the value set `{I_g : g ∈ G₁}`.
//!
//! `I_g` is linear in `g` with cylinder density `c(t, θ) = ±(−cot θ + i)/2π`
//! (+ on U, − on L), so `Re(e^{−iα} I_g)` is maximized by the bang-bang
//! density that is 1 exactly where `Re(e^{−iα} c) > 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{i_theta, ThetaAngle};
use crate::gfunction::{g_theta, GSpec};
use crate::quadrature::{map_u, QuadConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportResult {
    pub direction_alpha: f64,
    pub theta_star: ThetaAngle,
    /// `Re(e^{−iα}·I_{θ*})`.
    pub support_value: f64,
    pub extremal_gspec: GSpec,
    pub bang_bang: BangBang,
}

/// The bang-bang maximizer sampled at the cell centres of a cylinder grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BangBang {
    pub n_t: usize,
    pub n_theta: usize,
    /// Fraction of cells where the maximizer agrees with `g_{θ*}∘u`.
    pub agreement: f64,
    /// Midpoint-rule value of `Re(e^{−iα} I)` at the maximizer.
    pub achieved_value: f64,
}

/// Support function in direction α, with the bang-bang construction on the
/// `cfg.cylinder_grid` mesh.
pub fn support_function(alpha: f64, cfg: &QuadConfig) -> Result<SupportResult> {
    let (n_t, n_theta) = cfg.cylinder_grid;
    support_function_on_grid(alpha, n_t, n_theta)
}

pub fn support_function_on_grid(alpha: f64, n_t: usize, n_theta: usize) -> Result<SupportResult> {
    if !(alpha.is_finite() && alpha.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "direction alpha = {alpha} unsupported: the value set is unbounded toward Re -> -inf"
        )));
    }
    if n_t == 0 || n_theta == 0 {
        return Err(Error::Config("bang-bang grid must be non-empty".into()));
    }
    let theta_star = ThetaAngle::new(FRAC_PI_2 - alpha)?;
    let rot = Complex64::cis(-alpha);
    let support_value = (rot * i_theta(theta_star)).re;
    let extremal = g_theta(theta_star);

    let (dt, dth) = (2.0 * PI / n_t as f64, PI / n_theta as f64);
    let mut agree = 0usize;
    let mut value = 0.0;
    for j in 0..n_theta {
        let theta = (j as f64 + 0.5) * dth;
        let coef_u = Complex64::new(-theta.cos() / theta.sin(), 1.0) / (2.0 * PI);
        for i in 0..n_t {
            let t = -PI + (i as f64 + 0.5) * dt;
            let s = t.sin() + theta.cos();
            let coef = if s > 0.0 { coef_u } else { -coef_u };
            let gain = (rot * coef).re;
            let on = gain > 0.0;
            if on {
                value += gain * dt * dth;
            }
            let reference = extremal.evaluate(map_u(t, theta)?) == 1.0;
            if on == reference {
                agree += 1;
            }
        }
    }
    Ok(SupportResult {
        direction_alpha: alpha,
        theta_star,
        support_value,
        extremal_gspec: extremal,
        bang_bang: BangBang {
            n_t,
            n_theta,
            agreement: agree as f64 / (n_t * n_theta) as f64,
            achieved_value: value,
        },
    })
}
