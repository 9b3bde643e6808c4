//! `(1/π)∫ g(u)/|u − w|² da(u)` by excision: the integral over
//! `|u − w| > ε` is computed for a decreasing sequence of ε and its limit is
//! judged finite, divergent or undecided.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfunction::{GSpec, LinePath, Piece};
use crate::quadrature::rules::{adaptive_panels, panel_breaks, Estimate};
use crate::quadrature::QuadConfig;
use crate::ComplexValue;

const ANGULAR_PANELS: usize = 8;

/// Successive differences must shrink by at least this factor to count as
/// geometric decay.
const DECAY_FACTOR: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalStatus {
    Finite,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalResult {
    pub status: DiagonalStatus,
    /// The extrapolated integral when finite.
    pub value: Option<f64>,
    pub error: f64,
    /// Absolute excision radii, decreasing.
    pub radii: Vec<f64>,
    /// Integral over `|u − w| > radii[k]`.
    pub evidence: Vec<f64>,
    /// Fitted `c` of the model `a + c·ln(1/ε)`.
    pub log_rate: f64,
}

impl DiagonalResult {
    pub fn is_divergent(&self) -> bool {
        self.status == DiagonalStatus::Divergent
    }
}

/// `(1/π)∫ dψ ∫ g/ρ dρ` over `rho_in < ρ < rho_out`.
fn shell(g: &GSpec, w: ComplexValue, rho_in: f64, rho_out: f64, tol: f64, depth: usize) -> Estimate<f64> {
    let f = |psi: f64| {
        let mut pieces: Vec<Piece> = Vec::new();
        g.pieces_on_line(&LinePath::ray(w, psi), rho_in, rho_out, &[], &mut pieces);
        pieces.iter().map(|p| p.value * (p.b / p.a).ln()).sum::<f64>() / PI
    };
    adaptive_panels(&f, &panel_breaks(-PI, PI, ANGULAR_PANELS, &[]), tol, depth)
}

/// Least-squares fit of `y ≈ a + b·x`; returns `(a, b, rms residual)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    (a, b, (rss / n).sqrt())
}

pub fn diag_integral(g: &GSpec, w: ComplexValue, cfg: &QuadConfig) -> Result<DiagonalResult> {
    cfg.validate()?;
    g.validate()?;
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain("w must be finite".into()));
    }
    let reach = g
        .support_box()
        .corners()
        .iter()
        .map(|c| (c - w).norm())
        .fold(0.0, f64::max);
    let radii: Vec<f64> = cfg.excision_radii.iter().map(|r| r * reach).collect();
    let k = radii.len();
    let depth = cfg.max_refinements;
    let tol = cfg.target_tol / k as f64;

    let mut bounds = vec![(radii[0], reach)];
    bounds.extend(radii.windows(2).map(|p| (p[1], p[0])));
    let shells: Vec<Estimate<f64>> = bounds
        .par_iter()
        .map(|&(a, b)| shell(g, w, a, b, tol, depth))
        .collect();

    let mut evidence = Vec::with_capacity(k);
    let mut acc = 0.0;
    let mut quad_err = 0.0;
    for s in &shells {
        acc += s.value;
        quad_err += s.error;
        evidence.push(acc);
    }

    let eps: Vec<f64> = cfg.excision_radii.clone();
    let (_, _, res_lin) = linear_fit(&eps, &evidence);
    let logs: Vec<f64> = eps.iter().map(|e| e.recip().ln()).collect();
    let (_, log_rate, res_log) = linear_fit(&logs, &evidence);

    let noise = 10.0 * cfg.target_tol.max(quad_err);
    let diffs: Vec<f64> = evidence.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let tail = &diffs[diffs.len().saturating_sub(3)..];
    let decays = tail.windows(2).all(|d| d[1] <= noise || d[1] <= DECAY_FACTOR * d[0]);

    let (status, value, error) = if log_rate > cfg.divergence_threshold && 10.0 * res_log <= res_lin {
        (DiagonalStatus::Divergent, None, quad_err)
    } else if decays {
        let (e0, e1) = (eps[k - 2], eps[k - 1]);
        let (v0, v1) = (evidence[k - 2], evidence[k - 1]);
        let extrapolated = (e0 * v1 - e1 * v0) / (e0 - e1);
        (
            DiagonalStatus::Finite,
            Some(extrapolated),
            quad_err + (extrapolated - v1).abs(),
        )
    } else {
        (DiagonalStatus::Inconclusive, None, quad_err)
    };
    Ok(DiagonalResult {
        status,
        value,
        error,
        radii,
        evidence,
        log_rate,
    })
}
