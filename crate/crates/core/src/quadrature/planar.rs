//! The planar engine for `C_g(z, w)`.
//!
//! The plane is split into a far field, outside the discs `D(z, ε₀)` and
//! `D(w, ε₀)`, and annuli `ε_{k+1} < |u − c| < ε_k` around `c ∈ {z, w}`.
//! The far field is swept by horizontal lines and the annuli by rays from
//! their centre; on every constant piece of `g` the inner integral has a
//! closed form. The partial sums `V_k` (everything outside the ε_k-discs)
//! are extrapolated to ε = 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::rules::{adaptive_panels, panel_breaks, Estimate};
use super::{IntegralResult, QuadConfig};
use crate::error::{Error, Result};
use crate::gfunction::{wrap_angle, Curve, Edge, GSpec, LinePath, Piece};
use crate::ComplexValue;

/// Base angular panels for the annuli.
const ANGULAR_PANELS: usize = 8;

/// Highest polynomial degree used when extrapolating to ε = 0.
const MAX_EXTRAPOLATION_DEGREE: usize = 3;

/// Halvings appended to the excision radii while an edge still enters the
/// innermost discs.
const MAX_EXTRA_LEVELS: usize = 40;

pub fn planar_integrate(g: &GSpec, z: ComplexValue, w: ComplexValue, cfg: &QuadConfig) -> Result<IntegralResult> {
    cfg.validate()?;
    g.validate()?;
    if z == w {
        return Err(Error::Diagonal);
    }
    if !(z.re.is_finite() && z.im.is_finite() && w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain("z and w must be finite".into()));
    }
    if matches!(g, GSpec::Zero) {
        return Ok(IntegralResult::zero());
    }
    let d = (z - w).norm();
    let edges = g.edges();
    let corners = g.corner_points();
    // on a disc around z or w that no edge enters, g is constant and the
    // kernel integrates to exactly zero, so the partial sums stop changing
    let clear = edges
        .iter()
        .map(|e| e.curve.distance(z).min(e.curve.distance(w)))
        .fold(f64::INFINITY, f64::min);
    let mut eps: Vec<f64> = cfg.excision_radii.iter().map(|r| r * d).collect();
    if clear > 0.0 {
        for _ in 0..MAX_EXTRA_LEVELS {
            let last = eps[eps.len() - 1];
            if last < clear {
                break;
            }
            eps.push(0.5 * last);
        }
    }
    let exact_at = eps.iter().position(|e| *e < clear);
    if let Some(j) = exact_at {
        eps.truncate(j + 1);
    }
    let k = eps.len();
    let tol = cfg.target_tol;
    let scale = -1.0 / PI;

    let far = far_field(g, &edges, z, w, eps[0], cfg, 0.5 * tol / scale.abs());

    let near_tol = 0.5 * tol / scale.abs() / (2 * (k - 1)).max(1) as f64;
    let jobs: Vec<(usize, bool)> = (0..k - 1).flat_map(|j| [(j, true), (j, false)]).collect();
    let near: Vec<Estimate<Complex64>> = jobs
        .par_iter()
        .map(|&(j, around_z)| {
            let ring = Ring {
                edges: &edges,
                corners: &corners,
                rho_in: eps[j + 1],
                rho_out: eps[j],
            };
            annulus(g, z, w, around_z, ring, near_tol, cfg.max_refinements)
        })
        .collect();

    let mut partial = Vec::with_capacity(k);
    let mut quad = far;
    let mut v = far.value;
    partial.push(v * scale);
    for j in 0..k - 1 {
        let (a, b) = (near[2 * j], near[2 * j + 1]);
        v = v + a.value + b.value;
        quad = quad.combine(a).combine(b);
        partial.push(v * scale);
    }
    let (value, extrap_err) = if exact_at.is_some() {
        (partial[k - 1], 0.0)
    } else {
        extrapolate_to_zero(&eps, &partial)
    };
    let error = quad.error * scale.abs() + extrap_err;
    Ok(IntegralResult {
        value,
        error_estimate: error,
        converged: quad.converged && error <= tol,
        evaluations: quad.evaluations,
    })
}

/// Polynomial extrapolation of `values(ε)` to ε = 0 through the last points,
/// with the difference between the two highest degrees as error.
pub(crate) fn extrapolate_to_zero(eps: &[f64], values: &[Complex64]) -> (Complex64, f64) {
    let n = eps.len();
    let deg = MAX_EXTRAPOLATION_DEGREE.min(n - 1);
    let at_degree = |m: usize| {
        // Lagrange through the last m + 1 points, evaluated at 0
        let idx: Vec<usize> = (n - 1 - m..n).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for &i in &idx {
            let mut wgt = 1.0;
            for &j in &idx {
                if i != j {
                    wgt *= eps[j] / (eps[j] - eps[i]);
                }
            }
            acc += values[i] * wgt;
        }
        acc
    };
    if deg == 0 {
        return (values[n - 1], 0.0);
    }
    let best = at_degree(deg);
    let prev = at_degree(deg - 1);
    (best, (best - prev).norm())
}

/// `∫ dx / (conj(u − w)(u − z))` along `u = x + iy`, `x ∈ [xa, xb]`.
fn line_kernel_integral(xa: f64, xb: f64, y: f64, z: ComplexValue, w: ComplexValue) -> Complex64 {
    // conj(u - w) = x - α, u - z = x - β
    let alpha = Complex64::new(w.re, y - w.im);
    let beta = Complex64::new(z.re, z.im - y);
    let log_ratio = |c: Complex64| ((Complex64::new(xb, 0.0) - c) / (Complex64::new(xa, 0.0) - c)).ln();
    let diff = alpha - beta;
    let m = 0.5 * (alpha + beta);
    let da = (Complex64::new(xa, 0.0) - m).norm();
    let db = (Complex64::new(xb, 0.0) - m).norm();
    if diff.norm() <= 1e-5 * da.min(db) {
        // divided difference of log_ratio by its derivative at the midpoint
        let one = Complex64::new(1.0, 0.0);
        one / (Complex64::new(xa, 0.0) - m) - one / (Complex64::new(xb, 0.0) - m)
    } else {
        (log_ratio(alpha) - log_ratio(beta)) / diff
    }
}

fn chord(center: ComplexValue, radius: f64, y: f64, out: &mut Vec<f64>) {
    let dy = y - center.im;
    if dy.abs() < radius {
        let h = ((radius - dy) * (radius + dy)).sqrt();
        out.push(center.re - h);
        out.push(center.re + h);
    }
}

/// Integral of `g / (conj(u − w)(u − z))` outside `D(z, ε) ∪ D(w, ε)`,
/// without the factor −1/π.
fn far_field(
    g: &GSpec,
    edges: &[Edge],
    z: ComplexValue,
    w: ComplexValue,
    eps: f64,
    cfg: &QuadConfig,
    tol: f64,
) -> Estimate<Complex64> {
    let bbox = g.support_box();
    let mut levels = Vec::new();
    g.horizontal_levels(&mut levels);
    let mut meets = Vec::new();
    for c in [z, w] {
        let rim = Curve::Circle { center: c, radius: eps };
        for e in edges {
            e.curve.intersections(&rim, &mut meets);
        }
    }
    levels.extend(meets.iter().map(|p| p.im));
    levels.extend_from_slice(&[z.im - eps, z.im, z.im + eps, w.im - eps, w.im, w.im + eps]);
    let n = ((bbox.y1 - bbox.y0) * cfg.planar_resolution).ceil().max(1.0) as usize;
    let breaks = panel_breaks(bbox.y0, bbox.y1, n, &levels);
    let f = |y: f64| {
        let mut extra = Vec::with_capacity(4);
        chord(z, eps, y, &mut extra);
        chord(w, eps, y, &mut extra);
        let mut pieces: Vec<Piece> = Vec::new();
        g.pieces_on_line(&LinePath::horizontal(y), bbox.x0, bbox.x1, &extra, &mut pieces);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &pieces {
            let mid = Complex64::new(0.5 * (p.a + p.b), y);
            if (mid - z).norm() < eps || (mid - w).norm() < eps {
                continue;
            }
            acc += line_kernel_integral(p.a, p.b, y, z, w) * p.value;
        }
        acc
    };
    adaptive_panels(&f, &breaks, tol, cfg.max_refinements)
}

struct Ring<'a> {
    edges: &'a [Edge],
    corners: &'a [ComplexValue],
    rho_in: f64,
    rho_out: f64,
}

/// Integral over the annulus `rho_in < |u − c| < rho_out` around `c = z`
/// (`around_z`) or `c = w`, without the factor −1/π.
fn annulus(
    g: &GSpec,
    z: ComplexValue,
    w: ComplexValue,
    around_z: bool,
    ring: Ring,
    tol: f64,
    depth: usize,
) -> Estimate<Complex64> {
    let center = if around_z { z } else { w };
    let a = if around_z { (z - w).conj() } else { w - z };
    let (rho_in, rho_out) = (ring.rho_in, ring.rho_out);
    let f = |psi: f64| {
        let b = if around_z { Complex64::cis(-psi) } else { Complex64::cis(psi) };
        let mut pieces: Vec<Piece> = Vec::new();
        g.pieces_on_line(&LinePath::ray(center, psi), rho_in, rho_out, &[], &mut pieces);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &pieces {
            acc += ((a + b * p.b) / (a + b * p.a)).ln() * p.value;
        }
        acc
    };
    // directions where the radial sections change combinatorially
    let mut dirs = Vec::new();
    let mut meets: Vec<ComplexValue> = ring.corners.to_vec();
    for e in ring.edges {
        e.curve.critical_directions(center, &mut dirs);
        for r in [rho_in, rho_out] {
            e.curve.intersections(&Curve::Circle { center, radius: r }, &mut meets);
        }
    }
    dirs.extend(meets.iter().filter(|p| **p != center).map(|p| (p - center).arg()));
    for d in dirs.iter_mut() {
        *d = wrap_angle(*d);
    }
    let breaks = panel_breaks(-PI, PI, ANGULAR_PANELS, &dirs);
    adaptive_panels(&f, &breaks, tol, depth)
}
