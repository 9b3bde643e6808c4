//! Circles and lines along which a density is integrated, and the exact
//! parameters at which such a path crosses the edges of a density.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::ComplexValue;

/// A circle written as `t ↦ (p + q·e^{it}) / s` with `s > 0`.
///
/// Keeping the divisor separate lets the very large circles Γ_θ with small θ
/// be handled with O(1) numbers: Γ_θ is `(i cos θ + e^{it}) / sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePath {
    pub p: ComplexValue,
    pub q: ComplexValue,
    pub s: f64,
}

impl CirclePath {
    pub fn new(center: ComplexValue, radius: f64) -> Self {
        CirclePath {
            p: center,
            q: Complex64::new(radius, 0.0),
            s: 1.0,
        }
    }

    /// Γ_θ with the parametrization `t ↦ csc θ·e^{it} + i cot θ`.
    pub fn theta_family(theta: f64) -> Self {
        CirclePath {
            p: Complex64::new(0.0, theta.cos()),
            q: Complex64::new(1.0, 0.0),
            s: theta.sin(),
        }
    }

    pub fn point(&self, t: f64) -> ComplexValue {
        (self.p + self.q * Complex64::cis(t)) / self.s
    }

    pub fn center(&self) -> ComplexValue {
        self.p / self.s
    }

    pub fn radius(&self) -> f64 {
        self.q.norm() / self.s
    }

    /// The image under `u ↦ a·u + b`, with the same parameter `t`.
    pub fn mapped(&self, a: ComplexValue, b: ComplexValue) -> Self {
        CirclePath {
            p: a * self.p + b * self.s,
            q: a * self.q,
            s: self.s,
        }
    }

    /// Parameters where the circle crosses the circle `|u − d| = ρ`.
    pub fn crossings_with_circle(&self, d: ComplexValue, rho: f64, out: &mut Vec<f64>) {
        // |m + q e^{it}|^2 = (rho s)^2 with m = p - d s
        let m = self.p - d * self.s;
        let (mn, qn) = (m.norm(), self.q.norm());
        if mn == 0.0 || qn == 0.0 {
            return;
        }
        let rs = rho * self.s;
        let two = 2.0 * mn * qn;
        // cos(t + arg(conj(m) q)) = x, with 1 + x and 1 - x formed without cancellation
        let diff = mn - qn;
        let one_plus = (rs - diff) * (rs + diff) / two;
        let sum = mn + qn;
        let one_minus = (sum - rs) * (sum + rs) / two;
        let phase = (m.conj() * self.q).arg();
        push_cos_roots(phase, one_plus, one_minus, out);
    }

    /// Parameters where `Re(point) = x`.
    pub fn crossings_with_vertical(&self, x: f64, out: &mut Vec<f64>) {
        // Re(q e^{it}) = x s - Re p
        self.solve_projection(self.q, x * self.s - self.p.re, out);
    }

    /// Parameters where `Im(point) = y`.
    pub fn crossings_with_horizontal(&self, y: f64, out: &mut Vec<f64>) {
        // Im(q e^{it}) = Re(-i q e^{it}) = y s - Im p
        self.solve_projection(Complex64::new(self.q.im, -self.q.re), y * self.s - self.p.im, out);
    }

    fn solve_projection(&self, a: ComplexValue, c: f64, out: &mut Vec<f64>) {
        let an = a.norm();
        if an == 0.0 {
            return;
        }
        let x = c / an;
        push_cos_roots(a.arg(), 1.0 + x, 1.0 - x, out);
    }
}

/// Roots of `cos(t + phase) = x` given `1 + x` and `1 - x`.
fn push_cos_roots(phase: f64, one_plus: f64, one_minus: f64, out: &mut Vec<f64>) {
    if !(one_plus >= 0.0 && one_minus >= 0.0) {
        return;
    }
    // arccos(x) = 2 atan2(sqrt(1 - x), sqrt(1 + x))
    let a = 2.0 * one_minus.sqrt().atan2(one_plus.sqrt());
    out.push(wrap_angle(-phase + a));
    if a > 0.0 && a < PI {
        out.push(wrap_angle(-phase - a));
    }
}

/// Maps an angle into (−π, π].
pub fn wrap_angle(t: f64) -> f64 {
    let mut r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// A line `s ↦ origin + s·dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePath {
    pub origin: ComplexValue,
    pub dir: ComplexValue,
}

impl LinePath {
    pub fn new(origin: ComplexValue, dir: ComplexValue) -> Self {
        LinePath { origin, dir }
    }

    pub fn horizontal(y: f64) -> Self {
        LinePath::new(Complex64::new(0.0, y), Complex64::new(1.0, 0.0))
    }

    pub fn ray(center: ComplexValue, angle: f64) -> Self {
        LinePath::new(center, Complex64::cis(angle))
    }

    pub fn point(&self, s: f64) -> ComplexValue {
        self.origin + self.dir * s
    }

    pub fn mapped(&self, a: ComplexValue, b: ComplexValue) -> Self {
        LinePath::new(a * self.origin + b, a * self.dir)
    }

    pub fn crossings_with_circle(&self, d: ComplexValue, rho: f64, out: &mut Vec<f64>) {
        let qa = self.dir.norm_sqr();
        if qa == 0.0 {
            return;
        }
        let m = self.origin - d;
        let qb = 2.0 * (self.dir.conj() * m).re;
        let qc = m.norm_sqr() - rho * rho;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return;
        }
        let root = disc.sqrt();
        let k = -0.5 * (qb + root.copysign(qb));
        if k != 0.0 {
            out.push(k / qa);
            out.push(qc / k);
        } else {
            out.push(0.0);
        }
    }

    pub fn crossings_with_vertical(&self, x: f64, out: &mut Vec<f64>) {
        if self.dir.re != 0.0 {
            out.push((x - self.origin.re) / self.dir.re);
        }
    }

    pub fn crossings_with_horizontal(&self, y: f64, out: &mut Vec<f64>) {
        if self.dir.im != 0.0 {
            out.push((y - self.origin.im) / self.dir.im);
        }
    }
}
