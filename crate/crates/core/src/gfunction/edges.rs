//! The curves across which a density can jump, as circles and segments.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::paths::LinePath;
use crate::geometry::theta_of;
use crate::ComplexValue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Circle { center: ComplexValue, radius: f64 },
    Segment { a: ComplexValue, b: ComplexValue },
}

/// A curve together with the index of the primitive it bounds; curves of the
/// same primitive only meet at segment endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub curve: Curve,
    pub primitive: usize,
}

/// Slack on the segment parameter when intersecting, relative to [0, 1].
const SEGMENT_SLACK: f64 = 1e-12;

impl Curve {
    pub fn distance(&self, p: ComplexValue) -> f64 {
        match *self {
            Curve::Circle { center, radius } => ((p - center).norm() - radius).abs(),
            Curve::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - a).norm();
                }
                let s = ((p - a) * d.conj()).re / len2;
                (p - (a + d * s.clamp(0.0, 1.0))).norm()
            }
        }
    }

    /// Points where the two curves meet.
    pub fn intersections(&self, other: &Curve, out: &mut Vec<ComplexValue>) {
        match (*self, *other) {
            (Curve::Circle { center: c1, radius: r1 }, Curve::Circle { center: c2, radius: r2 }) => {
                let d = c2 - c1;
                let dn = d.norm();
                if dn == 0.0 || dn > r1 + r2 || dn < (r1 - r2).abs() {
                    return;
                }
                let along = (dn * dn + r1 * r1 - r2 * r2) / (2.0 * dn);
                let h = (r1 * r1 - along * along).max(0.0).sqrt();
                let e = d / dn;
                let base = c1 + e * along;
                let perp = Complex64::new(0.0, 1.0) * e * h;
                out.push(base + perp);
                if h > 0.0 {
                    out.push(base - perp);
                }
            }
            (Curve::Segment { a, b }, Curve::Circle { center, radius })
            | (Curve::Circle { center, radius }, Curve::Segment { a, b }) => {
                let line = LinePath::new(a, b - a);
                let mut s = Vec::with_capacity(2);
                line.crossings_with_circle(center, radius, &mut s);
                out.extend(
                    s.into_iter()
                        .filter(|s| (-SEGMENT_SLACK..=1.0 + SEGMENT_SLACK).contains(s))
                        .map(|s| line.point(s)),
                );
            }
            (Curve::Segment { a: p, b: q }, Curve::Segment { a: r, b: t }) => {
                let (d1, d2) = (q - p, t - r);
                let den = (d1.conj() * d2).im;
                if den == 0.0 {
                    return;
                }
                let w = r - p;
                let s = (w.conj() * d2).im / den;
                let u = (w.conj() * d1).im / den;
                let range = -SEGMENT_SLACK..=1.0 + SEGMENT_SLACK;
                if range.contains(&s) && range.contains(&u) {
                    out.push(p + d1 * s);
                }
            }
        }
    }

    /// Angles θ ∈ (0, π) at which Γ_θ touches the curve tangentially or
    /// passes through an endpoint.
    pub fn critical_thetas(&self, out: &mut Vec<f64>) {
        match *self {
            Curve::Circle { center, radius } => {
                // |c − i cot θ| = csc θ ± r
                let a = center.norm_sqr() - 1.0 - radius * radius;
                let b = -2.0 * center.im;
                solve_sin_cos(a, b, 2.0 * radius, out);
                solve_sin_cos(a, b, -2.0 * radius, out);
            }
            Curve::Segment { a, b } => {
                push_theta(a, out);
                push_theta(b, out);
                let d = b - a;
                if d.norm() == 0.0 {
                    return;
                }
                // unit normal n, line Re(conj(n)·u) = h; tangency: n_y cos θ − h sin θ = ±1
                let n = Complex64::new(0.0, 1.0) * d / d.norm();
                let h = (n.conj() * a).re;
                solve_sin_cos(-h, n.im, 1.0, out);
                solve_sin_cos(-h, n.im, -1.0, out);
            }
        }
    }

    /// Directions ψ of rays from `c` that are tangent to the curve or pass
    /// through an endpoint.
    pub fn critical_directions(&self, c: ComplexValue, out: &mut Vec<f64>) {
        match *self {
            Curve::Circle { center, radius } => {
                let d = center - c;
                let dn = d.norm();
                if dn > radius {
                    let spread = (radius / dn).asin();
                    out.push(d.arg() - spread);
                    out.push(d.arg() + spread);
                }
            }
            Curve::Segment { a, b } => {
                for p in [a, b] {
                    if p != c {
                        out.push((p - c).arg());
                    }
                }
            }
        }
    }

    pub fn endpoints(&self) -> Option<[ComplexValue; 2]> {
        match *self {
            Curve::Circle { .. } => None,
            Curve::Segment { a, b } => Some([a, b]),
        }
    }
}

pub(crate) fn push_theta(p: ComplexValue, out: &mut Vec<f64>) {
    if let Ok(t) = theta_of(p) {
        out.push(t.value());
    }
}

/// Appends the roots θ ∈ (0, π) of `a sin θ + b cos θ = c`.
fn solve_sin_cos(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    let r = a.hypot(b);
    if !(r > 0.0) || c.abs() > r {
        return;
    }
    let phi = b.atan2(a);
    let s = (c / r).asin();
    for t in [s - phi, PI - s - phi] {
        let t = t.rem_euclid(2.0 * PI);
        if t > 0.0 && t < PI {
            out.push(t);
        }
    }
}

/// Intersections between edges of different primitives.
pub fn cross_points(edges: &[Edge], out: &mut Vec<ComplexValue>) {
    for (i, e) in edges.iter().enumerate() {
        for f in &edges[i + 1..] {
            if e.primitive != f.primitive {
                e.curve.intersections(&f.curve, out);
            }
        }
    }
}
