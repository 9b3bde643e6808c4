//! Densities `0 ≤ g ≤ 1` with compact support.
//!
//! A [`GSpec`] is a small expression tree over indicators of discs and
//! rectangles, raster grids and a few closed operations (scaling, max, min,
//! complement inside a box, convex mixing, affine pullback). Every such `g`
//! is piecewise constant, and the edges of the pieces are circle arcs and
//! line segments. Along a circle or a line the parameters where `g` can jump
//! are therefore computable exactly, which is what the quadrature engines
//! build on: see [`GSpec::pieces_on_circle`] and [`GSpec::pieces_on_line`].

pub mod edges;
pub mod paths;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{circle_for_theta, ThetaAngle};
use crate::ComplexValue;
pub use edges::{Curve, Edge};
pub use paths::{wrap_angle, CirclePath, LinePath};

use edges::cross_points;

/// Raster vertices beyond this count are not reported as corners.
const MAX_RASTER_VERTICES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let b = BoundingBox { x0, x1, y0, y1 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite());
        if finite && self.x0 < self.x1 && self.y0 < self.y1 {
            Ok(())
        } else {
            Err(Error::Domain(format!("degenerate bounding box {self:?}")))
        }
    }

    pub fn around(center: ComplexValue, radius: f64) -> Self {
        BoundingBox {
            x0: center.re - radius,
            x1: center.re + radius,
            y0: center.im - radius,
            y1: center.im + radius,
        }
    }

    pub fn hull(&self, other: &BoundingBox) -> Self {
        BoundingBox {
            x0: self.x0.min(other.x0),
            x1: self.x1.max(other.x1),
            y0: self.y0.min(other.y0),
            y1: self.y1.max(other.y1),
        }
    }

    /// The overlap of two boxes, or `None` when they are disjoint.
    pub fn intersect(&self, other: &BoundingBox) -> Option<Self> {
        let b = BoundingBox {
            x0: self.x0.max(other.x0),
            x1: self.x1.min(other.x1),
            y0: self.y0.max(other.y0),
            y1: self.y1.min(other.y1),
        };
        (b.x0 < b.x1 && b.y0 < b.y1).then_some(b)
    }

    /// Strict interior test.
    pub fn contains(&self, u: ComplexValue) -> bool {
        u.re > self.x0 && u.re < self.x1 && u.im > self.y0 && u.im < self.y1
    }

    pub fn corners(&self) -> [ComplexValue; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn from_points(pts: &[ComplexValue]) -> Self {
        let mut b = BoundingBox {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for p in pts {
            b.x0 = b.x0.min(p.re);
            b.x1 = b.x1.max(p.re);
            b.y0 = b.y0.min(p.im);
            b.y1 = b.y1.max(p.im);
        }
        b
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
}

/// Cell values on a regular grid; cell `(i, j)` covers
/// `[ox + i·h, ox + (i+1)·h) × [oy + j·h, oy + (j+1)·h)` and `values` is
/// row-major with row `j = 0` at the bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Raster {
    #[serde(with = "crate::complex_serde")]
    pub origin: ComplexValue,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Raster {
    pub fn new(origin: ComplexValue, cell_size: f64, width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let r = Raster {
            origin,
            cell_size,
            width,
            height,
            values,
        };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(Error::Domain(format!("raster cell size {} must be positive", self.cell_size)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain("raster must have at least one cell".into()));
        }
        if self.values.len() != self.width * self.height {
            return Err(Error::Domain(format!(
                "raster has {} values, expected {}x{}",
                self.values.len(),
                self.width,
                self.height
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("raster value {v} outside [0, 1]")));
        }
        Ok(())
    }

    fn value_at(&self, u: ComplexValue) -> f64 {
        let fx = (u.re - self.origin.re) / self.cell_size;
        let fy = (u.im - self.origin.im) / self.cell_size;
        if !(fx >= 0.0 && fy >= 0.0) {
            return 0.0;
        }
        let (i, j) = (fx as usize, fy as usize);
        if i >= self.width || j >= self.height {
            return 0.0;
        }
        self.values[j * self.width + i]
    }

    fn grid_x(&self, i: usize) -> f64 {
        self.origin.re + i as f64 * self.cell_size
    }

    fn grid_y(&self, j: usize) -> f64 {
        self.origin.im + j as f64 * self.cell_size
    }

    fn bbox(&self) -> BoundingBox {
        BoundingBox {
            x0: self.origin.re,
            x1: self.grid_x(self.width),
            y0: self.origin.im,
            y1: self.grid_y(self.height),
        }
    }
}

/// A density in G₁, as an expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GSpec {
    /// g ≡ 0.
    Zero,
    /// Indicator of the open disc `|u − center| < radius`.
    Disc {
        #[serde(with = "crate::complex_serde")]
        center: ComplexValue,
        radius: f64,
    },
    /// Indicator of the open rectangle `(x0, x1) × (y0, y1)`.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Indicator of D_θ.
    DiscTheta { theta: ThetaAngle },
    Raster(Raster),
    /// `factor · inner`, with `factor ∈ [0, 1]`.
    Scale { factor: f64, inner: Box<GSpec> },
    /// `max(a, b)`.
    Union { a: Box<GSpec>, b: Box<GSpec> },
    /// `min(a, b)`.
    Intersection { a: Box<GSpec>, b: Box<GSpec> },
    /// `1 − inner` inside the open box, 0 outside.
    Complement { bbox: BoundingBox, inner: Box<GSpec> },
    /// `(1 − λ)·a + λ·b`.
    Mix { lambda: f64, a: Box<GSpec>, b: Box<GSpec> },
    /// `v ↦ inner(½((z − w)v + (z + w)))`.
    AffinePullback {
        #[serde(with = "crate::complex_serde")]
        z: ComplexValue,
        #[serde(with = "crate::complex_serde")]
        w: ComplexValue,
        inner: Box<GSpec>,
    },
}

/// An interval of a path parameter on which a density is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }
}

/// `v ↦ a·v + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    a: ComplexValue,
    b: ComplexValue,
}

impl Affine {
    const IDENTITY: Affine = Affine {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    fn then(self, outer: Affine) -> Affine {
        // outer(self(v))
        Affine {
            a: outer.a * self.a,
            b: outer.a * self.b + outer.b,
        }
    }

    fn invert_point(&self, u: ComplexValue) -> ComplexValue {
        (u - self.b) / self.a
    }
}

/// The affine map `v ↦ ½((z − w)v + (z + w))` sending −1 to `w` and 1 to `z`.
pub fn pair_map(z: ComplexValue, w: ComplexValue) -> (ComplexValue, ComplexValue) {
    ((z - w) * 0.5, (z + w) * 0.5)
}

impl GSpec {
    pub fn disc(center: ComplexValue, radius: f64) -> Result<GSpec> {
        let g = GSpec::Disc { center, radius };
        g.validate()?;
        Ok(g)
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<GSpec> {
        let g = GSpec::Rect { x0, x1, y0, y1 };
        g.validate()?;
        Ok(g)
    }

    pub fn scale(factor: f64, inner: GSpec) -> Result<GSpec> {
        let g = GSpec::Scale {
            factor,
            inner: Box::new(inner),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn union(a: GSpec, b: GSpec) -> GSpec {
        GSpec::Union {
            a: Box::new(a),
            b: Box::new(b),
        }
    }

    pub fn intersection(a: GSpec, b: GSpec) -> GSpec {
        GSpec::Intersection {
            a: Box::new(a),
            b: Box::new(b),
        }
    }

    pub fn complement(bbox: BoundingBox, inner: GSpec) -> GSpec {
        GSpec::Complement {
            bbox,
            inner: Box::new(inner),
        }
    }

    /// Indicator of the open annulus `r_in < |u − center| < r_out`
    /// (up to the measure-zero inner circle).
    pub fn annulus(center: ComplexValue, r_in: f64, r_out: f64) -> Result<GSpec> {
        if !(r_in > 0.0 && r_out > r_in) {
            return Err(Error::Domain(format!("annulus radii {r_in} < {r_out} required")));
        }
        let outer = GSpec::disc(center, r_out)?;
        let hole = GSpec::disc(center, r_in)?;
        Ok(GSpec::intersection(outer, GSpec::complement(BoundingBox::around(center, r_out), hole)))
    }

    /// Image of D_θ under `v ↦ ½((z − w)v + (z + w))`; the extremal density
    /// for the pair `(z, w)`.
    pub fn transformed_disc_theta(theta: ThetaAngle, z: ComplexValue, w: ComplexValue) -> Result<GSpec> {
        if z == w {
            return Err(Error::Diagonal);
        }
        let (a, b) = pair_map(z, w);
        let circ = circle_for_theta(theta);
        GSpec::disc(a * circ.center + b, a.norm() * circ.radius)
    }

    /// Checks the G₁ constraints of every node.
    pub fn validate(&self) -> Result<()> {
        let finite = |z: ComplexValue| z.re.is_finite() && z.im.is_finite();
        match self {
            GSpec::Zero | GSpec::DiscTheta { .. } => Ok(()),
            GSpec::Disc { center, radius } => {
                if finite(*center) && radius.is_finite() && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("disc radius {radius} must be positive and finite")))
                }
            }
            GSpec::Rect { x0, x1, y0, y1 } => BoundingBox::new(*x0, *x1, *y0, *y1).map(|_| ()),
            GSpec::Raster(r) => r.validate(),
            GSpec::Scale { factor, inner } => {
                if !(0.0..=1.0).contains(factor) {
                    return Err(Error::Domain(format!("scale factor {factor} outside [0, 1]")));
                }
                inner.validate()
            }
            GSpec::Union { a, b } | GSpec::Intersection { a, b } => {
                a.validate()?;
                b.validate()
            }
            GSpec::Complement { bbox, inner } => {
                bbox.validate()?;
                inner.validate()
            }
            GSpec::Mix { lambda, a, b } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::Domain(format!("mixing weight {lambda} outside [0, 1]")));
                }
                a.validate()?;
                b.validate()
            }
            GSpec::AffinePullback { z, w, inner } => {
                if !(finite(*z) && finite(*w)) || z == w {
                    return Err(Error::Domain("affine pullback needs finite z != w".into()));
                }
                inner.validate()
            }
        }
    }

    pub fn evaluate(&self, u: ComplexValue) -> f64 {
        match self {
            GSpec::Zero => 0.0,
            GSpec::Disc { center, radius } => indicator((u - center).norm() < *radius),
            GSpec::Rect { x0, x1, y0, y1 } => indicator(u.re > *x0 && u.re < *x1 && u.im > *y0 && u.im < *y1),
            GSpec::DiscTheta { theta } => indicator(circle_for_theta(*theta).contains(u)),
            GSpec::Raster(r) => r.value_at(u),
            GSpec::Scale { factor, inner } => factor * inner.evaluate(u),
            GSpec::Union { a, b } => a.evaluate(u).max(b.evaluate(u)),
            GSpec::Intersection { a, b } => a.evaluate(u).min(b.evaluate(u)),
            GSpec::Complement { bbox, inner } => {
                if bbox.contains(u) {
                    1.0 - inner.evaluate(u)
                } else {
                    0.0
                }
            }
            GSpec::Mix { lambda, a, b } => (1.0 - lambda) * a.evaluate(u) + lambda * b.evaluate(u),
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                inner.evaluate(a * u + b)
            }
        }
    }

    /// A finite box containing the essential support (possibly larger).
    pub fn support_box(&self) -> BoundingBox {
        match self {
            GSpec::Zero => BoundingBox::around(Complex64::new(0.0, 0.0), 1.0),
            GSpec::Disc { center, radius } => BoundingBox::around(*center, *radius),
            GSpec::Rect { x0, x1, y0, y1 } => BoundingBox {
                x0: *x0,
                x1: *x1,
                y0: *y0,
                y1: *y1,
            },
            GSpec::DiscTheta { theta } => {
                let c = circle_for_theta(*theta);
                BoundingBox::around(c.center, c.radius)
            }
            GSpec::Raster(r) => r.bbox(),
            GSpec::Scale { inner, .. } => inner.support_box(),
            GSpec::Union { a, b } | GSpec::Mix { a, b, .. } => a.support_box().hull(&b.support_box()),
            GSpec::Intersection { a, b } => {
                let (ba, bb) = (a.support_box(), b.support_box());
                ba.intersect(&bb).unwrap_or(ba)
            }
            GSpec::Complement { bbox, .. } => *bbox,
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                let map = Affine { a, b };
                let pts = inner.support_box().corners().map(|c| map.invert_point(c));
                BoundingBox::from_points(&pts)
            }
        }
    }

    /// Parameters in (−π, π] where `path` may cross an edge of `g`.
    pub fn circle_crossings(&self, path: &CirclePath, out: &mut Vec<f64>) {
        match self {
            GSpec::Zero => {}
            GSpec::Disc { center, radius } => path.crossings_with_circle(*center, *radius, out),
            GSpec::Rect { x0, x1, y0, y1 } => {
                path.crossings_with_vertical(*x0, out);
                path.crossings_with_vertical(*x1, out);
                path.crossings_with_horizontal(*y0, out);
                path.crossings_with_horizontal(*y1, out);
            }
            GSpec::DiscTheta { theta } => {
                let c = circle_for_theta(*theta);
                path.crossings_with_circle(c.center, c.radius, out);
            }
            GSpec::Raster(r) => {
                let (c, rad) = (path.center(), path.radius());
                for i in 0..=r.width {
                    let x = r.grid_x(i);
                    if (x - c.re).abs() <= rad {
                        path.crossings_with_vertical(x, out);
                    }
                }
                for j in 0..=r.height {
                    let y = r.grid_y(j);
                    if (y - c.im).abs() <= rad {
                        path.crossings_with_horizontal(y, out);
                    }
                }
            }
            GSpec::Scale { inner, .. } => inner.circle_crossings(path, out),
            GSpec::Union { a, b } | GSpec::Intersection { a, b } | GSpec::Mix { a, b, .. } => {
                a.circle_crossings(path, out);
                b.circle_crossings(path, out);
            }
            GSpec::Complement { bbox, inner } => {
                path.crossings_with_vertical(bbox.x0, out);
                path.crossings_with_vertical(bbox.x1, out);
                path.crossings_with_horizontal(bbox.y0, out);
                path.crossings_with_horizontal(bbox.y1, out);
                inner.circle_crossings(path, out);
            }
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                inner.circle_crossings(&path.mapped(a, b), out);
            }
        }
    }

    /// Parameters where `path` may cross an edge of `g`.
    pub fn line_crossings(&self, path: &LinePath, out: &mut Vec<f64>) {
        match self {
            GSpec::Zero => {}
            GSpec::Disc { center, radius } => path.crossings_with_circle(*center, *radius, out),
            GSpec::Rect { x0, x1, y0, y1 } => {
                path.crossings_with_vertical(*x0, out);
                path.crossings_with_vertical(*x1, out);
                path.crossings_with_horizontal(*y0, out);
                path.crossings_with_horizontal(*y1, out);
            }
            GSpec::DiscTheta { theta } => {
                let c = circle_for_theta(*theta);
                path.crossings_with_circle(c.center, c.radius, out);
            }
            GSpec::Raster(r) => {
                for i in 0..=r.width {
                    path.crossings_with_vertical(r.grid_x(i), out);
                }
                for j in 0..=r.height {
                    path.crossings_with_horizontal(r.grid_y(j), out);
                }
            }
            GSpec::Scale { inner, .. } => inner.line_crossings(path, out),
            GSpec::Union { a, b } | GSpec::Intersection { a, b } | GSpec::Mix { a, b, .. } => {
                a.line_crossings(path, out);
                b.line_crossings(path, out);
            }
            GSpec::Complement { bbox, inner } => {
                path.crossings_with_vertical(bbox.x0, out);
                path.crossings_with_vertical(bbox.x1, out);
                path.crossings_with_horizontal(bbox.y0, out);
                path.crossings_with_horizontal(bbox.y1, out);
                inner.line_crossings(path, out);
            }
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                inner.line_crossings(&path.mapped(a, b), out);
            }
        }
    }

    /// Heights at which horizontal sections of `g` change combinatorially
    /// (tops and bottoms of circles, segment endpoints, raster rows, crossings).
    pub fn horizontal_levels(&self, out: &mut Vec<f64>) {
        self.levels_under(Affine::IDENTITY, out);
        out.extend(self.corner_points().iter().map(|p| p.im));
    }

    /// `map` sends the integration plane to this node's plane.
    fn levels_under(&self, map: Affine, out: &mut Vec<f64>) {
        let circle = |c: ComplexValue, r: f64, out: &mut Vec<f64>| {
            let cc = map.invert_point(c);
            let rr = r / map.a.norm();
            out.push(cc.im - rr);
            out.push(cc.im + rr);
        };
        let corners = |b: &BoundingBox, out: &mut Vec<f64>| {
            out.extend(b.corners().iter().map(|c| map.invert_point(*c).im));
        };
        match self {
            GSpec::Zero => {}
            GSpec::Disc { center, radius } => circle(*center, *radius, out),
            GSpec::Rect { x0, x1, y0, y1 } => corners(
                &BoundingBox {
                    x0: *x0,
                    x1: *x1,
                    y0: *y0,
                    y1: *y1,
                },
                out,
            ),
            GSpec::DiscTheta { theta } => {
                let c = circle_for_theta(*theta);
                circle(c.center, c.radius, out)
            }
            GSpec::Raster(r) => {
                if map == Affine::IDENTITY {
                    out.extend((0..=r.height).map(|j| r.grid_y(j)));
                } else {
                    for j in 0..=r.height {
                        for i in 0..=r.width {
                            out.push(map.invert_point(Complex64::new(r.grid_x(i), r.grid_y(j))).im);
                        }
                    }
                }
            }
            GSpec::Scale { inner, .. } => inner.levels_under(map, out),
            GSpec::Union { a, b } | GSpec::Intersection { a, b } | GSpec::Mix { a, b, .. } => {
                a.levels_under(map, out);
                b.levels_under(map, out);
            }
            GSpec::Complement { bbox, inner } => {
                corners(bbox, out);
                inner.levels_under(map, out);
            }
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                inner.levels_under(map.then(Affine { a, b }), out);
            }
        }
    }

    /// The circles and segments across which `g` can jump, in the
    /// coordinates of the integration plane.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        let mut next = 0;
        self.edges_under(Affine::IDENTITY, &mut next, &mut out);
        out
    }

    fn edges_under(&self, map: Affine, next: &mut usize, out: &mut Vec<Edge>) {
        let mut push = |curve: Curve, primitive: usize| out.push(Edge { curve, primitive });
        let mut circle = |c: ComplexValue, r: f64, next: &mut usize| {
            push(
                Curve::Circle {
                    center: map.invert_point(c),
                    radius: r / map.a.norm(),
                },
                *next,
            );
            *next += 1;
        };
        let rect_edges = |b: &BoundingBox, next: &mut usize, out: &mut Vec<Edge>| {
            let k = b.corners();
            for i in 0..4 {
                out.push(Edge {
                    curve: Curve::Segment {
                        a: map.invert_point(k[i]),
                        b: map.invert_point(k[(i + 1) % 4]),
                    },
                    primitive: *next,
                });
            }
            *next += 1;
        };
        match self {
            GSpec::Zero => {}
            GSpec::Disc { center, radius } => circle(*center, *radius, next),
            GSpec::Rect { x0, x1, y0, y1 } => rect_edges(
                &BoundingBox {
                    x0: *x0,
                    x1: *x1,
                    y0: *y0,
                    y1: *y1,
                },
                next,
                out,
            ),
            GSpec::DiscTheta { theta } => {
                let c = circle_for_theta(*theta);
                circle(c.center, c.radius, next)
            }
            GSpec::Raster(r) => {
                let (x0, x1) = (r.grid_x(0), r.grid_x(r.width));
                let (y0, y1) = (r.grid_y(0), r.grid_y(r.height));
                for i in 0..=r.width {
                    let x = r.grid_x(i);
                    out.push(Edge {
                        curve: Curve::Segment {
                            a: map.invert_point(Complex64::new(x, y0)),
                            b: map.invert_point(Complex64::new(x, y1)),
                        },
                        primitive: *next,
                    });
                }
                for j in 0..=r.height {
                    let y = r.grid_y(j);
                    out.push(Edge {
                        curve: Curve::Segment {
                            a: map.invert_point(Complex64::new(x0, y)),
                            b: map.invert_point(Complex64::new(x1, y)),
                        },
                        primitive: *next,
                    });
                }
                *next += 1;
            }
            GSpec::Scale { inner, .. } => inner.edges_under(map, next, out),
            GSpec::Union { a, b } | GSpec::Intersection { a, b } | GSpec::Mix { a, b, .. } => {
                a.edges_under(map, next, out);
                b.edges_under(map, next, out);
            }
            GSpec::Complement { bbox, inner } => {
                rect_edges(bbox, next, out);
                inner.edges_under(map, next, out);
            }
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                inner.edges_under(map.then(Affine { a, b }), next, out);
            }
        }
    }

    /// Interior grid vertices of every raster node, in integration-plane
    /// coordinates (at most `limit` in total).
    fn raster_vertices(&self, map: Affine, limit: usize, out: &mut Vec<ComplexValue>) {
        match self {
            GSpec::Raster(r) => {
                if (r.width.saturating_sub(1)) * (r.height.saturating_sub(1)) + out.len() > limit {
                    return;
                }
                for j in 1..r.height {
                    for i in 1..r.width {
                        out.push(map.invert_point(Complex64::new(r.grid_x(i), r.grid_y(j))));
                    }
                }
            }
            GSpec::Scale { inner, .. } | GSpec::Complement { inner, .. } => inner.raster_vertices(map, limit, out),
            GSpec::Union { a, b } | GSpec::Intersection { a, b } | GSpec::Mix { a, b, .. } => {
                a.raster_vertices(map, limit, out);
                b.raster_vertices(map, limit, out);
            }
            GSpec::AffinePullback { z, w, inner } => {
                let (a, b) = pair_map(*z, *w);
                inner.raster_vertices(map.then(Affine { a, b }), limit, out);
            }
            _ => {}
        }
    }

    /// Points where edges of `g` meet: segment endpoints, crossings between
    /// different primitives and interior raster vertices.
    pub fn corner_points(&self) -> Vec<ComplexValue> {
        let edges = self.edges();
        let mut pts = Vec::new();
        for e in &edges {
            if let Some(ends) = e.curve.endpoints() {
                pts.extend_from_slice(&ends);
            }
        }
        cross_points(&edges, &mut pts);
        self.raster_vertices(Affine::IDENTITY, MAX_RASTER_VERTICES, &mut pts);
        pts
    }

    /// Angles θ ∈ (0, π) at which Γ_θ passes through a corner of `g` or
    /// touches an edge tangentially. Between consecutive such angles the arc
    /// masses of `g` on Γ_θ are smooth in θ.
    pub fn critical_thetas(&self, out: &mut Vec<f64>) {
        for e in self.edges() {
            e.curve.critical_thetas(out);
        }
        for p in self.corner_points() {
            edges::push_theta(p, out);
        }
    }

    /// Distance from `p` to the nearest edge (infinite for g ≡ 0).
    pub fn edge_distance(&self, p: ComplexValue) -> f64 {
        self.edges()
            .iter()
            .map(|e| e.curve.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Splits `[lo, hi]` (with `hi − lo ≤ 2π`) of the circle parameter into
    /// pieces on which `g` is constant, appending the nonzero ones to `out`.
    /// Crossings are taken modulo 2π; `extra` adds caller breakpoints.
    pub fn pieces_on_circle(&self, path: &CirclePath, lo: f64, hi: f64, extra: &[f64], out: &mut Vec<Piece>) {
        let mut cuts = Vec::with_capacity(16);
        self.circle_crossings(path, &mut cuts);
        let period = 2.0 * PI;
        for c in cuts.iter_mut() {
            *c = lo + (*c - lo).rem_euclid(period);
        }
        cuts.extend_from_slice(extra);
        self.collect_pieces(cuts, lo, hi, |t| path.point(t), out);
    }

    /// Splits `[lo, hi]` of the line parameter into constant pieces.
    pub fn pieces_on_line(&self, path: &LinePath, lo: f64, hi: f64, extra: &[f64], out: &mut Vec<Piece>) {
        let mut cuts = Vec::with_capacity(16);
        self.line_crossings(path, &mut cuts);
        cuts.extend_from_slice(extra);
        self.collect_pieces(cuts, lo, hi, |s| path.point(s), out);
    }

    fn collect_pieces(
        &self,
        mut cuts: Vec<f64>,
        lo: f64,
        hi: f64,
        point: impl Fn(f64) -> ComplexValue,
        out: &mut Vec<Piece>,
    ) {
        cuts.retain(|c| *c > lo && *c < hi);
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let value = self.evaluate(point(0.5 * (a + b)));
            if value != 0.0 {
                out.push(Piece { a, b, value });
            }
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// g_θ, the indicator of D_θ.
pub fn g_theta(theta: ThetaAngle) -> GSpec {
    GSpec::DiscTheta { theta }
}

/// `(1 − λ)·g + λ·g_{π/2}`.
pub fn convex_path(g: &GSpec, lambda: f64) -> Result<GSpec> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} outside [0, 1]")));
    }
    Ok(GSpec::Mix {
        lambda,
        a: Box::new(g.clone()),
        b: Box::new(g_theta(ThetaAngle::new(FRAC_PI_2)?)),
    })
}

/// `v ↦ g(½((z − w)v + (z + w)))`.
pub fn affine_pullback(g: &GSpec, z: ComplexValue, w: ComplexValue) -> Result<GSpec> {
    if z == w {
        return Err(Error::Diagonal);
    }
    let out = GSpec::AffinePullback {
        z,
        w,
        inner: Box::new(g.clone()),
    };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::theta_of;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disc() -> GSpec {
        g_theta(ThetaAngle::new(FRAC_PI_2).unwrap())
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(unit_disc().evaluate(c(0.0, 0.0)), 1.0);
        assert_eq!(unit_disc().evaluate(c(2.0, 0.0)), 0.0);
        // boundary is excluded
        assert_eq!(unit_disc().evaluate(c(0.0, 1.0)), 0.0);
        let s = GSpec::scale(0.5, GSpec::disc(c(0.0, 0.0), 1.0).unwrap()).unwrap();
        assert_eq!(s.evaluate(c(0.3, 0.0)), 0.5);
    }

    #[test]
    fn support_box_examples() {
        let b = GSpec::disc(c(0.0, 0.0), 1.0).unwrap().support_box();
        assert_eq!(b, BoundingBox::new(-1.0, 1.0, -1.0, 1.0).unwrap());

        let r2 = 2f64.sqrt();
        let b = g_theta(ThetaAngle::new(FRAC_PI_4).unwrap()).support_box();
        assert!((b.x0 + r2).abs() < 1e-15 && (b.x1 - r2).abs() < 1e-15);
        assert!((b.y0 - (1.0 - r2)).abs() < 1e-15 && (b.y1 - (1.0 + r2)).abs() < 1e-15);

        let u = GSpec::union(GSpec::disc(c(0.0, 0.0), 1.0).unwrap(), GSpec::disc(c(3.0, 0.0), 1.0).unwrap());
        assert_eq!(u.support_box(), BoundingBox::new(-1.0, 4.0, -1.0, 1.0).unwrap());
    }

    #[test]
    fn g_theta_examples() {
        let g = g_theta(ThetaAngle::new(FRAC_PI_4).unwrap());
        assert_eq!(g.evaluate(c(0.0, 1.0)), 1.0);
        assert_eq!(g.evaluate(c(3.0, 0.0)), 0.0);
        assert_eq!(unit_disc().evaluate(c(0.5, 0.5)), 1.0);
    }

    #[test]
    fn convex_path_examples() {
        let g = GSpec::rect(0.5, 2.0, -0.3, 0.8).unwrap();
        let pts = [c(0.0, 0.0), c(0.9, 0.1), c(1.5, 0.5), c(-0.5, 0.5), c(3.0, 3.0)];
        let g0 = convex_path(&g, 0.0).unwrap();
        let g1 = convex_path(&g, 1.0).unwrap();
        for p in pts {
            assert_eq!(g0.evaluate(p), g.evaluate(p));
            assert_eq!(g1.evaluate(p), unit_disc().evaluate(p));
        }
        let half = convex_path(&GSpec::Zero, 0.5).unwrap();
        assert_eq!(half.evaluate(c(0.2, 0.2)), 0.5);
        assert_eq!(half.evaluate(c(1.2, 0.2)), 0.0);
        assert!(convex_path(&g, 1.5).is_err());
        assert!(convex_path(&g, -0.1).is_err());
    }

    #[test]
    fn pullback_examples() {
        let g = GSpec::rect(-0.4, 0.7, -0.2, 0.9).unwrap();
        let id = affine_pullback(&g, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        for p in [c(0.0, 0.0), c(0.6, 0.8), c(-0.5, 0.0)] {
            assert_eq!(id.evaluate(p), g.evaluate(p));
        }
        assert!(affine_pullback(&g, c(1.0, 1.0), c(1.0, 1.0)).is_err());

        // disc centered at (z+w)/2 pulls back to a disc of radius 2r/|z-w| at 0
        let (z, w) = (c(0.3, 1.2), c(-0.7, 0.1));
        let r = 0.8;
        let disc = GSpec::disc((z + w) * 0.5, r).unwrap();
        let pb = affine_pullback(&disc, z, w).unwrap();
        let rr = 2.0 * r / (z - w).norm();
        for k in 0..64 {
            let v = Complex64::from_polar(rr * (0.5 + k as f64 / 64.0), 0.37 * k as f64);
            let expect = indicator(v.norm() < rr);
            if (v.norm() - rr).abs() > 1e-9 {
                assert_eq!(pb.evaluate(v), expect, "v = {v}");
            }
        }
        assert_eq!(pb.evaluate(c(-1.0, 0.0)), disc.evaluate(w));
    }

    #[test]
    fn annulus_and_complement() {
        let a = GSpec::annulus(c(0.0, 0.0), 1.0, 2.0).unwrap();
        assert_eq!(a.evaluate(c(0.5, 0.0)), 0.0);
        assert_eq!(a.evaluate(c(1.5, 0.0)), 1.0);
        assert_eq!(a.evaluate(c(1.9, 1.9)), 0.0);
        assert_eq!(a.evaluate(c(0.0, -1.2)), 1.0);
    }

    #[test]
    fn transformed_disc_contains_z_and_w_on_boundary() {
        let (z, w) = (c(0.4, -0.3), c(-1.1, 0.9));
        let th = ThetaAngle::new(1.1).unwrap();
        let GSpec::Disc { center, radius } = GSpec::transformed_disc_theta(th, z, w).unwrap() else {
            panic!("expected a disc");
        };
        assert!(((z - center).norm() - radius).abs() < 1e-12);
        assert!(((w - center).norm() - radius).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(GSpec::disc(c(0.0, 0.0), -1.0).is_err());
        assert!(GSpec::scale(1.5, GSpec::Zero).is_err());
        assert!(GSpec::rect(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Raster::new(c(0.0, 0.0), 1.0, 2, 2, vec![0.0, 0.5, 1.0]).is_err());
        assert!(Raster::new(c(0.0, 0.0), 1.0, 2, 1, vec![0.0, 1.2]).is_err());
    }

    #[test]
    fn raster_cell_center_convention() {
        let r = Raster::new(c(-1.0, -1.0), 0.5, 4, 2, (0..8).map(|k| k as f64 / 8.0).collect()).unwrap();
        let g = GSpec::Raster(r);
        assert_eq!(g.evaluate(c(-0.9, -0.9)), 0.0);
        assert_eq!(g.evaluate(c(-0.4, -0.9)), 1.0 / 8.0);
        assert_eq!(g.evaluate(c(0.9, -0.2)), 7.0 / 8.0);
        assert_eq!(g.evaluate(c(1.1, -0.2)), 0.0);
        assert_eq!(g.evaluate(c(0.0, 0.1)), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let g = GSpec::Mix {
            lambda: 0.25,
            a: Box::new(GSpec::annulus(c(0.1, 0.0), 0.5, 1.0).unwrap()),
            b: Box::new(affine_pullback(&unit_disc(), c(2.0, 1.0), c(0.0, -1.0)).unwrap()),
        };
        let s = serde_json::to_string(&g).unwrap();
        let back: GSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"type": "disc", "center": [0, 0], "radius": 1, "colour": "red"}"#;
        assert!(serde_json::from_str::<GSpec>(bad).is_err());
        let bad_theta = r#"{"type": "disc_theta", "theta": 4.0}"#;
        assert!(serde_json::from_str::<GSpec>(bad_theta).is_err());
    }

    /// Brute-force length of {t : g(path(t)) > 0} weighted by g, by sampling.
    fn sampled_circle_mass(g: &GSpec, path: &CirclePath, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|k| g.evaluate(path.point(-PI + (k as f64 + 0.5) * h)) * h).sum()
    }

    fn sample_spec() -> GSpec {
        let r = Raster::new(c(-0.6, -0.8), 0.3, 5, 4, (0..20).map(|k| ((k * 7) % 11) as f64 / 10.0).collect()).unwrap();
        GSpec::union(
            GSpec::Raster(r),
            GSpec::scale(0.6, GSpec::annulus(c(0.9, 0.3), 0.3, 0.9).unwrap()).unwrap(),
        )
    }

    #[test]
    fn circle_pieces_match_sampling() {
        let g = sample_spec();
        for (ctr, rad) in [(c(0.2, 0.1), 0.7), (c(-0.3, 0.4), 1.3), (c(1.0, -0.2), 0.4)] {
            let path = CirclePath::new(ctr, rad);
            let mut pieces = Vec::new();
            g.pieces_on_circle(&path, -PI, PI, &[], &mut pieces);
            let exact: f64 = pieces.iter().map(|p| p.len() * p.value).sum();
            let sampled = sampled_circle_mass(&g, &path, 400_000);
            assert!((exact - sampled).abs() < 1e-3, "{exact} vs {sampled}");
        }
    }

    #[test]
    fn line_pieces_match_sampling() {
        let g = affine_pullback(&sample_spec(), c(0.5, 0.5), c(-0.3, -0.2)).unwrap();
        let path = LinePath::new(c(-4.0, 0.1), c(1.0, 0.15));
        let mut pieces = Vec::new();
        g.pieces_on_line(&path, 0.0, 8.0, &[], &mut pieces);
        let exact: f64 = pieces.iter().map(|p| p.len() * p.value).sum();
        let n = 400_000;
        let h = 8.0 / n as f64;
        let sampled: f64 = (0..n).map(|k| g.evaluate(path.point((k as f64 + 0.5) * h)) * h).sum();
        assert!((exact - sampled).abs() < 1e-3, "{exact} vs {sampled}");
    }

    #[test]
    fn horizontal_levels_cover_disc_extremes() {
        let g = affine_pullback(&GSpec::disc(c(0.5, 0.5), 0.25).unwrap(), c(1.0, 1.0), c(-1.0, 0.0)).unwrap();
        let mut lv = Vec::new();
        g.horizontal_levels(&mut lv);
        // the pulled-back disc: center (0.5+0.5i - b)/a, radius 0.25/|a|
        let (a, b) = pair_map(c(1.0, 1.0), c(-1.0, 0.0));
        let cc = (c(0.5, 0.5) - b) / a;
        let rr = 0.25 / a.norm();
        assert!(lv.iter().any(|y| (y - (cc.im + rr)).abs() < 1e-12));
        assert!(lv.iter().any(|y| (y - (cc.im - rr)).abs() < 1e-12));
    }

    fn arb_point() -> impl Strategy<Value = Complex64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| c(x, y))
    }

    fn arb_spec() -> impl Strategy<Value = GSpec> {
        let leaf = prop_oneof![
            (arb_point(), 0.1..2.0f64).prop_map(|(p, r)| GSpec::Disc { center: p, radius: r }),
            (-2.0..0.0f64, 0.1..2.0f64, -2.0..0.0f64, 0.1..2.0f64)
                .prop_map(|(x0, dx, y0, dy)| GSpec::Rect { x0, x1: x0 + dx, y0, y1: y0 + dy }),
            (0.05..3.09f64).prop_map(|t| GSpec::DiscTheta { theta: ThetaAngle::new(t).unwrap() }),
            (arb_point(), prop::collection::vec(0.0..=1.0f64, 6))
                .prop_map(|(o, v)| GSpec::Raster(Raster::new(o, 0.4, 3, 2, v).unwrap())),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (0.0..=1.0f64, inner.clone()).prop_map(|(f, g)| GSpec::Scale { factor: f, inner: Box::new(g) }),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| GSpec::union(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| GSpec::intersection(a, b)),
                inner.clone().prop_map(|g| GSpec::complement(BoundingBox::new(-2.0, 2.0, -2.0, 2.0).unwrap(), g)),
                (0.0..=1.0f64, inner.clone(), inner.clone())
                    .prop_map(|(l, a, b)| GSpec::Mix { lambda: l, a: Box::new(a), b: Box::new(b) }),
                (arb_point(), arb_point(), inner)
                    .prop_filter("z != w", |(z, w, _)| (z - w).norm() > 1e-3)
                    .prop_map(|(z, w, g)| GSpec::AffinePullback { z, w, inner: Box::new(g) }),
            ]
        })
    }

    proptest! {
        #[test]
        fn evaluation_stays_in_unit_interval(g in arb_spec(), u in arb_point()) {
            let v = g.evaluate(u);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn support_box_contains_support(g in arb_spec(), u in arb_point()) {
            let b = g.support_box();
            if g.evaluate(u) > 0.0 {
                prop_assert!(u.re >= b.x0 - 1e-9 && u.re <= b.x1 + 1e-9 && u.im >= b.y0 - 1e-9 && u.im <= b.y1 + 1e-9);
            }
        }

        #[test]
        fn pullback_is_precomposition(g in arb_spec(), z in arb_point(), w in arb_point(), v in arb_point()) {
            prop_assume!((z - w).norm() > 1e-3);
            let pb = affine_pullback(&g, z, w).unwrap();
            let (a, b) = pair_map(z, w);
            prop_assert_eq!(pb.evaluate(v), g.evaluate(a * v + b));
        }

        #[test]
        fn disc_theta_cylinder_characterization(phi in 0.05..3.09f64, u in arb_point()) {
            prop_assume!(u.im.abs() > 1e-6);
            let circ = circle_for_theta(ThetaAngle::new(phi).unwrap());
            prop_assume!(((u - circ.center).norm() - circ.radius).abs() > 1e-9);
            let th = theta_of(u).unwrap().value();
            let predicted = (u.im > 0.0 && th > phi) || (u.im < 0.0 && th < phi);
            let inside = (u - circ.center).norm() < circ.radius;
            prop_assert_eq!(inside, predicted);
            prop_assert_eq!(g_theta(ThetaAngle::new(phi).unwrap()).evaluate(u), indicator(inside));
        }

        #[test]
        fn pieces_are_constant(g in arb_spec(), cx in -1.0..1.0f64, cy in -1.0..1.0f64, r in 0.2..2.5f64) {
            let path = CirclePath::new(c(cx, cy), r);
            let mut pieces = Vec::new();
            g.pieces_on_circle(&path, -PI, PI, &[], &mut pieces);
            for p in pieces {
                // away from the ends the value must not change
                if p.len() > 1e-6 {
                    for f in [0.1, 0.3, 0.7, 0.9] {
                        let t = p.a + f * p.len();
                        prop_assert!((g.evaluate(path.point(t)) - p.value).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
