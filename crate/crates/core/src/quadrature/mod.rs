//! Numerical engines for `I_g = C_g(1, −1)` and `C_g(z, w)`.
//!
//! * [`cylinder`]: pulls the reduced integral back through
//!   `u(t, θ) = csc θ·e^{it} + i cot θ`, where the area element cancels the
//!   kernel denominator and the integrand becomes `±(−cot θ + i)·g / 2π`.
//! * [`planar`]: integrates the two-point kernel directly in the plane with
//!   polar excisions around `z` and `w`.
//! * [`regions`]: the six-region split of the cylinder, the preimage geometry
//!   of discs `|u| < R`, and checks built on them.

pub mod cylinder;
pub mod planar;
pub mod regions;
pub mod rules;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ComplexValue;

pub use cylinder::{
    cylinder_integrate, cylinder_region_areas, jacobian, lemma1_mass, map_u, parametrized_kernel, CylinderPoint,
    CylinderTag, Lemma1Mass,
};
pub use planar::planar_integrate;
pub use regions::{
    classify_region, preimage_geometry, region_iterated_integral, s1_curve, PreimageGeometry, Region,
};

/// Which engine evaluates `C_g(z, w)` off the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Planar,
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    /// Base panels per unit length for the planar engine's outer integral.
    pub planar_resolution: f64,
    /// Excision radii, relative to `|z − w|` (planar) or to the support reach
    /// (diagonal). Strictly decreasing.
    pub excision_radii: Vec<f64>,
    /// Base cells `(n_t, n_theta)` of the cylinder mesh.
    pub cylinder_grid: (usize, usize),
    /// Exponent of the θ-grading toward 0 and π (1 means uniform).
    pub theta_grading_exponent: f64,
    pub target_tol: f64,
    /// Maximum bisection depth of any base panel.
    pub max_refinements: usize,
    /// Minimum log-growth rate for declaring a diagonal integral divergent.
    pub divergence_threshold: f64,
    pub route: Route,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            planar_resolution: 4.0,
            excision_radii: (0..9).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            cylinder_grid: (64, 64),
            theta_grading_exponent: 2.0,
            target_tol: 1e-7,
            max_refinements: 30,
            divergence_threshold: 0.05,
            route: Route::Planar,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.planar_resolution.is_finite() && self.planar_resolution > 0.0) {
            return bad(format!("planar_resolution {} must be positive", self.planar_resolution));
        }
        if self.excision_radii.len() < 2 {
            return bad("excision_radii needs at least two radii".into());
        }
        if !self.excision_radii.iter().all(|r| r.is_finite() && *r > 0.0) {
            return bad("excision_radii must be positive".into());
        }
        if !self.excision_radii.windows(2).all(|w| w[1] < w[0]) {
            return bad("excision_radii must be strictly decreasing".into());
        }
        if self.excision_radii[0] >= 0.5 {
            return bad("excision_radii[0] must be below 0.5 so the two excised discs stay disjoint".into());
        }
        if self.cylinder_grid.0 == 0 || self.cylinder_grid.1 == 0 {
            return bad("cylinder_grid entries must be positive".into());
        }
        if !(self.theta_grading_exponent.is_finite() && self.theta_grading_exponent >= 1.0) {
            return bad(format!("theta_grading_exponent {} must be >= 1", self.theta_grading_exponent));
        }
        if !(self.target_tol.is_finite() && self.target_tol > 0.0) {
            return bad(format!("target_tol {} must be positive", self.target_tol));
        }
        if !(self.divergence_threshold.is_finite() && self.divergence_threshold > 0.0) {
            return bad("divergence_threshold must be positive".into());
        }
        Ok(())
    }
}

/// A computed integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: ComplexValue,
    pub error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl IntegralResult {
    pub fn zero() -> Self {
        IntegralResult {
            value: ComplexValue::new(0.0, 0.0),
            error_estimate: 0.0,
            converged: true,
            evaluations: 0,
        }
    }
}

impl Serialize for IntegralResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntegralResult", 5)?;
        st.serialize_field("value_re", &self.value.re)?;
        st.serialize_field("value_im", &self.value.im)?;
        st.serialize_field("error", &self.error_estimate)?;
        st.serialize_field("converged", &self.converged)?;
        st.serialize_field("evaluations", &self.evaluations)?;
        st.end()
    }
}
