//! Two-point Cauchy transforms
//!
//! ```text
//! C_g(z, w) = -(1/π) ∫ g(u) / (conj(u - w)·(u - z)) da(u)
//! ```
//!
//! of densities `0 ≤ g ≤ 1` with compact support, together with the bound
//! `|1 - exp C_g(z, w)| ≤ 1` and its extremal cases.
//!
//! Three independent routes evaluate the transform:
//!
//! * [`quadrature::planar_integrate`] works directly in the plane, cutting
//!   shrinking discs around `z` and `w` and extrapolating the excision radius
//!   to zero;
//! * [`quadrature::cylinder_integrate`] pulls the reduced integral back to the
//!   cylinder `(t, θ)` swept by the circles through ±1, where the kernel and
//!   the area element cancel;
//! * [`operator`] realizes `E = exp C` for the indicator of the unit disc as
//!   `1 - <x_w, x_z>` with the least-norm resolvent of a truncated shift.
//!
//! [`analysis`] builds the headline checks on top of these, and [`selftest`]
//! bundles the invariant suite used by the command-line tool.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod gfunction;
pub mod operator;
pub mod quadrature;
pub mod selftest;

pub use error::{Error, Result};

/// The universal scalar: a point of the plane or a complex integral value.
pub type ComplexValue = num_complex::Complex64;

/// Serializes a complex number as a two-element array `[re, im]`.
pub mod complex_serde {
    use num_complex::Complex64;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(D::Error::custom("complex components must be finite"));
        }
        Ok(Complex64::new(re, im))
    }
}
