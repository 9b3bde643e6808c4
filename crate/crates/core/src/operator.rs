//! The unilateral shift truncated to `N` dimensions, its global-local
//! resolvent, and `E(z, w) = 1 − ⟨x_w, x_z⟩`.
//!
//! The square truncation of `(T − λ)*` is invertible for λ ≠ 0, and its only
//! solution `−e₀/conj(λ)` is an artifact of cutting the last basis vector.
//! The resolvent is therefore taken from the `(N − 1) × N` section
//! `x_{n+1} − conj(λ)·x_n = δ_{n0}`, `n = 0..N−2`, whose kernel is spanned by
//! `(conj λ)^n` exactly as for the infinite shift.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ComplexValue;

pub const DEFAULT_DIMENSION: usize = 400;

/// Relative residual above which a solve is reported as failed.
const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncatedShift {
    n: usize,
}

pub fn build_shift(n: usize) -> Result<TruncatedShift> {
    if n < 2 {
        return Err(Error::Domain(format!("shift dimension {n} must be at least 2")));
    }
    Ok(TruncatedShift { n })
}

impl TruncatedShift {
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `e_k ↦ e_{k+1}`, `e_{N−1} ↦ 0`.
    pub fn apply(&self, x: &[ComplexValue]) -> Vec<ComplexValue> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        y[1..].copy_from_slice(&x[..self.n - 1]);
        y
    }

    /// `T*`: `(T* x)_n = x_{n+1}`.
    pub fn apply_adjoint(&self, x: &[ComplexValue]) -> Vec<ComplexValue> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        y[..self.n - 1].copy_from_slice(&x[1..self.n]);
        y
    }

    pub fn phi(&self) -> Vec<ComplexValue> {
        let mut e = vec![Complex64::new(0.0, 0.0); self.n];
        e[0] = Complex64::new(1.0, 0.0);
        e
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `T*T − TT*`.
    pub fn self_commutator(&self) -> DMatrix<Complex64> {
        let t = self.to_matrix();
        let ta = t.adjoint();
        &ta * &t - &t * &ta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventVector {
    #[serde(with = "crate::complex_serde")]
    pub lambda: ComplexValue,
    #[serde(skip)]
    pub coords: Vec<ComplexValue>,
    pub norm: f64,
    /// `‖(T − λ)* x − φ‖` over the rows of the section.
    pub residual: f64,
    /// `|⟨x, k⟩|` for the unit kernel vector `k`.
    pub kernel_overlap: f64,
}

fn inner(a: &[ComplexValue], b: &[ComplexValue]) -> ComplexValue {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[ComplexValue]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Minimum-norm solution of `(T − λ)* x = φ` on the section.
pub fn global_local_resolvent(t: &TruncatedShift, lambda: ComplexValue) -> Result<ResolventVector> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Domain("lambda must be finite".into()));
    }
    let n = t.n;
    let cl = lambda.conj();
    let zero = Complex64::new(0.0, 0.0);
    let inside = lambda.norm() <= 1.0;

    // a particular solution and the kernel direction, both without overflow
    let mut x = vec![zero; n];
    let mut k = vec![zero; n];
    if inside {
        x[1] = Complex64::new(1.0, 0.0);
        for m in 2..n {
            x[m] = x[m - 1] * cl;
        }
        k[0] = Complex64::new(1.0, 0.0);
        for m in 1..n {
            k[m] = k[m - 1] * cl;
        }
    } else {
        x[0] = -cl.inv();
        let r = cl.inv();
        k[n - 1] = Complex64::new(1.0, 0.0);
        for m in (0..n - 1).rev() {
            k[m] = k[m + 1] * r;
        }
    }
    let kn = norm(&k);
    for v in k.iter_mut() {
        *v /= kn;
    }
    let proj = inner(&x, &k);
    for (xi, ki) in x.iter_mut().zip(&k) {
        *xi -= proj * ki;
    }

    let mut residual = 0.0;
    for m in 0..n - 1 {
        let row = x[m + 1] - cl * x[m] - if m == 0 { Complex64::new(1.0, 0.0) } else { zero };
        residual += row.norm_sqr();
    }
    let residual = residual.sqrt();
    let xn = norm(&x);
    if !(residual <= SOLVER_TOLERANCE * (1.0 + xn * (1.0 + lambda.norm()))) {
        return Err(Error::Solver { residual });
    }
    Ok(ResolventVector {
        lambda,
        kernel_overlap: inner(&x, &k).norm(),
        norm: xn,
        residual,
        coords: x,
    })
}

/// `1 − ⟨x_w, x_z⟩` with the inner product conjugate-linear in the second
/// slot.
pub fn e_operator(t: &TruncatedShift, z: ComplexValue, w: ComplexValue) -> Result<ComplexValue> {
    let xz = global_local_resolvent(t, z)?;
    let xw = global_local_resolvent(t, w)?;
    Ok(Complex64::new(1.0, 0.0) - inner(&xw.coords, &xz.coords))
}

/// The infinite-dimensional value
/// `1 − w·conj(z) − (1 − |w|²)(1 − |z|²)/(1 − conj(w)·z)` for `|z|, |w| < 1`.
pub fn e_shift_closed_form(z: ComplexValue, w: ComplexValue) -> ComplexValue {
    let one = Complex64::new(1.0, 0.0);
    one - w * z.conj() - (1.0 - w.norm_sqr()) * (1.0 - z.norm_sqr()) / (one - w.conj() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shift_examples() {
        assert!(build_shift(1).is_err());
        let t2 = build_shift(2).unwrap().to_matrix();
        assert_eq!(t2[(1, 0)], c(1.0, 0.0));
        assert_eq!(t2[(0, 1)], c(0.0, 0.0));
        let t3 = build_shift(3).unwrap();
        let e1 = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(t3.apply(&e1), vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn commutator_is_diag_one_minus_one() {
        for n in [2, 5, 17] {
            let m = build_shift(n).unwrap().self_commutator();
            for i in 0..n {
                for j in 0..n {
                    let expect = match (i == j, i) {
                        (true, 0) => 1.0,
                        (true, k) if k == n - 1 => -1.0,
                        _ => 0.0,
                    };
                    assert_eq!(m[(i, j)], c(expect, 0.0));
                }
            }
        }
    }

    #[test]
    fn resolvent_examples() {
        let t = build_shift(200).unwrap();
        let x = global_local_resolvent(&t, c(0.0, 0.0)).unwrap();
        assert_eq!(x.coords[1], c(1.0, 0.0));
        assert!(x.coords.iter().enumerate().all(|(k, v)| k == 1 || v.norm() == 0.0));
        let x = global_local_resolvent(&t, c(0.5, 0.0)).unwrap();
        for (k, expect) in [-0.5, 0.75, 0.375, 0.1875].iter().enumerate() {
            assert!((x.coords[k] - c(*expect, 0.0)).norm() < 1e-12);
        }
        assert!((x.norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_pseudoinverse() {
        let n = 24;
        let t = build_shift(n).unwrap();
        for lam in [c(0.3, -0.4), c(0.95, 0.1), c(1.3, 0.7), c(0.0, 0.0)] {
            // (T - λ)* restricted to its first N - 1 rows
            let a = (t.to_matrix() - DMatrix::identity(n, n) * lam).adjoint();
            let sec = a.rows(0, n - 1).into_owned();
            let mut rhs = DVector::from_element(n - 1, c(0.0, 0.0));
            rhs[0] = c(1.0, 0.0);
            let svd = sec.svd(true, true);
            let oracle = svd.solve(&rhs, 1e-12).unwrap();
            let x = global_local_resolvent(&t, lam).unwrap();
            for k in 0..n {
                assert!((x.coords[k] - oracle[k]).norm() < 1e-9, "lambda {lam} k {k}");
            }
            assert!(x.kernel_overlap < 1e-12);
        }
    }

    #[test]
    fn e_operator_examples() {
        let t = build_shift(400).unwrap();
        assert!(e_operator(&t, c(0.0, 0.0), c(0.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((e_operator(&t, c(0.5, 0.0), c(-0.5, 0.0)).unwrap() - c(0.8, 0.0)).norm() < 1e-12);
        // the truncation error at |z| = |w| = 1 is O(1/N)
        let e = e_operator(&t, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((e - c(2.0, 0.0)).norm() < 3.0 / 400.0, "{e}");
    }

    #[test]
    fn hermitian_symmetry_and_closed_form() {
        let t = build_shift(300).unwrap();
        let (z, w) = (c(0.3, 0.6), c(-0.7, 0.2));
        let a = e_operator(&t, z, w).unwrap();
        let b = e_operator(&t, w, z).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        assert!((a - e_shift_closed_form(z, w)).norm() < 1e-10);
    }
}
