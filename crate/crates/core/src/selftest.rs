//! A compact run of the invariant suite, reproducible from a seed.
//!
//! The report contains no timings or thread-dependent data, so its JSON form
//! is byte-identical across runs and thread counts.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::analysis::corpus::{random_gspec, random_pair, rng};
use crate::analysis::{
    c_value_both, diag_integral, support_function_on_grid, verify_inequality, Classification, DiagonalStatus,
};
use crate::error::Result;
use crate::geometry::{circle_for_theta, i_theta, kernel, omega1_membership, theta_of, Omega1Class, ThetaAngle};
use crate::gfunction::{affine_pullback, g_theta, pair_map, GSpec};
use crate::operator::{build_shift, e_operator, e_shift_closed_form, global_local_resolvent};
use crate::quadrature::{cylinder_integrate, jacobian, lemma1_mass, map_u, parametrized_kernel, QuadConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed deviation relative to the suite's tolerance
    /// (below 1 means every check passed with margin).
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: usize,
    pub failed: usize,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Suite {
    name: &'static str,
    checks: usize,
    failures: usize,
    worst: f64,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            name,
            checks: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    /// Records `deviation ≤ tol`.
    fn within(&mut self, deviation: f64, tol: f64) {
        self.checks += 1;
        let ratio = deviation / tol;
        if !(ratio <= 1.0) {
            self.failures += 1;
        }
        if ratio.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(ratio);
        }
    }

    fn holds(&mut self, ok: bool) {
        self.within(if ok { 0.0 } else { 2.0 }, 1.0);
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name.to_string(),
            checks: self.checks,
            failures: self.failures,
            worst_ratio: self.worst,
        }
    }
}

fn theta(rng: &mut impl Rng) -> f64 {
    rng.gen_range(1e-3..PI - 1e-3)
}

fn geometry_suite(rng: &mut impl Rng) -> Result<Suite> {
    let mut s = Suite::new("geometry");
    for _ in 0..500 {
        let th = ThetaAngle::new(theta(rng))?;
        let c = circle_for_theta(th);
        let r2 = c.radius * c.radius;
        s.within(((c.center - 1.0).norm_sqr() - r2).abs() / r2, 1e-12);
        s.within(((c.center + 1.0).norm_sqr() - r2).abs() / r2, 1e-12);
        // π − θ is itself rounded, which moves ln(2 sin θ) by ~ulp(π)/sin θ
        s.within((i_theta(th.reflect()) - i_theta(th).conj()).norm(), 1e-14 / th.value().sin());
        s.holds(omega1_membership(i_theta(th), 1e-9) == Omega1Class::Boundary);

        let u = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if u.im.abs() < 1e-3 || (u.norm() - 1.0).abs() < 1e-3 {
            continue;
        }
        let t = theta_of(u)?;
        let c = circle_for_theta(t);
        s.within(((u - c.center).norm() - c.radius).abs() / c.radius, 1e-12);
        let tv = t.value();
        let rep = Complex64::cis(-tv) * (tv.cos() / (PI * (1.0 - u.norm_sqr())));
        let k = kernel(u)?;
        s.within((k - rep).norm() / k.norm(), 1e-10);
    }
    Ok(s)
}

fn gfunction_suite(rng: &mut impl Rng) -> Result<Suite> {
    let mut s = Suite::new("gfunction");
    for _ in 0..50 {
        let g = random_gspec(rng);
        let (z, w) = random_pair(rng);
        let pulled = affine_pullback(&g, z, w)?;
        let (a, b) = pair_map(z, w);
        for _ in 0..40 {
            let v = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let val = g.evaluate(v);
            s.holds((0.0..=1.0).contains(&val));
            s.holds(pulled.evaluate(v) == g.evaluate(a * v + b));
            if val > 0.0 {
                s.holds(g.support_box().contains(v));
            }
        }
    }
    Ok(s)
}

fn cylinder_map_suite(rng: &mut impl Rng) -> Result<Suite> {
    let mut s = Suite::new("cylinder_maps");
    for _ in 0..300 {
        let t = rng.gen_range(-PI..PI);
        let th = rng.gen_range(0.05..PI - 0.05);
        let side = t.sin() + th.cos();
        if side.abs() < 1e-3 {
            continue;
        }
        let h = 1e-6;
        let du_dt = (map_u(t + h, th)? - map_u(t - h, th)?) / (2.0 * h);
        let du_dth = (map_u(t, th + h)? - map_u(t, th - h)?) / (2.0 * h);
        let fd = (du_dt.re * du_dth.im - du_dt.im * du_dth.re).abs();
        let j = jacobian(t, th)?;
        s.within((fd - j).abs() / j, 1e-6);

        let pk = parametrized_kernel(t, th)?;
        let k = kernel(map_u(t, th)?)?;
        s.within((pk - k).norm() / k.norm(), 1e-10);
        let sign = if side > 0.0 { 1.0 } else { -1.0 };
        let expect = Complex64::new(-th.cos() / th.sin(), 1.0) * (sign / (2.0 * PI));
        s.within((pk * j - expect).norm(), 1e-12 * (1.0 + expect.norm()));
        s.holds(map_u(t, th)?.im.signum() == side.signum());
    }
    Ok(s)
}

fn closed_form_suite(cfg: &QuadConfig) -> Result<Suite> {
    let mut s = Suite::new("closed_form");
    for k in 1..6 {
        let th = ThetaAngle::new(k as f64 * PI / 6.0)?;
        let r = cylinder_integrate(&g_theta(th), cfg)?;
        s.holds(r.converged);
        s.within((r.value - i_theta(th)).norm(), 1e-6);
    }
    Ok(s)
}

fn engine_suite(rng: &mut impl Rng, cfg: &QuadConfig) -> Result<Suite> {
    let mut s = Suite::new("engine_agreement");
    for _ in 0..8 {
        let g = random_gspec(rng);
        let (z, w) = random_pair(rng);
        let cmp = c_value_both(&g, z, w, cfg)?;
        let bound = 3.0 * (cmp.planar.error_estimate + cmp.cylinder.error_estimate);
        s.within(cmp.difference, bound.max(1e-12));
        s.within(cmp.difference, 1e-3);
    }
    Ok(s)
}

fn inequality_suite(rng: &mut impl Rng, cfg: &QuadConfig) -> Result<Suite> {
    let mut s = Suite::new("inequality");
    for _ in 0..30 {
        let g = random_gspec(rng);
        let (z, w) = random_pair(rng);
        let v = verify_inequality(&g, z, w, cfg)?;
        s.holds(v.gap >= -3.0 * v.error);
        s.holds(v.classification != Classification::Violation);
        if v.classification == Classification::BoundaryExtremal {
            s.holds(v.matched_theta.is_some());
        }
    }
    for th in [PI / 4.0, FRAC_PI_2] {
        let (z, w) = random_pair(rng);
        let t = ThetaAngle::new(th)?;
        let g = GSpec::transformed_disc_theta(t, z, w)?;
        let v = verify_inequality(&g, z, w, cfg)?;
        s.within(v.gap.abs(), 1e-3);
        s.within(v.matched_theta.map_or(f64::INFINITY, |m| (m.value() - th).abs()), 1e-3);
    }
    Ok(s)
}

fn operator_suite(rng: &mut impl Rng) -> Result<Suite> {
    let mut s = Suite::new("operator");
    let t = build_shift(400)?;
    for _ in 0..10 {
        let z = Complex64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(-PI..PI));
        let w = Complex64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(-PI..PI));
        let e = e_operator(&t, z, w)?;
        s.within((e - e_shift_closed_form(z, w)).norm(), 1e-6);
        s.within((e - e_operator(&t, w, z)?.conj()).norm(), 1e-12);
        let x = global_local_resolvent(&t, z)?;
        s.within((x.norm - 1.0).max(0.0), 1e-6);
        s.within((Complex64::new(1.0, 0.0) - e).norm() - 1.0, 1e-6);
    }
    Ok(s)
}

fn diagonal_suite(cfg: &QuadConfig) -> Result<Suite> {
    let mut s = Suite::new("diagonal");
    let origin = Complex64::new(0.0, 0.0);
    let ann = diag_integral(&GSpec::annulus(origin, 1.0, 2.0)?, origin, cfg)?;
    s.holds(ann.status == DiagonalStatus::Finite);
    s.within(ann.value.map_or(f64::INFINITY, |v| (v - 2.0 * 2f64.ln()).abs()), 1e-4);
    let disc = diag_integral(&GSpec::disc(origin, 1.0)?, origin, cfg)?;
    s.holds(disc.status == DiagonalStatus::Divergent);
    let t = build_shift(400)?;
    s.within(e_operator(&t, origin, origin)?.norm(), 1e-2);
    Ok(s)
}

fn support_suite() -> Result<Suite> {
    let mut s = Suite::new("support");
    for alpha in [-0.6, 0.0, 0.6] {
        let r = support_function_on_grid(alpha, 120, 120)?;
        s.within(1.0 - r.bang_bang.agreement, 0.02);
        s.within((r.bang_bang.achieved_value - r.support_value).abs(), 5e-2);
    }
    Ok(s)
}

fn lemma1_suite(cfg: &QuadConfig) -> Result<Suite> {
    let mut s = Suite::new("lemma1");
    let m = lemma1_mass(&GSpec::disc(Complex64::new(0.0, 0.0), 2.0)?, cfg)?;
    for r in m.ratios() {
        s.holds(r >= 1.5);
    }
    s.holds(m.result.converged);
    Ok(s)
}

/// Runs every suite with the default quadrature configuration.
pub fn run(seed: u64) -> Result<SelftestReport> {
    let cfg = QuadConfig::default();
    let mut r = rng(seed);
    let suites = vec![
        geometry_suite(&mut r)?,
        gfunction_suite(&mut r)?,
        cylinder_map_suite(&mut r)?,
        closed_form_suite(&cfg)?,
        engine_suite(&mut r, &cfg)?,
        inequality_suite(&mut r, &cfg)?,
        operator_suite(&mut r)?,
        diagonal_suite(&cfg)?,
        support_suite()?,
        lemma1_suite(&cfg)?,
    ];
    let suites: Vec<SuiteReport> = suites.into_iter().map(Suite::finish).collect();
    let passed = suites.iter().filter(|s| s.failures == 0).count();
    Ok(SelftestReport {
        seed,
        failed: suites.len() - passed,
        passed,
        suites,
    })
}
