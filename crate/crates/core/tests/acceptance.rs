//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints one PASS/FAIL line; exits non-zero on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cauchy_core::analysis::corpus::{random_gspec, random_pair, random_raster, rng};
use cauchy_core::analysis::{
    c_value_both, diag_integral, e_value, support_function_on_grid, verify_inequality, Classification,
    DiagonalStatus,
};
use cauchy_core::geometry::{i_theta, kernel, kernel_on_circle, kernel_on_unit_circle, theta_of, ThetaAngle};
use cauchy_core::gfunction::{affine_pullback, g_theta, pair_map, BoundingBox, GSpec};
use cauchy_core::operator::{build_shift, e_operator, global_local_resolvent};
use cauchy_core::quadrature::{
    cylinder_integrate, cylinder_region_areas, jacobian, lemma1_mass, map_u, parametrized_kernel, planar_integrate,
    region_iterated_integral, QuadConfig,
};
use cauchy_core::{selftest, Result};
use num_complex::Complex64;
use rand::Rng;

const CLOSED_FORM_TOL: f64 = 1e-4;
const CLOSED_FORM_TIME: Duration = Duration::from_secs(10);
const ENGINE_ERROR_FACTOR: f64 = 3.0;
const ENGINE_ABS_TOL: f64 = 1e-3;
const AFFINE_TOL: f64 = 1e-3;
const CONJUGATION_FACTOR: f64 = 2.0;
const INEQUALITY_FACTOR: f64 = 3.0;
const EQUALITY_TOL: f64 = 1e-3;
const INTERIOR_FACTOR: f64 = 3.0;
const JACOBIAN_TOL: f64 = 1e-6;
const KERNEL_TOL: f64 = 1e-10;
const LEMMA1_RATIO: f64 = 1.5;
const REGION_TOL: f64 = 1e-3;
const AREA_TOL: f64 = 1e-6;
const SUPPORT_AGREEMENT: f64 = 0.995;
const SUPPORT_VALUE_TOL: f64 = 1e-2;
const OPERATOR_TOL: f64 = 1e-3;
const OPERATOR_NORM_SLACK: f64 = 1e-6;
const OPERATOR_TIME: Duration = Duration::from_secs(60);
const DIAGONAL_TOL: f64 = 1e-4;
const DIAGONAL_OPERATOR_TOL: f64 = 1e-2;

type Outcome = Result<(bool, String)>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn theta(v: f64) -> ThetaAngle {
    ThetaAngle::new(v).expect("valid angle")
}

fn closed_form() -> Outcome {
    let cfg = QuadConfig::default();
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    for k in [6.0, 4.0, 3.0, 2.0, 1.5, 1.2] {
        let th = theta(PI / k);
        let start = Instant::now();
        let r = cylinder_integrate(&g_theta(th), &cfg)?;
        slowest = slowest.max(start.elapsed());
        worst = worst.max((r.value - i_theta(th)).norm());
    }
    Ok((
        worst <= CLOSED_FORM_TOL && slowest <= CLOSED_FORM_TIME,
        format!("max error {worst:.2e}, slowest {slowest:.2?}"),
    ))
}

fn engine_corpus() -> Result<Vec<(&'static str, GSpec)>> {
    let half = GSpec::intersection(GSpec::disc(c(0.0, 0.0), 1.2)?, GSpec::rect(-1.3, 1.3, 0.0, 1.3)?);
    Ok(vec![
        ("unit disc", GSpec::disc(c(0.0, 0.0), 1.0)?),
        ("offset disc", GSpec::disc(c(0.3, 0.4), 0.7)?),
        ("disc around w", GSpec::disc(c(-0.5, -0.6), 1.5)?),
        ("annulus", GSpec::annulus(c(0.0, 0.2), 0.4, 1.3)?),
        ("scaled disc", GSpec::scale(0.6, GSpec::disc(c(0.1, -0.2), 0.9)?)?),
        ("raster a", random_raster(&mut rng(101))),
        ("raster b", random_raster(&mut rng(202))),
        ("rectangle", GSpec::rect(-0.5, 0.8, -0.3, 0.9)?),
        (
            "two discs",
            GSpec::union(GSpec::disc(c(-0.4, 0.3), 0.5)?, GSpec::disc(c(0.5, -0.2), 0.6)?),
        ),
        ("half disc", half),
        ("disc theta", g_theta(theta(PI / 3.0))),
    ])
}

fn engine_agreement() -> Outcome {
    let cfg = QuadConfig::default();
    let (z, w) = (c(1.0, 0.0), c(-1.0, 0.0));
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut worst_abs = 0.0f64;
    let corpus = engine_corpus()?;
    let mut failed = Vec::new();
    for (name, g) in &corpus {
        let cmp = c_value_both(g, z, w, &cfg)?;
        let bound = ENGINE_ERROR_FACTOR * (cmp.planar.error_estimate + cmp.cylinder.error_estimate);
        worst_ratio = worst_ratio.max(cmp.difference / bound);
        worst_abs = worst_abs.max(cmp.difference);
        if !(cmp.difference <= bound && cmp.difference <= ENGINE_ABS_TOL) {
            ok = false;
            failed.push(*name);
        }
    }
    Ok((
        ok && corpus.len() >= 10,
        format!(
            "{} g-specs, max |planar - cylinder| {worst_abs:.2e}, max ratio to bound {worst_ratio:.2} {failed:?}",
            corpus.len()
        ),
    ))
}

fn affine_reduction() -> Outcome {
    let cfg = QuadConfig::default();
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = random_gspec(&mut r);
        let (z, w) = random_pair(&mut r);
        let planar = planar_integrate(&g, z, w, &cfg)?;
        let pulled = cylinder_integrate(&affine_pullback(&g, z, w)?, &cfg)?;
        worst = worst.max((planar.value - pulled.value).norm());
    }
    Ok((worst <= AFFINE_TOL, format!("20 cases, max difference {worst:.2e}")))
}

fn conjugation() -> Outcome {
    let cfg = QuadConfig::default();
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for k in 0..10 {
        let th = theta(0.12 + 0.29 * k as f64);
        let a = cylinder_integrate(&g_theta(th), &cfg)?;
        let b = cylinder_integrate(&g_theta(th.reflect()), &cfg)?;
        let diff = (b.value - a.value.conj()).norm();
        let bound = CONJUGATION_FACTOR * (a.error_estimate + b.error_estimate);
        worst_ratio = worst_ratio.max(diff / bound);
        ok &= diff <= bound;
    }
    Ok((ok, format!("10 angles, max ratio to bound {worst_ratio:.2}")))
}

fn inequality() -> Outcome {
    let cfg = QuadConfig::default();
    let mut r = rng(404);
    let (mut violations, mut below) = (0, 0);
    let mut min_gap = f64::INFINITY;
    for _ in 0..200 {
        let g = random_gspec(&mut r);
        let (z, w) = random_pair(&mut r);
        let v = verify_inequality(&g, z, w, &cfg)?;
        min_gap = min_gap.min(v.gap);
        if v.gap < -INEQUALITY_FACTOR * v.error {
            below += 1;
        }
        if v.classification == Classification::Violation {
            violations += 1;
        }
    }
    Ok((
        below == 0 && violations == 0,
        format!("200 instances, min gap {min_gap:.3e}, {below} below bound, {violations} violations"),
    ))
}

fn equality() -> Outcome {
    let cfg = QuadConfig::default();
    let mut r = rng(505);
    let pairs = [random_pair(&mut r), random_pair(&mut r)];
    let (mut worst_gap, mut worst_theta) = (0.0f64, 0.0f64);
    for th in [FRAC_PI_4, FRAC_PI_2] {
        for &(z, w) in &pairs {
            let g = GSpec::transformed_disc_theta(theta(th), z, w)?;
            let v = verify_inequality(&g, z, w, &cfg)?;
            worst_gap = worst_gap.max(v.gap.abs());
            let miss = v.matched_theta.map_or(f64::INFINITY, |m| (m.value() - th).abs());
            worst_theta = worst_theta.max(miss);
        }
    }
    Ok((
        worst_gap <= EQUALITY_TOL && worst_theta <= EQUALITY_TOL,
        format!("max ||1 - E| - 1| {worst_gap:.2e}, max theta miss {worst_theta:.2e}"),
    ))
}

fn structured_non_discs() -> Result<Vec<GSpec>> {
    let mut out = Vec::new();
    for th in [PI / 3.0, FRAC_PI_2, 2.0 * PI / 3.0] {
        let circ = cauchy_core::geometry::circle_for_theta(theta(th));
        let bbox = BoundingBox::around(circ.center, circ.radius);
        // upper half of D_θ
        let upper = GSpec::rect(bbox.x0, bbox.x1, circ.center.im, bbox.y1)?;
        out.push(GSpec::intersection(g_theta(theta(th)), upper));
        // D_θ with an off-centre hole
        let hole = GSpec::disc(circ.center + c(0.2 * circ.radius, 0.1 * circ.radius), 0.3 * circ.radius)?;
        out.push(GSpec::intersection(g_theta(theta(th)), GSpec::complement(bbox, hole)));
    }
    for th in [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
        out.push(GSpec::scale(0.9, g_theta(theta(th)))?);
    }
    let circ = cauchy_core::geometry::circle_for_theta(theta(FRAC_PI_2));
    let bbox = BoundingBox::around(circ.center, circ.radius);
    let lower = GSpec::rect(bbox.x0, bbox.x1, bbox.y0, 0.0)?;
    out.push(GSpec::intersection(g_theta(theta(FRAC_PI_2)), lower));
    Ok(out)
}

fn strict_interior() -> Outcome {
    let cfg = QuadConfig::default();
    let (z, w) = (c(1.0, 0.0), c(-1.0, 0.0));
    let gs = structured_non_discs()?;
    let mut ok = gs.len() == 10;
    let mut min_margin = f64::INFINITY;
    for g in &gs {
        let v = verify_inequality(g, z, w, &cfg)?;
        min_margin = min_margin.min(v.gap / (INTERIOR_FACTOR * v.error).max(f64::MIN_POSITIVE));
        ok &= v.classification == Classification::StrictInterior && v.gap > INTERIOR_FACTOR * v.error;
    }
    Ok((ok, format!("{} densities, min delta / (3 error) {min_margin:.2e}", gs.len())))
}

fn jacobian_fd() -> Outcome {
    let mut r = rng(808);
    let h = 1e-6;
    let (mut n, mut worst) = (0, 0.0f64);
    while n < 1000 {
        let t = r.gen_range(-PI..PI);
        let th = r.gen_range(0.05..PI - 0.05);
        // central differences straddling Z are meaningless
        if (t.sin() + th.cos()).abs() < 1e-2 {
            continue;
        }
        let du_dt = (map_u(t + h, th)? - map_u(t - h, th)?) / (2.0 * h);
        let du_dth = (map_u(t, th + h)? - map_u(t, th - h)?) / (2.0 * h);
        let fd = (du_dt.re * du_dth.im - du_dt.im * du_dth.re).abs();
        let j = jacobian(t, th)?;
        worst = worst.max((fd - j).abs() / j);
        n += 1;
    }
    Ok((worst <= JACOBIAN_TOL, format!("1000 points, max relative error {worst:.2e}")))
}

fn kernel_identities() -> Outcome {
    let mut r = rng(909);
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
    let mut worst = [0.0f64; 4];

    // two-point kernel under v ↦ ½((z − w)v + (z + w)) reduces to k(v)
    for _ in 0..1000 {
        let (z, w) = random_pair(&mut r);
        let v = c(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let (a, b) = pair_map(z, w);
        let u = a * v + b;
        let two_point = -a.norm_sqr() / (PI * (u - w).conj() * (u - z));
        worst[0] = worst[0].max(rel(two_point, kernel(v)?));
    }
    // circle-label form off the unit circle
    let mut n = 0;
    while n < 1000 {
        let u = c(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        if u.im.abs() < 1e-3 || (u.norm() - 1.0).abs() < 1e-3 {
            continue;
        }
        let th = theta_of(u)?.value();
        let rep = Complex64::from_polar(1.0, -th) * (th.cos() / (PI * (1.0 - u.norm_sqr())));
        worst[1] = worst[1].max(rel(rep, kernel(u)?)).max(rel(kernel_on_circle(u)?, kernel(u)?));
        n += 1;
    }
    // unit circle
    let mut n = 0;
    while n < 1000 {
        let phi = r.gen_range(-PI..PI);
        if phi.sin().abs() < 1e-3 {
            continue;
        }
        let u = Complex64::from_polar(1.0, phi);
        let onc = c(0.0, 1.0 / (2.0 * PI * u.im));
        worst[2] = worst[2].max(rel(onc, kernel(u)?)).max(rel(kernel_on_unit_circle(u)?, kernel(u)?));
        n += 1;
    }
    // parametrized kernel
    let mut n = 0;
    while n < 1000 {
        let t = r.gen_range(-PI..PI);
        let th = r.gen_range(0.01..PI - 0.01);
        if (t.sin() + th.cos()).abs() < 1e-3 {
            continue;
        }
        worst[3] = worst[3].max(rel(parametrized_kernel(t, th)?, kernel(map_u(t, th)?)?));
        n += 1;
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    Ok((
        max <= KERNEL_TOL,
        format!(
            "max relative errors: reduction {:.1e}, circle form {:.1e}, unit circle {:.1e}, parametrized {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn lemma1() -> Outcome {
    let m = lemma1_mass(&GSpec::disc(c(0.0, 0.0), 2.0)?, &QuadConfig::default())?;
    let ratios = m.ratios();
    let ok = ratios.len() >= 4 && ratios.iter().all(|r| *r >= LEMMA1_RATIO);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    Ok((ok, format!("ratios of successive differences [{}]", shown.join(", "))))
}

fn regions() -> Outcome {
    let mut worst = 0.0f64;
    for phi in [PI / 6.0, FRAC_PI_4, PI / 3.0] {
        let phi = theta(phi);
        let r = region_iterated_integral(phi, 1e-8)?;
        worst = worst.max((r.value - i_theta(phi)).norm());
    }
    Ok((worst <= REGION_TOL, format!("max error {worst:.2e}")))
}

fn areas() -> Outcome {
    let (u, l) = cylinder_region_areas(&QuadConfig::default())?;
    let target = PI * PI;
    let (eu, el) = ((u.value.re - target).abs(), (l.value.re - target).abs());
    Ok((
        eu <= AREA_TOL && el <= AREA_TOL,
        format!("|U| - pi^2 = {eu:.1e}, |L| - pi^2 = {el:.1e}"),
    ))
}

fn support() -> Outcome {
    let (mut worst_agree, mut worst_value) = (1.0f64, 0.0f64);
    for alpha in [-1.2, -0.6, 0.0, 0.6, 1.2] {
        let s = support_function_on_grid(alpha, 400, 400)?;
        worst_agree = worst_agree.min(s.bang_bang.agreement);
        worst_value = worst_value.max((s.bang_bang.achieved_value - s.support_value).abs());
    }
    Ok((
        worst_agree >= SUPPORT_AGREEMENT && worst_value <= SUPPORT_VALUE_TOL,
        format!("min agreement {:.4}%, max value gap {worst_value:.2e}", 100.0 * worst_agree),
    ))
}

fn operator() -> Outcome {
    let start = Instant::now();
    let cfg = QuadConfig::default();
    let t = build_shift(400)?;
    let disc = GSpec::disc(c(0.0, 0.0), 1.0)?;
    let radii = [0.0, 0.2, 0.4, 0.6, 0.8];
    let zs: Vec<Complex64> = radii.iter().enumerate().map(|(k, r)| Complex64::from_polar(*r, 0.3 + 1.3 * k as f64)).collect();
    let ws: Vec<Complex64> = radii.iter().enumerate().map(|(k, r)| Complex64::from_polar(*r, -0.9 + 2.1 * k as f64)).collect();
    let (mut worst, mut max_norm) = (0.0f64, 0.0f64);
    for &z in &zs {
        max_norm = max_norm.max(global_local_resolvent(&t, z)?.norm);
        for &w in &ws {
            let op = e_operator(&t, z, w)?;
            let integral = e_value(&disc, z, w, &cfg)?;
            worst = worst.max((op - integral).norm());
        }
    }
    for &w in &ws {
        max_norm = max_norm.max(global_local_resolvent(&t, w)?.norm);
    }
    let elapsed = start.elapsed();
    Ok((
        worst <= OPERATOR_TOL && max_norm <= 1.0 + OPERATOR_NORM_SLACK && elapsed <= OPERATOR_TIME,
        format!("25 pairs, max |E_op - exp C| {worst:.2e}, max norm {max_norm:.9}, {elapsed:.2?}"),
    ))
}

fn diagonal() -> Outcome {
    let cfg = QuadConfig::default();
    let origin = c(0.0, 0.0);
    let ann = diag_integral(&GSpec::annulus(origin, 1.0, 2.0)?, origin, &cfg)?;
    let ann_err = ann.value.map_or(f64::INFINITY, |v| (v - 2.0 * 2f64.ln()).abs());
    let disc = GSpec::disc(origin, 1.0)?;
    let d = diag_integral(&disc, origin, &cfg)?;
    let op = e_operator(&build_shift(400)?, origin, origin)?;
    let e = e_value(&disc, origin, origin, &cfg)?;
    let agree = (op - e).norm();
    Ok((
        ann.status == DiagonalStatus::Finite
            && ann_err <= DIAGONAL_TOL
            && d.status == DiagonalStatus::Divergent
            && op.norm() <= DIAGONAL_OPERATOR_TOL
            && agree <= DIAGONAL_OPERATOR_TOL,
        format!(
            "annulus error {ann_err:.1e}, disc {:?}, |E_op(0,0)| {:.1e}, |E_op - E_int| {agree:.1e}",
            d.status,
            op.norm()
        ),
    ))
}

fn determinism() -> Outcome {
    let seed = 20;
    let a = selftest::run(seed)?.to_json();
    let b = selftest::run(seed)?.to_json();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(|| selftest::run(seed))?
        .to_json();
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .expect("thread pool")
        .install(|| selftest::run(seed))?
        .to_json();
    Ok((
        a == b && a == one && a == many,
        format!("{} bytes; repeat {}, 1 thread {}, 8 threads {}", a.len(), a == b, a == one, a == many),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 16] = [
        ("closed-form reproduction", closed_form),
        ("engine cross-validation", engine_agreement),
        ("affine reduction", affine_reduction),
        ("conjugation symmetry", conjugation),
        ("inequality on random instances", inequality),
        ("equality characterization", equality),
        ("strict interiority", strict_interior),
        ("jacobian", jacobian_fd),
        ("kernel identities", kernel_identities),
        ("lemma 1 convergence", lemma1),
        ("region decomposition", regions),
        ("triangle areas", areas),
        ("support function", support),
        ("operator cross-check", operator),
        ("diagonal conventions", diagonal),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({detail}; {:.2?})",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
