//! Seeded random densities and point pairs for the randomized suites.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gfunction::{GSpec, Raster};
use crate::ComplexValue;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point(rng: &mut impl Rng, r: f64) -> ComplexValue {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_disc(rng: &mut impl Rng) -> GSpec {
    GSpec::Disc {
        center: point(rng, 1.0),
        radius: rng.gen_range(0.2..1.2),
    }
}

/// A raster with values in [0, 1] on a square grid inside [−1.5, 1.5]².
pub fn random_raster(rng: &mut impl Rng) -> GSpec {
    let n = rng.gen_range(4..=10);
    let cell = rng.gen_range(0.15..0.3);
    let origin = point(rng, 0.5) - Complex64::new(0.5, 0.5) * (cell * n as f64);
    let values = (0..n * n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    GSpec::Raster(Raster {
        origin,
        cell_size: cell,
        width: n,
        height: n,
        values,
    })
}

/// One of: a union of up to three discs, a raster, a scaled disc, an
/// annulus, or a rectangle minus a disc.
pub fn random_gspec(rng: &mut impl Rng) -> GSpec {
    match rng.gen_range(0..5) {
        0 => {
            let mut g = random_disc(rng);
            for _ in 0..rng.gen_range(0..3) {
                g = GSpec::union(g, random_disc(rng));
            }
            g
        }
        1 => random_raster(rng),
        2 => GSpec::Scale {
            factor: rng.gen_range(0.05..0.95),
            inner: Box::new(random_disc(rng)),
        },
        3 => {
            let c = point(rng, 0.5);
            let r_in = rng.gen_range(0.1..0.6);
            GSpec::annulus(c, r_in, r_in + rng.gen_range(0.2..0.8)).expect("valid radii")
        }
        _ => {
            let (x0, y0) = (rng.gen_range(-1.2..0.0), rng.gen_range(-1.2..0.0));
            let rect = GSpec::Rect {
                x0,
                x1: x0 + rng.gen_range(0.4..1.5),
                y0,
                y1: y0 + rng.gen_range(0.4..1.5),
            };
            let hole = GSpec::Disc {
                center: point(rng, 0.8),
                radius: rng.gen_range(0.1..0.5),
            };
            let bbox = rect.support_box();
            GSpec::intersection(rect, GSpec::complement(bbox, hole))
        }
    }
}

/// A pair `z ≠ w` in [−1.5, 1.5]² with `|z − w| ≥ 0.2`.
pub fn random_pair(rng: &mut impl Rng) -> (ComplexValue, ComplexValue) {
    loop {
        let z = point(rng, 1.5);
        let w = point(rng, 1.5);
        if (z - w).norm() >= 0.2 {
            return (z, w);
        }
    }
}
