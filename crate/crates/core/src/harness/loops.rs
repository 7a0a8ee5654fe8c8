//! Seeded random loops in thin annuli and the degree–length suite built on them.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Family, HarnessError, VerdictStatus, VerificationVerdict};
use crate::geometry::{degree_length_check, GeometryError, LoopSample, PlanePoint};
use crate::hamiltonian::HamiltonianSpec;

type Point = PlanePoint<f64>;

/// Random smooth loop in the annulus `1 ≤ |z| ≤ 1 + δ`.
///
/// The radius is `1 + δ·u(t)` with `u` a normalized trigonometric polynomial
/// taking values in `[0, 1]`; the angle is `2π·d·t` plus a bounded
/// trigonometric wobble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusLoop {
    pub delta: f64,
    pub degree: i64,
    pub radial: Vec<(f64, f64)>,
    pub angular: Vec<(f64, f64)>,
}

impl AnnulusLoop {
    pub fn random<R: Rng>(rng: &mut R, delta: f64) -> Self {
        let degree = rng.gen_range(-3..=3);
        let modes = rng.gen_range(1..=4);
        let radial = (0..modes)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU)))
            .collect();
        let angular = (0..rng.gen_range(0..=3))
            .map(|_| (rng.gen_range(-0.8..0.8), rng.gen_range(0.0..TAU)))
            .collect();
        Self {
            delta,
            degree,
            radial,
            angular,
        }
    }

    pub fn point(&self, t: f64) -> Point {
        let norm: f64 = self
            .radial
            .iter()
            .map(|(a, _)| a.abs())
            .sum::<f64>()
            .max(1e-12);
        let wave: f64 = self
            .radial
            .iter()
            .enumerate()
            .map(|(j, (a, ph))| a * (TAU * (j + 1) as f64 * t + ph).cos())
            .sum();
        let u = 0.5 * (1.0 + wave / norm);
        let wobble: f64 = self
            .angular
            .iter()
            .enumerate()
            .map(|(j, (b, ph))| b * (TAU * (j + 1) as f64 * t + ph).sin())
            .sum();
        Point::from_polar(1.0 + self.delta * u, TAU * self.degree as f64 * t + wobble)
    }

    pub fn sample(&self, n: usize) -> Result<LoopSample<f64>, GeometryError> {
        LoopSample::from_fn(n, |t| self.point(t))
    }
}

/// Degree–length inequality on `per_delta` random loops for each
/// `δ ∈ {0.2, 0.1, 0.05}`. A loop exceeding the bound beyond its
/// discretization tolerance is a `VIOLATION`: nothing here is sampled from an
/// incomplete search.
pub fn degree_length_suite(
    seed: u64,
    per_delta: usize,
    samples: usize,
) -> Result<VerificationVerdict, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for delta in [0.2, 0.1, 0.05] {
        for _ in 0..per_delta {
            let lp = AnnulusLoop::random(&mut rng, delta);
            let c = degree_length_check(&lp.sample(samples)?, delta)?;
            worst = worst.max(c.lhs - c.rhs);
            checked += 1;
            if !c.holds {
                failures.push(
                    json!({ "loop": lp, "lhs": c.lhs, "rhs": c.rhs, "tolerance": c.tolerance }),
                );
            }
        }
    }
    let status = if failures.is_empty() {
        VerdictStatus::WitnessFound
    } else {
        VerdictStatus::Violation
    };
    let evidence = json!({
        "seed": seed,
        "loops": checked,
        "samples_per_loop": samples,
        "largest_lhs_minus_rhs": worst,
        "failures": failures,
    });
    let family = Family::new("annulus_loops", HamiltonianSpec::zero());
    let mut v = VerificationVerdict::new("degree_length", &family, status, evidence);
    v.spec = None;
    Ok(v)
}
