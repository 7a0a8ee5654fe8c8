//! The shipped families every check runs against.

use serde::{Deserialize, Serialize};

use crate::hamiltonian::{build_staircase, FourierMode, HamiltonianSpec, RadialPoly};

type Spec = HamiltonianSpec<f64>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub spec: Spec,
}

impl Family {
    pub fn new(name: impl Into<String>, spec: Spec) -> Self {
        Self {
            name: name.into(),
            spec,
        }
    }
}

fn mode(
    amplitude: f64,
    time_freq: i32,
    angular_freq: u32,
    phase: f64,
    radial_power: u32,
) -> FourierMode<f64> {
    FourierMode {
        amplitude,
        time_freq,
        angular_freq,
        phase,
        radial_power,
    }
}

/// Rotation families with `ρ ∈ (0, 1)`.
pub const ROTATIONS: [f64; 4] = [0.25, 0.37, 0.5, 0.75];

pub fn rotations() -> Vec<Family> {
    ROTATIONS
        .iter()
        .map(|&rho| Family::new(format!("rotation_{rho}"), Spec::rotation(rho)))
        .collect()
}

/// Small time-dependent perturbations of `4s(1 − s)`, amplitudes at most 0.05.
pub fn perturbed() -> Vec<Family> {
    vec![
        Family::new(
            "perturbed_bump_a",
            Spec::perturbed(RadialPoly::bump4(), vec![mode(0.05, 1, 1, 0.0, 0)]),
        ),
        Family::new(
            "perturbed_bump_b",
            Spec::perturbed(
                RadialPoly::bump4(),
                vec![mode(0.03, 2, 2, 0.7, 1), mode(0.02, 1, 1, 0.0, 0)],
            ),
        ),
        Family::new(
            "perturbed_bump_c",
            Spec::perturbed(RadialPoly::bump4(), vec![mode(0.04, -1, 3, 1.3, 0)]),
        ),
    ]
}

pub fn staircase() -> Family {
    Family::new(
        "staircase",
        build_staircase(-1.0, 0.1, 0.5).expect("valid staircase parameters"),
    )
}

/// Every shipped family.
pub fn shipped() -> Vec<Family> {
    let mut out = vec![Family::new("zero", Spec::zero())];
    out.extend(rotations());
    out.push(Family::new("radial_bump", Spec::bump4()));
    out.extend(perturbed());
    out.push(staircase());
    out
}

/// Families with boundary rotation `|ρ| < 1`, for the collar winding check.
pub fn wind_families() -> Vec<Family> {
    vec![
        Family::new("rotation_0.5", Spec::rotation(0.5)),
        Family::new("rotation_-0.9", Spec::rotation(-0.9)),
        Family::new("zero", Spec::zero()),
    ]
}

/// `ρ = −2, −1.9, …, 2`.
pub fn rotation_sweep() -> Vec<f64> {
    (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect()
}
