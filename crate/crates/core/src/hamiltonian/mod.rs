//! Time-periodic Hamiltonian families on the plane.
//!
//! Every family except [`HamiltonianSpec::Mollified`] vanishes on the unit
//! circle and extends beyond it by its own closed form. Vector fields follow
//! `i_X ω = dH` with `ω = dx ∧ dy`, i.e. `X = (∂_y H, −∂_x H)`; for a radial
//! profile `g(s)` the angular speed is `θ' = −2 g'(s)`.

pub mod mollifier;
pub mod norms;
pub mod profiles;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PlanePoint, TangentVector};
use crate::scalar::Scalar;
use crate::tolerances;

pub use mollifier::MollifierProfile;
pub use norms::{grad_bound_outside_disc, hofer_norm, HoferRegion};
pub use profiles::{FourierMode, RadialPoly, RadialProfile, Staircase};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("Hamiltonian does not vanish on the unit circle (max |H| = {0:e})")]
    BoundaryViolation(f64),
    #[error("invalid staircase shape: {0}")]
    InvalidShape(String),
    #[error("operation requires a mollified Hamiltonian")]
    NotMollified,
    #[error("mollification index must be positive")]
    ZeroIndex,
}

/// A Hamiltonian family, serialized as `{"kind": "...", ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum HamiltonianSpec<T> {
    /// `πρ(1 − s)`: rigid rotation by `2πρ` at time one.
    RotationFamily {
        rho: T,
    },
    RadialPoly(RadialPoly<T>),
    RadialStaircase(Staircase<T>),
    PerturbedRadial {
        base: RadialPoly<T>,
        modes: Vec<FourierMode<T>>,
    },
    /// Collar cut-off `H_n(t, 1 + r, θ) = H(t, 1 + ρ_n(r), θ)` outside the disc.
    Mollified {
        base: Box<HamiltonianSpec<T>>,
        n: u32,
        #[serde(default)]
        mollifier: MollifierProfile<T>,
    },
    /// Generator of `R_{−2πk t} ∘ φ_t`: `−πk(1 − s) + H(t, R_{2πk t} z)`.
    Precomposed {
        base: Box<HamiltonianSpec<T>>,
        turns: i64,
    },
}

impl<T: Scalar> HamiltonianSpec<T> {
    pub fn zero() -> Self {
        Self::RadialPoly(RadialPoly::zero())
    }

    pub fn rotation(rho: T) -> Self {
        Self::RotationFamily { rho }
    }

    pub fn radial_poly(coeffs: Vec<T>) -> Self {
        Self::RadialPoly(RadialPoly::new(coeffs))
    }

    /// `4s(1 − s)`.
    pub fn bump4() -> Self {
        Self::RadialPoly(RadialPoly::bump4())
    }

    pub fn perturbed(base: RadialPoly<T>, modes: Vec<FourierMode<T>>) -> Self {
        Self::PerturbedRadial { base, modes }
    }

    /// Kind name as it appears in serialized specs.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::RotationFamily { .. } => "rotation_family",
            Self::RadialPoly(_) => "radial_poly",
            Self::RadialStaircase(_) => "radial_staircase",
            Self::PerturbedRadial { .. } => "perturbed_radial",
            Self::Mollified { .. } => "mollified",
            Self::Precomposed { .. } => "precomposed",
        }
    }

    /// Closed-form radial profile of the restriction to the disc, if any.
    pub fn radial_profile(&self) -> Option<RadialProfile<T>> {
        match self {
            Self::RotationFamily { rho } => Some(RadialProfile::Rotation(*rho)),
            Self::RadialPoly(p) => Some(RadialProfile::Poly(p.clone())),
            Self::RadialStaircase(st) => Some(RadialProfile::Staircase(st.clone())),
            Self::PerturbedRadial { base, modes } => modes
                .iter()
                .all(|m| m.amplitude.is_zero())
                .then(|| RadialProfile::Poly(base.clone())),
            Self::Mollified { base, .. } => base.radial_profile(),
            Self::Precomposed { base, turns } => base
                .radial_profile()
                .map(|p| RadialProfile::Shifted(Box::new(p), *turns)),
        }
    }

    pub fn is_autonomous(&self) -> bool {
        match self {
            Self::RotationFamily { .. } | Self::RadialPoly(_) | Self::RadialStaircase(_) => true,
            Self::PerturbedRadial { modes, .. } => modes
                .iter()
                .all(|m| m.amplitude.is_zero() || m.time_freq == 0),
            Self::Mollified { base, .. } => base.is_autonomous(),
            // rotating frame of a radial base is still autonomous
            Self::Precomposed { base, turns } => *turns == 0 || base.radial_profile().is_some(),
        }
    }

    /// True when the spec is structurally the zero function.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Self::RotationFamily { rho } => rho.is_zero(),
            Self::RadialPoly(p) => p.is_zero(),
            Self::RadialStaircase(_) => false,
            Self::PerturbedRadial { base, modes } => {
                base.is_zero() && modes.iter().all(|m| m.amplitude.is_zero())
            }
            Self::Mollified { base, .. } => base.is_identically_zero(),
            Self::Precomposed { base, turns } => *turns == 0 && base.is_identically_zero(),
        }
    }

    /// `H(t, z)`.
    pub fn eval(&self, t: T, z: PlanePoint<T>) -> T {
        self.eval_grad(t, z).0
    }

    /// `∇H(t, z)`.
    pub fn gradient(&self, t: T, z: PlanePoint<T>) -> TangentVector<T> {
        self.eval_grad(t, z).1
    }

    /// Value and gradient together.
    pub fn eval_grad(&self, t: T, z: PlanePoint<T>) -> (T, TangentVector<T>) {
        match self {
            Self::RotationFamily { rho } => {
                let c = T::PI() * *rho;
                (c * (T::one() - z.s()), z * (-T::two() * c))
            }
            Self::RadialPoly(p) => {
                let s = z.s();
                (p.value(s), z * (T::two() * p.deriv(s)))
            }
            Self::RadialStaircase(st) => {
                let s = z.s();
                (st.value(s), z * (T::two() * st.deriv(s)))
            }
            Self::PerturbedRadial { base, modes } => {
                let s = z.s();
                let mut v = base.value(s);
                let mut g = z * (T::two() * base.deriv(s));
                for m in modes {
                    let (mv, gx, gy) = m.eval_grad(t, z.x, z.y);
                    v = v + mv;
                    g += PlanePoint::new(gx, gy);
                }
                (v, g)
            }
            Self::Mollified { base, n, mollifier } => {
                let r_out = z.norm();
                if r_out <= T::one() {
                    return base.eval_grad(t, z);
                }
                let offset = r_out - T::one();
                if offset * T::of(f64::from(*n)) >= T::one() {
                    return (T::zero(), PlanePoint::origin());
                }
                let (rho, drho) = mollifier.rho_n(*n, offset);
                let r_in = T::one() + rho;
                let scale = r_in / r_out;
                let (v, g) = base.eval_grad(t, z * scale);
                // Jacobian of z -> z·r_in/|z| is scale·I + (drho − scale)·ẑẑᵀ
                let unit = z * r_out.recip();
                let radial = unit.dot(g);
                (v, g * scale + unit * ((drho - scale) * radial))
            }
            Self::Precomposed { base, turns } => {
                let k = T::of(*turns as f64);
                let angle = T::TAU() * k * t;
                let (v, g) = base.eval_grad(t, z.rotated(angle));
                let c = T::PI() * k;
                (
                    v - c * (T::one() - z.s()),
                    g.rotated(-angle) + z * (T::two() * c),
                )
            }
        }
    }

    /// `X_{H^t}(z) = (∂_y H, −∂_x H)`.
    pub fn vector_field(&self, t: T, z: PlanePoint<T>) -> TangentVector<T> {
        let g = self.gradient(t, z);
        PlanePoint::new(g.y, -g.x)
    }

    /// `DX_{H^t}(z)` by central differences of the analytic vector field,
    /// row-major `[[∂X₁/∂x, ∂X₁/∂y], [∂X₂/∂x, ∂X₂/∂y]]`.
    pub fn vector_field_jacobian(&self, t: T, z: PlanePoint<T>) -> [[T; 2]; 2] {
        let h = T::epsilon().cbrt() * T::one().max(z.norm());
        let two_h = T::two() * h;
        let dx = (self.vector_field(t, z + PlanePoint::new(h, T::zero()))
            - self.vector_field(t, z - PlanePoint::new(h, T::zero())))
            * two_h.recip();
        let dy = (self.vector_field(t, z + PlanePoint::new(T::zero(), h))
            - self.vector_field(t, z - PlanePoint::new(T::zero(), h)))
            * two_h.recip();
        [[dx.x, dy.x], [dx.y, dy.y]]
    }

    /// `max |H(t, z)|` over `angles × times` samples of the unit circle.
    pub fn boundary_defect(&self, angles: usize, times: usize) -> T {
        let mut worst = T::zero();
        for j in 0..times {
            let t = T::of_usize(j) / T::of_usize(times);
            for i in 0..angles {
                let th = T::TAU() * T::of_usize(i) / T::of_usize(angles);
                worst = worst.max(self.eval(t, PlanePoint::from_polar(T::one(), th)).abs());
            }
        }
        worst
    }

    /// Generator of the inverse isotopy for autonomous radial families (`g ↦ −g`).
    pub fn inverse_autonomous(&self) -> Option<Self> {
        match self {
            Self::RotationFamily { rho } => Some(Self::RotationFamily { rho: -*rho }),
            Self::RadialPoly(p) => Some(Self::RadialPoly(p.scaled(-T::one()))),
            Self::PerturbedRadial { base, modes }
                if modes.iter().all(|m| m.amplitude.is_zero()) =>
            {
                Some(Self::RadialPoly(base.scaled(-T::one())))
            }
            _ => None,
        }
    }
}

/// Cut `base` off to the collar `|z| ≤ 1 + 1/n`.
pub fn build_mollified<T: Scalar>(
    base: &HamiltonianSpec<T>,
    n: u32,
    refined: bool,
) -> Result<HamiltonianSpec<T>, HamiltonianError> {
    if n == 0 {
        return Err(HamiltonianError::ZeroIndex);
    }
    let defect = base.boundary_defect(256, 16);
    if defect > T::of(tolerances::MOLLIFY_BOUNDARY) {
        return Err(HamiltonianError::BoundaryViolation(defect.to_f64_lossy()));
    }
    let mollifier = if refined {
        MollifierProfile::refined()
    } else {
        MollifierProfile::base()
    };
    Ok(HamiltonianSpec::Mollified {
        base: Box::new(base.clone()),
        n,
        mollifier,
    })
}

/// Hamiltonian generating `R̃_{−2πk} ∘ φ̃_H`.
///
/// Radial closed forms absorb the extra turn into their profile; nested
/// precompositions collapse into one.
pub fn precompose_rotation<T: Scalar>(h: &HamiltonianSpec<T>, turns: i64) -> HamiltonianSpec<T> {
    if turns == 0 {
        return h.clone();
    }
    let k = T::of(turns as f64);
    match h {
        HamiltonianSpec::RotationFamily { rho } => {
            HamiltonianSpec::RotationFamily { rho: *rho - k }
        }
        HamiltonianSpec::RadialPoly(p) => {
            HamiltonianSpec::RadialPoly(p.add(&RadialPoly::linear(-T::PI() * k)))
        }
        HamiltonianSpec::Precomposed { base, turns: inner } => {
            let total = inner + turns;
            if total == 0 {
                (**base).clone()
            } else {
                HamiltonianSpec::Precomposed {
                    base: base.clone(),
                    turns: total,
                }
            }
        }
        other => HamiltonianSpec::Precomposed {
            base: Box::new(other.clone()),
            turns,
        },
    }
}

/// Staircase Hamiltonian `G_λ(z) = g_λ(|z|²)` with bump height `height`.
pub fn build_staircase<T: Scalar>(
    lambda: T,
    eps: T,
    height: T,
) -> Result<HamiltonianSpec<T>, HamiltonianError> {
    Staircase::new(lambda, eps, height).map(HamiltonianSpec::RadialStaircase)
}
