//! Radial profiles `g(s)` in the squared radius and the Fourier modes used by
//! perturbed radial families.

use serde::{Deserialize, Serialize};

use super::mollifier::{smooth_step, smooth_step_deriv};
use super::HamiltonianError;
use crate::scalar::Scalar;

/// Polynomial profile `g(s) = Σ cᵢ sⁱ` with `g(1) = 0`.
///
/// Construction projects the coefficients orthogonally onto `Σ cᵢ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", from = "RawPoly<T>")]
pub struct RadialPoly<T> {
    coeffs: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> From<RawPoly<T>> for RadialPoly<T> {
    fn from(raw: RawPoly<T>) -> Self {
        Self::new(raw.coeffs)
    }
}

impl<T: Scalar> RadialPoly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        if !coeffs.is_empty() {
            let n = T::of_usize(coeffs.len());
            let mean = coeffs.iter().fold(T::zero(), |a, &c| a + c) / n;
            for c in &mut coeffs {
                *c = *c - mean;
            }
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `4s(1 − s)`.
    pub fn bump4() -> Self {
        Self::new(vec![T::zero(), T::of(4.0), T::of(-4.0)])
    }

    /// `c (1 − s)`.
    pub fn linear(c: T) -> Self {
        Self::new(vec![c, -c])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn value(&self, s: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * s + c)
    }

    pub fn deriv(&self, s: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(T::zero(), |acc, (i, &c)| acc * s + c * T::of_usize(i))
    }

    pub fn deriv2(&self, s: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(T::zero(), |acc, (i, &c)| {
                acc * s + c * T::of_usize(i * (i - 1))
            })
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[T], i: usize| v.get(i).copied().unwrap_or_else(T::zero);
        Self::new(
            (0..n)
                .map(|i| get(&self.coeffs, i) + get(&other.coeffs, i))
                .collect(),
        )
    }

    pub fn scaled(&self, k: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }
}

/// The staircase profile `g_λ`: a plateau at `λ ≤ 0` on `s ≤ 1 − 2ε`, a
/// monotone climb to zero finishing before `1 − ε`, and one bump of height
/// `height` supported inside `(1 − ε, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawStaircase<T>")]
pub struct Staircase<T> {
    lambda: T,
    eps: T,
    height: T,
    margin: T,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawStaircase<T> {
    lambda: T,
    eps: T,
    height: T,
    #[serde(default = "default_margin")]
    margin: T,
}

fn default_margin<T: Scalar>() -> T {
    T::of(0.125)
}

impl<T: Scalar> TryFrom<RawStaircase<T>> for Staircase<T> {
    type Error = HamiltonianError;
    fn try_from(raw: RawStaircase<T>) -> Result<Self, Self::Error> {
        Self::with_margin(raw.lambda, raw.eps, raw.height, raw.margin)
    }
}

impl<T: Scalar> Staircase<T> {
    /// Staircase with blend windows of width `ε/8`.
    pub fn new(lambda: T, eps: T, height: T) -> Result<Self, HamiltonianError> {
        Self::with_margin(lambda, eps, height, default_margin())
    }

    /// `margin` is the gap, as a fraction of `ε`, between the bump support and
    /// the points `1 − ε`, `1`; it is also the flat stretch left before `1 − ε`.
    pub fn with_margin(lambda: T, eps: T, height: T, margin: T) -> Result<Self, HamiltonianError> {
        let bad = |why: &str| Err(HamiltonianError::InvalidShape(why.to_string()));
        if !(lambda <= T::zero()) {
            return bad("lambda must be <= 0");
        }
        if !(eps > T::zero() && eps < T::of(0.25)) {
            return bad("eps must lie in (0, 1/4)");
        }
        if !(height > T::zero()) {
            return bad("bump height must be positive");
        }
        if !(margin > T::zero() && margin < T::half()) {
            return bad("bump support must stay strictly inside (1 - eps, 1)");
        }
        Ok(Self {
            lambda,
            eps,
            height,
            margin,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn height(&self) -> T {
        self.height
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    fn climb_window(&self) -> (T, T) {
        let start = T::one() - T::two() * self.eps;
        (start, self.eps * (T::one() - self.margin))
    }

    fn bump_window(&self) -> (T, T) {
        let lo = T::one() - self.eps + self.margin * self.eps;
        let hi = T::one() - self.margin * self.eps;
        (lo, hi)
    }

    /// Peak location of the bump.
    pub fn bump_peak(&self) -> T {
        let (lo, hi) = self.bump_window();
        T::half() * (lo + hi)
    }

    fn bump(&self, s: T) -> (T, T) {
        let (lo, hi) = self.bump_window();
        if s <= lo || s >= hi {
            return (T::zero(), T::zero());
        }
        let w = hi - lo;
        let v = T::two() * (s - lo) / w - T::one();
        let q = T::one() - v * v;
        let b = (T::one() - q.recip()).exp();
        let db_dv = b * (-T::two() * v / (q * q));
        (self.height * b, self.height * db_dv * T::two() / w)
    }

    pub fn value(&self, s: T) -> T {
        if s >= T::one() - self.eps {
            return self.bump(s).0;
        }
        let (start, width) = self.climb_window();
        self.lambda * smooth_step((s - start) / width)
    }

    pub fn deriv(&self, s: T) -> T {
        if s >= T::one() - self.eps {
            return self.bump(s).1;
        }
        let (start, width) = self.climb_window();
        self.lambda * smooth_step_deriv((s - start) / width) / width
    }

    pub fn deriv2(&self, s: T) -> T {
        let h = T::of(1e-6);
        (self.deriv(s + h) - self.deriv(s - h)) / (T::two() * h)
    }
}

/// A radial profile in closed form, possibly shifted by whole turns.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile<T> {
    /// `πρ(1 − s)`.
    Rotation(T),
    Poly(RadialPoly<T>),
    Staircase(Staircase<T>),
    /// `inner(s) − πk(1 − s)`.
    Shifted(Box<RadialProfile<T>>, i64),
}

impl<T: Scalar> RadialProfile<T> {
    pub fn value(&self, s: T) -> T {
        match self {
            Self::Rotation(rho) => T::PI() * *rho * (T::one() - s),
            Self::Poly(p) => p.value(s),
            Self::Staircase(st) => st.value(s),
            Self::Shifted(inner, k) => inner.value(s) - T::PI() * T::of(*k as f64) * (T::one() - s),
        }
    }

    pub fn deriv(&self, s: T) -> T {
        match self {
            Self::Rotation(rho) => -T::PI() * *rho,
            Self::Poly(p) => p.deriv(s),
            Self::Staircase(st) => st.deriv(s),
            Self::Shifted(inner, k) => inner.deriv(s) + T::PI() * T::of(*k as f64),
        }
    }

    pub fn deriv2(&self, s: T) -> T {
        match self {
            Self::Rotation(_) => T::zero(),
            Self::Poly(p) => p.deriv2(s),
            Self::Staircase(st) => st.deriv2(s),
            Self::Shifted(inner, _) => inner.deriv2(s),
        }
    }

    /// Tangent-line intercept `g(s) − s g'(s)`.
    pub fn intercept(&self, s: T) -> T {
        self.value(s) - s * self.deriv(s)
    }

    /// True when `g'` is constant (affine profile).
    pub fn is_affine(&self) -> bool {
        match self {
            Self::Rotation(_) => true,
            Self::Poly(p) => p.coeffs().len() <= 2,
            Self::Staircase(_) => false,
            Self::Shifted(inner, _) => inner.is_affine(),
        }
    }
}

/// One perturbation mode
/// `amplitude · (1 − s) · s^radial_power · Re(e^{i(2π m t + phase)} (x + iy)^n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FourierMode<T> {
    pub amplitude: T,
    #[serde(default)]
    pub time_freq: i32,
    #[serde(default)]
    pub angular_freq: u32,
    #[serde(default)]
    pub phase: T,
    #[serde(default)]
    pub radial_power: u32,
}

impl<T: Scalar> FourierMode<T> {
    /// Value and gradient at `(x, y)`, time `t`.
    pub fn eval_grad(&self, t: T, x: T, y: T) -> (T, T, T) {
        let s = x * x + y * y;
        let p = self.radial_power as i32;
        let sp = s.powi(p);
        let env = (T::one() - s) * sp;
        let denv = if p == 0 {
            -T::one()
        } else {
            T::of(f64::from(p)) * s.powi(p - 1) * (T::one() - s) - sp
        };
        let alpha = T::TAU() * T::of(f64::from(self.time_freq)) * t + self.phase;
        let (ca, sa) = (alpha.cos(), alpha.sin());
        // w^n and n w^(n-1) for w = x + iy
        let n = self.angular_freq;
        let (mut wr, mut wi) = (T::one(), T::zero());
        let (mut dr, mut di) = (T::zero(), T::zero());
        for k in 0..n {
            if k + 1 == n {
                let nf = T::of(f64::from(n));
                dr = nf * wr;
                di = nf * wi;
            }
            let (nr, ni) = (wr * x - wi * y, wr * y + wi * x);
            wr = nr;
            wi = ni;
        }
        // Re(c w^n) with c = e^{i alpha}
        let ang = ca * wr - sa * wi;
        // Re(c n w^{n-1}) and Re(i c n w^{n-1}) = -Im(c n w^{n-1})
        let dre = ca * dr - sa * di;
        let dim = ca * di + sa * dr;
        let value = self.amplitude * env * ang;
        let gx = self.amplitude * (T::two() * x * denv * ang + env * dre);
        let gy = self.amplitude * (T::two() * y * denv * ang - env * dim);
        (value, gx, gy)
    }
}
