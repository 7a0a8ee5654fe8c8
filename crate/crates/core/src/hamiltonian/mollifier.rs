//! Collar profiles used to cut a boundary-vanishing Hamiltonian off outside
//! the unit disc.
//!
//! The base profile is `rho(r) = r * step(r)` where `step` is the standard
//! `C^∞` transition from 1 (at `r ≤ 0`) to 0 (at `r ≥ 1`). The refined profile
//! for index `n` has its derivative confined to `[-1/n, 1]`; it is defined by
//! its derivative and tabulated once by Gauss–Legendre accumulation.

use std::sync::{Arc, OnceLock};

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[inline]
fn psi<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        (-x.recip()).exp()
    }
}

/// Smooth step: 1 for `x ≤ 0`, 0 for `x ≥ 1`, all derivatives vanish at both ends.
#[inline]
pub fn smooth_step<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x >= T::one() {
        return T::zero();
    }
    let a = psi(T::one() - x);
    let b = psi(x);
    a / (a + b)
}

#[inline]
pub fn smooth_step_deriv<T: Scalar>(x: T) -> T {
    if x <= T::zero() || x >= T::one() {
        return T::zero();
    }
    let u = T::one() - x;
    let a = psi(u);
    let b = psi(x);
    let da = -a / (u * u);
    let db = b / (x * x);
    let denom = a + b;
    (da * b - a * db) / (denom * denom)
}

/// Base collar profile `rho(r) = r * step(r)`.
#[inline]
pub fn base_rho<T: Scalar>(r: T) -> T {
    if r <= T::zero() {
        r
    } else if r >= T::one() {
        T::zero()
    } else {
        r * smooth_step(r)
    }
}

#[inline]
pub fn base_rho_deriv<T: Scalar>(r: T) -> T {
    if r <= T::zero() {
        T::one()
    } else if r >= T::one() {
        T::zero()
    } else {
        smooth_step(r) + r * smooth_step_deriv(r)
    }
}

/// Refined profile `rho~_n` on `[0, 1]`, with `1 ≥ rho~_n' ≥ -1/n`.
///
/// Derivative: `d(u) = (-c + (1 + c) step(u/a)) * step((u - b)/(1 - b))` with
/// `c = min(1/n, 1/4)`, `b = 1/2` and `a = c(1 + b)/(1 + c)`, which makes
/// `∫₀¹ d = 0`.
#[derive(Debug, Clone)]
pub struct RefinedProfile<T> {
    n: u32,
    c: T,
    a: T,
    b: T,
    knots: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

const TRANSITION_CELLS: usize = 1024;
const TAIL_CELLS: usize = 3072;

impl<T: Scalar> RefinedProfile<T> {
    pub fn new(n: u32) -> Self {
        let c = (T::one() / T::of(f64::from(n.max(1)))).min(T::of(0.25));
        let b = T::half();
        let a = c * (T::one() + b) / (T::one() + c);
        let mut profile = Self {
            n,
            c,
            a,
            b,
            knots: Vec::new(),
            values: Vec::new(),
            slopes: Vec::new(),
        };
        profile.tabulate();
        profile
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Lower bound `-c` of the derivative.
    pub fn min_slope(&self) -> T {
        -self.c
    }

    /// Exact derivative of the profile.
    pub fn deriv(&self, u: T) -> T {
        if u <= T::zero() {
            return T::one();
        }
        if u >= T::one() {
            return T::zero();
        }
        let rise = -self.c + (T::one() + self.c) * smooth_step(u / self.a);
        rise * smooth_step((u - self.b) / (T::one() - self.b))
    }

    fn tabulate(&mut self) {
        let two_a = T::two() * self.a;
        let mut knots = Vec::with_capacity(TRANSITION_CELLS + TAIL_CELLS + 1);
        for i in 0..=TRANSITION_CELLS {
            knots.push(two_a * T::of_usize(i) / T::of_usize(TRANSITION_CELLS));
        }
        for i in 1..=TAIL_CELLS {
            knots.push(two_a + (T::one() - two_a) * T::of_usize(i) / T::of_usize(TAIL_CELLS));
        }
        let rule = GaussLegendre::new(std::num::NonZeroUsize::new(10).expect("nonzero"));
        let nodes: Vec<(T, T)> = rule.iter().map(|(x, w)| (T::of(*x), T::of(*w))).collect();
        let mut values = Vec::with_capacity(knots.len());
        let mut acc = T::zero();
        values.push(acc);
        for w in knots.windows(2) {
            let half = T::half() * (w[1] - w[0]);
            let mid = T::half() * (w[1] + w[0]);
            let cell = nodes.iter().fold(T::zero(), |s, (x, wt)| {
                s + *wt * self.deriv(mid + half * *x)
            });
            acc = acc + half * cell;
            values.push(acc);
        }
        // Remove the quadrature residual at u = 1 so the profile closes exactly.
        let residual = *values.last().expect("non-empty table");
        for (v, k) in values.iter_mut().zip(knots.iter()) {
            *v = *v - residual * *k;
        }
        self.slopes = knots.iter().map(|&u| self.deriv(u)).collect();
        self.knots = knots;
        self.values = values;
    }

    fn cell(&self, u: T) -> usize {
        let two_a = T::two() * self.a;
        let idx = if u < two_a {
            (u / two_a * T::of_usize(TRANSITION_CELLS))
                .floor()
                .to_usize()
                .unwrap_or(0)
        } else {
            TRANSITION_CELLS
                + ((u - two_a) / (T::one() - two_a) * T::of_usize(TAIL_CELLS))
                    .floor()
                    .to_usize()
                    .unwrap_or(0)
        };
        idx.min(self.knots.len() - 2)
    }

    /// Profile value by cubic Hermite interpolation of the table.
    pub fn value(&self, u: T) -> T {
        if u <= T::zero() {
            return u;
        }
        if u >= T::one() {
            return T::zero();
        }
        let i = self.cell(u);
        let (u0, u1) = (self.knots[i], self.knots[i + 1]);
        let h = u1 - u0;
        let t = (u - u0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::two();
        let three = T::of(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        (h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1])
            .max(T::zero())
    }
}

/// Collar profile selector stored in a mollified Hamiltonian.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MollifierProfile<T> {
    #[serde(default)]
    pub refined: bool,
    #[serde(skip)]
    table: Arc<OnceLock<RefinedProfile<T>>>,
}

impl<T: Scalar> MollifierProfile<T> {
    pub fn base() -> Self {
        Self {
            refined: false,
            table: Arc::default(),
        }
    }

    pub fn refined() -> Self {
        Self {
            refined: true,
            table: Arc::default(),
        }
    }

    fn table(&self, n: u32) -> &RefinedProfile<T> {
        let t = self.table.get_or_init(|| RefinedProfile::new(n));
        debug_assert_eq!(t.n(), n, "profile table built for a different index");
        t
    }

    /// `rho_n(r)` and `rho_n'(r)` for the collar offset `r = |z| - 1`.
    pub fn rho_n(&self, n: u32, r: T) -> (T, T) {
        let nf = T::of(f64::from(n));
        let u = nf * r;
        if self.refined {
            let t = self.table(n);
            (t.value(u) / nf, t.deriv(u))
        } else {
            (base_rho(u) / nf, base_rho_deriv(u))
        }
    }

    /// Profile in the unscaled variable (`rho` or `rho~_n`) and its derivative.
    pub fn unscaled(&self, n: u32, u: T) -> (T, T) {
        if self.refined {
            let t = self.table(n);
            (t.value(u), t.deriv(u))
        } else {
            (base_rho(u), base_rho_deriv(u))
        }
    }
}
