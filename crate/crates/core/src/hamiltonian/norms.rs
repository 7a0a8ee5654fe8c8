//! Hofer norms and collar gradient bounds.

use serde::{Deserialize, Serialize};

use super::{HamiltonianError, HamiltonianSpec};
use crate::geometry::PlanePoint;
use crate::scalar::Scalar;

/// Region over which the spatial oscillation is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoferRegion {
    Disc,
    /// Disc plus whatever collar the spec is supported in.
    Plane,
    /// `1 ≤ |z| ≤ 1 + 1/n`.
    Annulus(u32),
}

const TIME_SAMPLES: usize = 64;
const RADIAL_SAMPLES: usize = 4097;
const GRID_RADIAL: usize = 160;
const GRID_ANGULAR: usize = 256;

fn time_nodes<T: Scalar>(h: &HamiltonianSpec<T>) -> Vec<T> {
    if h.is_autonomous() {
        vec![T::zero()]
    } else {
        (0..TIME_SAMPLES)
            .map(|j| (T::of_usize(j) + T::half()) / T::of_usize(TIME_SAMPLES))
            .collect()
    }
}

/// Golden-section refinement of an extremum of `f` bracketed by `[a, b]`.
fn refine_1d<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, maximize: bool) -> T {
    let sign = if maximize { -T::one() } else { T::one() };
    let g = |x: T| sign * f(x);
    let ratio = T::of(0.618_033_988_749_894_8);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..80 {
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    f(T::half() * (a + b))
}

fn radial_extrema<T: Scalar>(g: impl Fn(T) -> T + Copy, lo: T, hi: T) -> (T, T) {
    let n = RADIAL_SAMPLES;
    let xs: Vec<T> = (0..n)
        .map(|i| lo + (hi - lo) * T::of_usize(i) / T::of_usize(n - 1))
        .collect();
    let vals: Vec<T> = xs.iter().map(|&x| g(x)).collect();
    let pick = |maximize: bool| {
        let mut best = 0;
        for i in 1..n {
            let better = if maximize {
                vals[i] > vals[best]
            } else {
                vals[i] < vals[best]
            };
            if better {
                best = i;
            }
        }
        let a = xs[best.saturating_sub(1)];
        let b = xs[(best + 1).min(n - 1)];
        let refined = refine_1d(g, a, b, maximize);
        if maximize {
            refined.max(vals[best])
        } else {
            refined.min(vals[best])
        }
    };
    (pick(true), pick(false))
}

fn planar_extrema<T: Scalar>(f: impl Fn(PlanePoint<T>) -> T, r_lo: T, r_hi: T) -> (T, T) {
    let mut best_max = (T::neg_infinity(), PlanePoint::origin());
    let mut best_min = (T::infinity(), PlanePoint::origin());
    let mut visit = |z: PlanePoint<T>| {
        let v = f(z);
        if v > best_max.0 {
            best_max = (v, z);
        }
        if v < best_min.0 {
            best_min = (v, z);
        }
    };
    for i in 0..=GRID_RADIAL {
        let r = r_lo + (r_hi - r_lo) * T::of_usize(i) / T::of_usize(GRID_RADIAL);
        let count = if r.is_zero() { 1 } else { GRID_ANGULAR };
        for j in 0..count {
            let th = T::TAU() * T::of_usize(j) / T::of_usize(GRID_ANGULAR);
            visit(PlanePoint::from_polar(r, th));
        }
    }
    // local pattern search from the best grid points, kept inside the region
    let inside = |z: PlanePoint<T>| {
        let r = z.norm();
        r >= r_lo && r <= r_hi
    };
    let polish = |start: (T, PlanePoint<T>), maximize: bool| {
        let better = |a: T, b: T| if maximize { a > b } else { a < b };
        let (mut v, mut z) = start;
        let mut step = (r_hi - r_lo) / T::of_usize(GRID_RADIAL);
        while step > T::of(1e-10) {
            let mut moved = false;
            for d in [
                PlanePoint::new(step, T::zero()),
                PlanePoint::new(-step, T::zero()),
                PlanePoint::new(T::zero(), step),
                PlanePoint::new(T::zero(), -step),
            ] {
                let cand = z + d;
                if inside(cand) {
                    let w = f(cand);
                    if better(w, v) {
                        v = w;
                        z = cand;
                        moved = true;
                    }
                }
            }
            if !moved {
                step = step * T::half();
            }
        }
        v
    };
    (polish(best_max, true), polish(best_min, false))
}

fn region_radii<T: Scalar>(h: &HamiltonianSpec<T>, region: HoferRegion) -> (T, T) {
    match region {
        HoferRegion::Disc => (T::zero(), T::one()),
        HoferRegion::Annulus(n) => (T::one(), T::one() + T::one() / T::of(f64::from(n.max(1)))),
        HoferRegion::Plane => match h {
            HamiltonianSpec::Mollified { n, .. } => {
                (T::zero(), T::one() + T::one() / T::of(f64::from(*n)))
            }
            _ => (T::zero(), T::one()),
        },
    }
}

/// `∫₀¹ (max_E H(t,·) − min_E H(t,·)) dt`.
///
/// Radial profiles on the disc use a dense 1-D scan in `s`; everything else a
/// polar grid followed by pattern-search polishing of the extrema.
pub fn hofer_norm<T: Scalar>(h: &HamiltonianSpec<T>, region: HoferRegion) -> T {
    let (r_lo, r_hi) = region_radii(h, region);
    let times = time_nodes(h);
    let profile = h.radial_profile().filter(|_| r_hi <= T::one());
    let mut total = T::zero();
    for &t in &times {
        let (max, min) = match &profile {
            Some(p) => radial_extrema(|s| p.value(s), r_lo * r_lo, r_hi * r_hi),
            None => planar_extrema(|z| h.eval(t, z), r_lo, r_hi),
        };
        total = total + (max - min);
    }
    total / T::of_usize(times.len())
}

/// Sampled `sup |∇H_n|` over the collar `1 ≤ |z| ≤ 1 + 1/n`.
///
/// The grid is doubled until the estimate moves by less than 1%.
pub fn grad_bound_outside_disc<T: Scalar>(h: &HamiltonianSpec<T>) -> Result<T, HamiltonianError> {
    let n = match h {
        HamiltonianSpec::Mollified { n, .. } => *n,
        _ => return Err(HamiltonianError::NotMollified),
    };
    let width = T::one() / T::of(f64::from(n));
    let times: Vec<T> = if h.is_autonomous() {
        vec![T::zero()]
    } else {
        (0..8).map(|j| T::of_usize(j) / T::of(8.0)).collect()
    };
    let sample = |m: usize| {
        let mut sup = T::zero();
        for &t in &times {
            for i in 0..=m {
                let r = T::one() + width * T::of_usize(i) / T::of_usize(m);
                for j in 0..(4 * m) {
                    let th = T::TAU() * T::of_usize(j) / T::of_usize(4 * m);
                    sup = sup.max(h.gradient(t, PlanePoint::from_polar(r, th)).norm());
                }
            }
        }
        sup
    };
    let mut m = 32;
    let mut prev = sample(m);
    while m < 1024 {
        m *= 2;
        let next = sample(m);
        let settled = (next - prev).abs() <= T::of(0.01) * next.abs().max(T::min_positive_value());
        prev = next;
        if settled {
            break;
        }
    }
    Ok(prev)
}
