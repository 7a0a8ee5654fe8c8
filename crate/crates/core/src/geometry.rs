//! Planar primitives: points, the Liouville form, sampled loops, winding
//! numbers, lengths and signed areas.
//!
//! The squared radius `s = x² + y²` is the radial coordinate used throughout
//! the crate; [`PlanePoint::s`] and [`PlanePoint::from_polar_s`] are the only
//! conversions.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("sample {index} lies on the winding centre")]
    CenterOnLoop { index: usize },
    #[error("angular jump of {jump} rad at sample {index} exceeds pi/2; refine the sampling")]
    AngularJump { index: usize, jump: f64 },
    #[error("sample {index} at radius {radius} lies outside the annulus")]
    OutsideAnnulus { index: usize, radius: f64 },
    #[error("a loop needs at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("samples {index} and {next} coincide on a non-constant loop")]
    RepeatedSample { index: usize, next: usize },
    #[error("non-finite coordinate at sample {0}")]
    NonFinite(usize),
}

/// A point (or tangent vector) of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PlanePoint<T> {
    pub x: T,
    pub y: T,
}

/// Tangent vectors share the point representation.
pub type TangentVector<T> = PlanePoint<T>;

impl<T: Scalar> PlanePoint<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Point with squared radius `s` and angle `theta`.
    #[inline]
    pub fn from_polar_s(s: T, theta: T) -> Self {
        let r = s.max(T::zero()).sqrt();
        Self::new(r * theta.cos(), r * theta.sin())
    }

    #[inline]
    pub fn from_polar(r: T, theta: T) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    /// Squared radius.
    #[inline]
    pub fn s(self) -> T {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// `self.x * other.y - self.y * other.x`.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn dist(self, other: Self) -> T {
        (self - other).norm()
    }

    /// Rotation by `angle` about the origin.
    #[inline]
    pub fn rotated(self, angle: T) -> Self {
        let (sn, cs) = angle.sin_cos();
        Self::new(cs * self.x - sn * self.y, sn * self.x + cs * self.y)
    }

    /// Quarter turn counter-clockwise, `(x, y) -> (-y, x)`.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> PlanePoint<U> {
        PlanePoint::new(U::of(self.x.to_f64_lossy()), U::of(self.y.to_f64_lossy()))
    }
}

impl<T: Scalar> Add for PlanePoint<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> AddAssign for PlanePoint<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x = self.x + rhs.x;
        self.y = self.y + rhs.y;
    }
}

impl<T: Scalar> Sub for PlanePoint<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Neg for PlanePoint<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar> Mul<T> for PlanePoint<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

/// The Liouville form `½(x dy − y dx)` at `p` applied to `v`.
#[inline]
pub fn liouville_pairing<T: Scalar>(p: PlanePoint<T>, v: TangentVector<T>) -> T {
    T::half() * p.cross(v)
}

/// A closed loop sampled on a uniform grid of `[0, 1)`; the last sample
/// connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LoopSample<T> {
    points: Vec<PlanePoint<T>>,
}

impl<T: Scalar> LoopSample<T> {
    pub const MIN_SAMPLES: usize = 8;

    pub fn new(points: Vec<PlanePoint<T>>) -> Result<Self, GeometryError> {
        let n = points.len();
        if n < Self::MIN_SAMPLES {
            return Err(GeometryError::TooFewSamples(n));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        let constant = points.iter().all(|p| *p == points[0]);
        if !constant {
            for i in 0..n {
                let j = (i + 1) % n;
                if points[i] == points[j] {
                    return Err(GeometryError::RepeatedSample { index: i, next: j });
                }
            }
        }
        Ok(Self { points })
    }

    /// Samples `curve(t)` at `t = i / n` for `i < n`.
    pub fn from_fn(n: usize, curve: impl Fn(T) -> PlanePoint<T>) -> Result<Self, GeometryError> {
        let nt = T::of_usize(n);
        Self::new((0..n).map(|i| curve(T::of_usize(i) / nt)).collect())
    }

    pub fn constant(p: PlanePoint<T>, n: usize) -> Result<Self, GeometryError> {
        Self::new(vec![p; n])
    }

    pub fn points(&self) -> &[PlanePoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same loop traversed backwards (starting point kept).
    pub fn reversed(&self) -> Self {
        let mut points = Vec::with_capacity(self.points.len());
        points.push(self.points[0]);
        points.extend(self.points[1..].iter().rev().copied());
        Self { points }
    }

    fn segments(&self) -> impl Iterator<Item = (PlanePoint<T>, PlanePoint<T>)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }
}

/// Polygonal length of the closed loop.
pub fn loop_length<T: Scalar>(sample: &LoopSample<T>) -> T {
    sample
        .segments()
        .fold(T::zero(), |acc, (a, b)| acc + a.dist(b))
}

/// Lifted angle change of an open path about `center`, in turns.
///
/// Each step's angular increment is taken from `atan2`; increments larger
/// than `pi/2` are rejected because the lift would be ambiguous.
pub fn path_winding<T: Scalar>(
    points: &[PlanePoint<T>],
    center: PlanePoint<T>,
) -> Result<T, GeometryError> {
    let hit = T::of(tolerances::CENTER_HIT);
    let quarter = T::FRAC_PI_2();
    let mut total = T::zero();
    for (i, p) in points.iter().enumerate() {
        if (*p - center).norm() <= hit {
            return Err(GeometryError::CenterOnLoop { index: i });
        }
    }
    for (i, w) in points.windows(2).enumerate() {
        let a = w[0] - center;
        let b = w[1] - center;
        let step = a.cross(b).atan2(a.dot(b));
        if step.abs() > quarter {
            return Err(GeometryError::AngularJump {
                index: i + 1,
                jump: step.to_f64_lossy(),
            });
        }
        total = total + step;
    }
    Ok(total / T::TAU())
}

/// Winding number of the closed loop about `center`.
pub fn winding_number<T: Scalar>(
    sample: &LoopSample<T>,
    center: PlanePoint<T>,
) -> Result<T, GeometryError> {
    let pts = sample.points();
    let mut closed = Vec::with_capacity(pts.len() + 1);
    closed.extend_from_slice(pts);
    closed.push(pts[0]);
    path_winding(&closed, center)
}

/// Signed enclosed area by the shoelace rule.
pub fn enclosed_area<T: Scalar>(sample: &LoopSample<T>) -> T {
    shoelace(sample.points(), 1)
}

fn shoelace<T: Scalar>(points: &[PlanePoint<T>], stride: usize) -> T {
    let n = points.len();
    let mut acc = T::zero();
    let mut i = 0;
    while i < n {
        let j = (i + stride) % n;
        acc = acc + points[i].cross(points[j]);
        i += stride;
    }
    T::half() * acc
}

/// Shoelace area with one Richardson step (full vs. every-other sample).
///
/// For a smooth loop sampled uniformly in time the inscribed polygon's area
/// error is `O(h²)`; the extrapolation removes the leading term. Falls back to
/// plain shoelace for odd sample counts.
pub fn enclosed_area_extrapolated<T: Scalar>(sample: &LoopSample<T>) -> T {
    polygon_area_extrapolated(sample.points())
}

/// [`enclosed_area_extrapolated`] on raw closed-polygon vertices, without the
/// sampling checks of [`LoopSample`].
pub fn polygon_area_extrapolated<T: Scalar>(pts: &[PlanePoint<T>]) -> T {
    if !pts.len().is_multiple_of(2) {
        return shoelace(pts, 1);
    }
    let fine = shoelace(pts, 1);
    let coarse = shoelace(pts, 2);
    (T::of(4.0) * fine - coarse) / T::of(3.0)
}

/// Both sides of the degree–length inequality for a loop in the collar
/// `1 ≤ |z| ≤ 1 + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DegreeLengthCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub degree: i64,
    /// Slack granted for polygonal sampling.
    pub tolerance: T,
    pub holds: bool,
}

pub fn degree_length_check<T: Scalar>(
    sample: &LoopSample<T>,
    delta: T,
) -> Result<DegreeLengthCheck<T>, GeometryError> {
    let slack = T::of(tolerances::ANNULUS_SLACK);
    for (i, p) in sample.points().iter().enumerate() {
        let r = p.norm();
        if r < T::one() - slack || r > T::one() + delta + slack {
            return Err(GeometryError::OutsideAnnulus {
                index: i,
                radius: r.to_f64_lossy(),
            });
        }
    }
    let winding = winding_number(sample, PlanePoint::origin())?;
    let degree = winding.round();
    let area = enclosed_area(sample);
    let lhs = (area - T::PI() * degree).abs();
    let rhs = loop_length(sample) * delta;
    let discretization = sample
        .segments()
        .fold(T::zero(), |acc, (a, b)| acc + a.dist(b).powi(3));
    let tolerance = T::of(1e-6) + discretization;
    Ok(DegreeLengthCheck {
        lhs,
        rhs,
        degree: degree.to_i64().unwrap_or(0),
        tolerance,
        holds: lhs <= rhs + tolerance,
    })
}
