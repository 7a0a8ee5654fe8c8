//! Closed-form spectral data for radial autonomous Hamiltonians `H = g(|z|²)`.
//!
//! With `θ' = −2g'(s)`, the circle `|z|² = s` consists of 1-periodic points
//! exactly when `g'(s) = −πk` for an integer `k`, and its action is the
//! tangent-line intercept `g(s) − s g'(s)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{action_of_loop, ActionError};
use crate::flow::integrate_orbit;
use crate::geometry::PlanePoint;
use crate::hamiltonian::{
    precompose_rotation, HamiltonianError, HamiltonianSpec, RadialProfile, Staircase,
};
use crate::tolerances::{GAP_SLACK, LEVEL_RESIDUAL, MEMBERSHIP_SLACK, ROOT_BISECTION};

type Profile = RadialProfile<f64>;
type Spec = HamiltonianSpec<f64>;

const GRID: usize = 10_000;
const MAX_SIGN_CHANGES: usize = GRID / 2;
const ZERO_SLOPE: f64 = 1e-13;
const EDGE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("g' - slope changes sign in {0} of {GRID} grid cells; profile is under-resolved")]
    RootIsolationFailure(usize),
    #[error("level residual {0:e} exceeds tolerance after polishing")]
    UnresolvedLevel(f64),
    #[error(transparent)]
    Shape(#[from] HamiltonianError),
    #[error("neither profile has a closed-form value of c+; ordering not decidable")]
    IndeterminateCase,
    #[error("first profile is not pointwise >= the second (defect {0:e})")]
    NotOrdered(f64),
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// Solutions of `f(s) = 0` on `[0, 1]`: isolated roots and intervals where
/// `f` vanishes identically on consecutive grid points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootSet {
    pub roots: Vec<f64>,
    pub plateaus: Vec<(f64, f64)>,
}

/// Grid scan, bisection to [`ROOT_BISECTION`] and a guarded Newton polish.
pub fn isolate_roots(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> Result<RootSet, RadialError> {
    let xs: Vec<f64> = (0..=GRID).map(|i| i as f64 / GRID as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let is_zero = |v: f64| v.abs() <= ZERO_SLOPE;
    let changes = vals
        .windows(2)
        .filter(|w| !is_zero(w[0]) && !is_zero(w[1]) && w[0].signum() != w[1].signum())
        .count();
    if changes > MAX_SIGN_CHANGES {
        return Err(RadialError::RootIsolationFailure(changes));
    }
    let mut out = RootSet::default();
    let mut i = 0;
    while i <= GRID {
        if is_zero(vals[i]) {
            let start = i;
            while i < GRID && is_zero(vals[i + 1]) {
                i += 1;
            }
            if i > start {
                out.plateaus.push((xs[start], xs[i]));
            } else {
                out.roots.push(xs[i]);
            }
        } else if i < GRID && !is_zero(vals[i + 1]) && vals[i].signum() != vals[i + 1].signum() {
            out.roots
                .push(bisect_polish(&f, &df, xs[i], xs[i + 1], vals[i]));
        }
        i += 1;
    }
    Ok(out)
}

fn bisect_polish(
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    fa: f64,
) -> f64 {
    let sa = fa.signum();
    while b - a > ROOT_BISECTION {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f(x) / d;
        if next < a - ROOT_BISECTION || next > b + ROOT_BISECTION || f(next).abs() >= f(x).abs() {
            break;
        }
        x = next;
    }
    x
}

/// All `s ∈ [0, 1]` with `g'(s) = slope`.
pub fn solve_slope(g: &Profile, slope: f64) -> Result<RootSet, RadialError> {
    if g.is_affine() {
        let mut out = RootSet::default();
        if (g.deriv(0.5) - slope).abs() <= ZERO_SLOPE {
            out.plateaus.push((0.0, 1.0));
        }
        return Ok(out);
    }
    isolate_roots(|s| g.deriv(s) - slope, |s| g.deriv2(s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentLevel {
    pub s: f64,
    /// `g'(s) = −πk`.
    pub k: i64,
    pub value: f64,
    /// Interval of `s` on which `g'` is constant, when the level is not isolated.
    pub plateau: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSpectrum {
    pub levels: Vec<TangentLevel>,
    pub origin_value: f64,
    /// `πk` for each `k` with `g'(1) = −πk`.
    pub boundary_values: Vec<f64>,
}

impl TangentSpectrum {
    /// Every value (levels, origin, boundary), sorted ascending.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.levels.iter().map(|l| l.value).collect();
        v.push(self.origin_value);
        v.extend(&self.boundary_values);
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Tangent-line spectrum for slope indices `|k| ≤ slope_range`.
pub fn tangent_spectrum(g: &Profile, slope_range: i64) -> Result<TangentSpectrum, RadialError> {
    let mut levels = Vec::new();
    let mut boundary_values = Vec::new();
    for k in -slope_range..=slope_range {
        let slope = -PI * k as f64;
        if (g.deriv(1.0) - slope).abs() <= LEVEL_RESIDUAL {
            boundary_values.push(g.intercept(1.0));
        }
        let set = solve_slope(g, slope)?;
        for s in set.roots {
            if !(EDGE..=1.0 - EDGE).contains(&s) {
                continue;
            }
            let residual = (g.deriv(s) - slope).abs();
            if residual > LEVEL_RESIDUAL {
                return Err(RadialError::UnresolvedLevel(residual));
            }
            levels.push(TangentLevel {
                s,
                k,
                value: g.intercept(s),
                plateau: None,
            });
        }
        for (lo, hi) in set.plateaus {
            let s = 0.5 * (lo + hi);
            levels.push(TangentLevel {
                s,
                k,
                value: g.intercept(s),
                plateau: Some((lo, hi)),
            });
        }
    }
    levels.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.s.total_cmp(&b.s)));
    Ok(TangentSpectrum {
        levels,
        origin_value: g.value(0.0),
        boundary_values,
    })
}

/// Smallest slope index range covering every tangent of `g`.
pub fn covering_slope_range(g: &Profile) -> i64 {
    let max = (0..=GRID)
        .map(|i| g.deriv(i as f64 / GRID as f64).abs())
        .fold(0.0, f64::max);
    (max / PI).ceil() as i64 + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub nonneg_values: Vec<f64>,
    pub min_positive: Option<f64>,
    pub height: f64,
    pub slope_range: i64,
    pub gap_holds: bool,
}

/// Checks that the non-negative tangent spectrum of the staircase lies in `{0} ∪ [M, ∞)`.
pub fn staircase_gap_certificate(
    lambda: f64,
    eps: f64,
    height: f64,
) -> Result<GapCertificate, RadialError> {
    let g = Profile::Staircase(Staircase::new(lambda, eps, height)?);
    let slope_range = covering_slope_range(&g);
    let spec = tangent_spectrum(&g, slope_range)?;
    let nonneg_values: Vec<f64> = spec.values().into_iter().filter(|&v| v >= -EDGE).collect();
    let positive: Vec<f64> = nonneg_values
        .iter()
        .copied()
        .filter(|&v| v > GAP_SLACK)
        .collect();
    let min_positive = positive.iter().copied().reduce(f64::min);
    let gap_holds = positive.iter().all(|&v| v >= height - GAP_SLACK);
    Ok(GapCertificate {
        nonneg_values,
        min_positive,
        height,
        slope_range,
        gap_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationInvariants {
    pub rho: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// Constraints applied, in order, with the candidates left after each.
    pub derivation: Vec<String>,
}

fn fmt_set(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.6}", x)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= MEMBERSHIP_SLACK);
    v
}

/// `c±` of the rotation by `2πρ`, derived by eliminating candidates.
///
/// Starting sets are `(spec ∪ {0, ±A}) ∩ [0, A]` resp. `[−A, 0]` with
/// `spec = {πρ}` and `A = π`; the windowed membership clauses, the sign
/// clause and `c₊ − c₋ ≤ A` then cut both sets down to one value each.
pub fn rotation_spectral_invariants(rho: f64) -> RotationInvariants {
    let a = PI;
    let spec = PI * rho;
    let tol = MEMBERSHIP_SLACK;
    let mut plus = dedup(
        [spec, 0.0, a]
            .into_iter()
            .filter(|v| (-tol..=a + tol).contains(v))
            .collect(),
    );
    let mut minus = dedup(
        [spec, 0.0, -a]
            .into_iter()
            .filter(|v| (-a - tol..=tol).contains(v))
            .collect(),
    );
    let mut log = vec![format!(
        "start: c+ in {}, c- in {}",
        fmt_set(&plus),
        fmt_set(&minus)
    )];
    let is_spec = |v: f64| (v - spec).abs() <= tol;
    let is_zero = |v: f64| v.abs() <= tol;
    loop {
        let before = (plus.len(), minus.len());
        if (0.0..=1.0).contains(&rho) {
            plus.retain(|&v| is_spec(v));
            log.push(format!("0 <= rho <= 1: c+ in spec -> {}", fmt_set(&plus)));
        } else if rho > -1.0 && rho <= 1.0 {
            plus.retain(|&v| is_spec(v) || is_zero(v));
            log.push(format!(
                "-1 < rho <= 1: c+ in spec or 0 -> {}",
                fmt_set(&plus)
            ));
        }
        if (-1.0..=0.0).contains(&rho) {
            minus.retain(|&v| is_spec(v));
            log.push(format!("-1 <= rho <= 0: c- in spec -> {}", fmt_set(&minus)));
        } else if (-1.0..1.0).contains(&rho) {
            minus.retain(|&v| is_spec(v) || is_zero(v));
            log.push(format!(
                "-1 <= rho < 1: c- in spec or 0 -> {}",
                fmt_set(&minus)
            ));
        }
        if rho > 0.0 {
            plus.retain(|&v| v > tol);
            log.push(format!("rho > 0: c+ > 0 -> {}", fmt_set(&plus)));
        }
        if rho < 0.0 {
            minus.retain(|&v| v < -tol);
            log.push(format!("rho < 0: c- < 0 -> {}", fmt_set(&minus)));
        }
        let max_minus = minus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_plus = plus.iter().copied().fold(f64::INFINITY, f64::min);
        plus.retain(|&v| v <= a + max_minus + tol);
        minus.retain(|&v| v >= min_plus - a - tol);
        log.push(format!(
            "c+ - c- <= A: c+ in {}, c- in {}",
            fmt_set(&plus),
            fmt_set(&minus)
        ));
        if (plus.len(), minus.len()) == before || (plus.len() <= 1 && minus.len() <= 1) {
            break;
        }
    }
    assert!(
        plus.len() == 1 && minus.len() == 1,
        "candidate elimination left c+ in {}, c- in {} for rho = {rho}",
        fmt_set(&plus),
        fmt_set(&minus)
    );
    RotationInvariants {
        rho,
        c_plus: plus[0],
        c_minus: minus[0],
        derivation: log,
    }
}

/// Closed forms `clamp(πρ, 0, π)` and `clamp(πρ, −π, 0)`.
pub fn rotation_closed_form(rho: f64) -> (f64, f64) {
    ((PI * rho).clamp(0.0, PI), (PI * rho).clamp(-PI, 0.0))
}

/// `c₊(ρ₁ + ρ₂) ≤ c₊(ρ₁) + c₊(ρ₂)` for rotations.
pub fn subadditivity_check_rotations(rho1: f64, rho2: f64) -> bool {
    let c = |r: f64| rotation_spectral_invariants(r).c_plus;
    c(rho1 + rho2) <= c(rho1) + c(rho2) + MEMBERSHIP_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CPlusBound {
    Exact(f64),
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub upper: Option<CPlusBound>,
    pub lower: Option<CPlusBound>,
    /// No contradiction with `c₊(g1) ≥ c₊(g2)`.
    pub consistent: bool,
    /// The ordering itself is established by the bounds.
    pub certified: bool,
    pub basis: String,
}

fn pinned_c_plus(g: &Profile) -> Result<Option<CPlusBound>, RadialError> {
    if g.is_affine() {
        let rho = -g.deriv(0.5) / PI;
        return Ok(Some(CPlusBound::Exact(
            rotation_spectral_invariants(rho).c_plus,
        )));
    }
    if let Profile::Staircase(st) = g {
        let cert = staircase_gap_certificate(st.lambda(), st.eps(), st.height())?;
        if cert.gap_holds {
            return Ok(Some(CPlusBound::AtLeast(st.height())));
        }
    }
    Ok(None)
}

/// Checks `g1 ≥ g2 ⇒ c₊(g1) ≥ c₊(g2)` where closed-form logic pins `c₊`.
pub fn monotonicity_check_radial(
    g1: &Profile,
    g2: &Profile,
) -> Result<MonotonicityReport, RadialError> {
    let samples: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let defect = samples
        .iter()
        .map(|&s| g2.value(s) - g1.value(s))
        .fold(0.0, f64::max);
    if defect > 1e-12 {
        return Err(RadialError::NotOrdered(defect));
    }
    if samples.iter().all(|&s| g1.value(s) == g2.value(s)) {
        return Ok(MonotonicityReport {
            upper: None,
            lower: None,
            consistent: true,
            certified: true,
            basis: "identical profiles".into(),
        });
    }
    let upper = pinned_c_plus(g1)?;
    let lower = pinned_c_plus(g2)?;
    let tol = MEMBERSHIP_SLACK;
    let (consistent, certified, basis) = match (upper, lower) {
        (Some(CPlusBound::Exact(a)), Some(CPlusBound::Exact(b))) => {
            (a >= b - tol, a >= b - tol, "closed form on both sides")
        }
        (Some(CPlusBound::AtLeast(a)), Some(CPlusBound::Exact(b))) if a >= b - tol => {
            (true, true, "gap lower bound above closed form")
        }
        (Some(CPlusBound::Exact(a)), Some(CPlusBound::AtLeast(b))) => {
            (a >= b - tol, false, "closed form against gap lower bound")
        }
        _ => return Err(RadialError::IndeterminateCase),
    };
    Ok(MonotonicityReport {
        upper,
        lower,
        consistent,
        certified,
        basis: basis.into(),
    })
}

/// Hamiltonian with the given radial profile.
pub fn spec_from_profile(g: &Profile) -> Spec {
    match g {
        Profile::Rotation(rho) => Spec::rotation(*rho),
        Profile::Poly(p) => Spec::RadialPoly(p.clone()),
        Profile::Staircase(st) => Spec::RadialStaircase(st.clone()),
        Profile::Shifted(inner, k) => precompose_rotation(&spec_from_profile(inner), *k),
    }
}

/// One row of a tangent-spectrum sweep with its dynamical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub params: String,
    pub s: f64,
    pub k: i64,
    pub value: f64,
    pub oracle_value: f64,
    pub abs_err: f64,
}

/// Action of the integrated circle orbit at level `s` (period one).
pub fn circle_orbit_action(g: &Profile, s: f64, steps: usize) -> Result<f64, RadialError> {
    let h = spec_from_profile(g);
    let trace = integrate_orbit(&h, PlanePoint::from_polar_s(s, 0.0), 1.0, steps)
        .map_err(ActionError::from)?;
    Ok(action_of_loop(&h, &trace)?)
}

/// Tangent levels of `g` paired with the loop action of their circle orbits.
pub fn tangent_sweep(
    family: &str,
    params: &str,
    g: &Profile,
    slope_range: i64,
    steps: usize,
) -> Result<Vec<SweepRow>, RadialError> {
    let spec = tangent_spectrum(g, slope_range)?;
    let mut rows = Vec::with_capacity(spec.levels.len());
    for l in &spec.levels {
        let oracle_value = circle_orbit_action(g, l.s, steps)?;
        rows.push(SweepRow {
            family: family.to_string(),
            params: params.to_string(),
            s: l.s,
            k: l.k,
            value: l.value,
            oracle_value,
            abs_err: (oracle_value - l.value).abs(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::RadialPoly;

    fn bump() -> Profile {
        Profile::Poly(RadialPoly::bump4())
    }

    #[test]
    fn bump_levels() {
        let spec = tangent_spectrum(&bump(), 2).unwrap();
        assert_eq!(spec.origin_value, 0.0);
        assert!(spec.boundary_values.is_empty());
        let want = [
            ((4.0 - PI) / 8.0, -1, 0.046_053_948_273_188),
            (0.5, 0, 1.0),
            ((4.0 + PI) / 8.0, 1, 3.187_646_601_862_981),
        ];
        assert_eq!(spec.levels.len(), 3);
        for (l, (s, k, v)) in spec.levels.iter().zip(want) {
            assert_eq!(l.k, k);
            assert!(
                (l.s - s).abs() < 1e-12 && (l.value - v).abs() < 1e-12,
                "{l:?}"
            );
            assert!((bump().deriv(l.s) + PI * k as f64).abs() <= LEVEL_RESIDUAL);
        }
    }

    #[test]
    fn rotation_and_zero_levels() {
        let r = tangent_spectrum(&Profile::Rotation(0.37), 4).unwrap();
        assert!(r.levels.is_empty());
        assert!((r.origin_value - 0.37 * PI).abs() < 1e-15);
        let whole = tangent_spectrum(&Profile::Rotation(2.0), 4).unwrap();
        assert_eq!(whole.levels.len(), 1);
        assert_eq!(whole.levels[0].plateau, Some((0.0, 1.0)));
        assert!((whole.levels[0].value - 2.0 * PI).abs() < 1e-12);
        assert_eq!(whole.boundary_values.len(), 1);
        let zero = tangent_spectrum(&Profile::Poly(RadialPoly::zero()), 3).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn twist_shifts_slope_index() {
        let shifted = Profile::Shifted(Box::new(bump()), 1);
        let a = tangent_spectrum(&bump(), 3).unwrap();
        let b = tangent_spectrum(&shifted, 4).unwrap();
        for l in &a.levels {
            let m = b
                .levels
                .iter()
                .find(|m| (m.s - l.s).abs() < 1e-10)
                .expect("level kept");
            assert_eq!(m.k, l.k - 1);
        }
    }

    #[test]
    fn root_isolation_rejects_unresolved_profiles() {
        let r = isolate_roots(|s| (1.0e5 * s).sin(), |s| 1.0e5 * (1.0e5 * s).cos());
        assert!(matches!(r, Err(RadialError::RootIsolationFailure(_))));
    }

    #[test]
    fn gap_certificates() {
        let c = staircase_gap_certificate(0.0, 0.1, 0.5).unwrap();
        assert!(c.gap_holds);
        assert!((c.min_positive.unwrap() - 0.5).abs() < 1e-9, "{c:?}");
        assert!(staircase_gap_certificate(-1.0, 0.1, 0.5).unwrap().gap_holds);
        for i in 0..=8 {
            let lambda = -0.25 * i as f64;
            assert!(
                staircase_gap_certificate(lambda, 0.1, 0.5)
                    .unwrap()
                    .gap_holds,
                "lambda {lambda}"
            );
        }
        assert!(matches!(
            staircase_gap_certificate(0.5, 0.1, 0.5),
            Err(RadialError::Shape(HamiltonianError::InvalidShape(_)))
        ));
    }

    #[test]
    fn rotation_invariants_examples() {
        let r = rotation_spectral_invariants(0.5);
        assert_eq!((r.c_plus, r.c_minus), (PI / 2.0, 0.0));
        let r = rotation_spectral_invariants(2.0);
        assert_eq!((r.c_plus, r.c_minus), (PI, 0.0));
        let r = rotation_spectral_invariants(0.0);
        assert_eq!((r.c_plus, r.c_minus), (0.0, 0.0));
    }

    #[test]
    fn rotation_invariants_structure() {
        for i in 0..=400 {
            let rho = -2.0 + i as f64 / 100.0;
            let r = rotation_spectral_invariants(rho);
            let (p, m) = rotation_closed_form(rho);
            assert!(
                (r.c_plus - p).abs() < 1e-12 && (r.c_minus - m).abs() < 1e-12,
                "rho {rho}"
            );
            let d = rotation_spectral_invariants(-rho);
            assert!((r.c_plus + d.c_minus).abs() < 1e-12);
            assert!(r.c_minus <= 0.0 && r.c_plus >= 0.0);
            assert!(r.c_plus - r.c_minus <= PI + 1e-12);
        }
    }

    #[test]
    fn subadditivity() {
        assert!(subadditivity_check_rotations(0.4, 0.4));
        assert!(subadditivity_check_rotations(0.9, 0.9));
        assert!(subadditivity_check_rotations(-0.5, 0.5));
    }

    #[test]
    fn monotonicity() {
        let r =
            monotonicity_check_radial(&Profile::Rotation(0.6), &Profile::Rotation(0.4)).unwrap();
        assert!(r.consistent && r.certified);
        let st = Profile::Staircase(Staircase::new(0.0, 0.1, 1.0).unwrap());
        let r = monotonicity_check_radial(&st, &Profile::Poly(RadialPoly::zero())).unwrap();
        assert!(r.consistent && r.certified, "{r:?}");
        let r = monotonicity_check_radial(&bump(), &bump()).unwrap();
        assert!(r.consistent);
        let other = Profile::Poly(RadialPoly::bump4().scaled(0.5));
        assert!(matches!(
            monotonicity_check_radial(&bump(), &other),
            Err(RadialError::IndeterminateCase)
        ));
        assert!(matches!(
            monotonicity_check_radial(&Profile::Rotation(0.2), &Profile::Rotation(0.4)),
            Err(RadialError::NotOrdered(_))
        ));
    }

    #[test]
    fn sweep_matches_dynamics() {
        let rows = tangent_sweep("radial_poly", "4s(1-s)", &bump(), 2, 2000).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert!(r.abs_err < 1e-6, "{r:?}");
        }
    }
}
