//! Action function, loop action functional and Calabi invariants.
//!
//! `σ(z) = ∫₀¹ (λ₀(X_{H^t}) + H^t)(φ_t z) dt` with `λ₀ = ½(x dy − y dx)`.
//! All outputs are in raw `ω = dx ∧ dy` units, so the disc has area `π`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{integrate_orbit, propagate, propagate_with_jacobian, FlowError, OrbitTrace};
use crate::geometry::{liouville_pairing, polygon_area_extrapolated, GeometryError, PlanePoint};
use crate::hamiltonian::HamiltonianSpec;
use crate::tolerances::{DEFAULT_STEPS_PER_UNIT, LOOP_CLOSURE, MOLLIFY_BOUNDARY};

type Point = PlanePoint<f64>;
type Spec = HamiltonianSpec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("loop is not closed (endpoint gap {0:e})")]
    NotClosed(f64),
    #[error("point lies outside the closed disc (|z| = {0})")]
    OutsideDisc(f64),
    #[error("Hamiltonian does not vanish on the unit circle (max |H| = {0:e})")]
    BoundaryViolation(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionRoute {
    PathIntegral,
    BoundaryAnchored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSample {
    pub point: Point,
    pub sigma: f64,
    pub route: ActionRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalabiMethod {
    TimeSpace,
    SigmaAverage,
}

/// `A_H(x) = ∮ x*λ₀ + ∫ H(t, x(t)) dt` for a closed trace.
///
/// The area term uses the extrapolated shoelace rule on the samples, the
/// Hamiltonian term the trapezoid rule on the trace's time grid.
pub fn action_of_loop(h: &Spec, trace: &OrbitTrace<f64>) -> Result<f64, ActionError> {
    let gap = trace.closure_gap();
    if gap > LOOP_CLOSURE {
        return Err(ActionError::NotClosed(gap));
    }
    let pts = trace.points();
    let area = polygon_area_extrapolated(&pts[..pts.len() - 1]);
    let mut ham = 0.0;
    for w in trace.samples.windows(2) {
        let (t0, z0) = w[0];
        let (t1, z1) = w[1];
        ham += 0.5 * (t1 - t0) * (h.eval(t0, z0) + h.eval(t1, z1));
    }
    Ok(area + ham)
}

fn check_in_disc(z: Point) -> Result<(), ActionError> {
    let r = z.norm();
    if r > 1.0 + 1e-12 {
        return Err(ActionError::OutsideDisc(r));
    }
    Ok(())
}

fn route_for(z: Point) -> ActionRoute {
    if (z.norm() - 1.0).abs() <= 1e-12 {
        ActionRoute::BoundaryAnchored
    } else {
        ActionRoute::PathIntegral
    }
}

/// `σ_{φ̃^k}(z)` by the path formula over `[0, k]`.
pub fn action_function_iterate(
    h: &Spec,
    z: Point,
    k: usize,
    steps_per_unit: usize,
) -> Result<ActionSample, ActionError> {
    check_in_disc(z)?;
    let (_, sigma) = propagate(h, z, k as f64, k.max(1) * steps_per_unit)?;
    Ok(ActionSample {
        point: z,
        sigma,
        route: route_for(z),
    })
}

/// `σ(z)` at the default resolution.
pub fn action_function(h: &Spec, z: Point) -> Result<ActionSample, ActionError> {
    action_function_iterate(h, z, 1, DEFAULT_STEPS_PER_UNIT)
}

fn interior_grid(grid: usize) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let x = -0.9 + 1.8 * (i as f64 + 0.5) / grid as f64;
            let y = -0.9 + 1.8 * (j as f64 + 0.5) / grid as f64;
            let z = Point::new(x, y);
            if z.norm() <= 0.9 {
                pts.push(z);
            }
        }
    }
    pts
}

/// `max |∇σ − (φ*λ₀ − λ₀)|` over a `grid × grid` lattice inside `|z| ≤ 0.9`.
pub fn verify_sigma_pde(h: &Spec, grid: usize) -> Result<f64, ActionError> {
    let e = 1e-4;
    let sigma = |z: Point| propagate(h, z, 1.0, DEFAULT_STEPS_PER_UNIT).map(|(_, a)| a);
    let residuals: Result<Vec<f64>, FlowError> = interior_grid(grid)
        .into_par_iter()
        .map(|z| {
            let dx = (sigma(z + Point::new(e, 0.0))? - sigma(z - Point::new(e, 0.0))?) / (2.0 * e);
            let dy = (sigma(z + Point::new(0.0, e))? - sigma(z - Point::new(0.0, e))?) / (2.0 * e);
            let (w, _, j) = propagate_with_jacobian(h, z, 1.0, DEFAULT_STEPS_PER_UNIT)?;
            let ex = Point::new(1.0, 0.0);
            let ey = Point::new(0.0, 1.0);
            let rx = liouville_pairing(w, j.apply(ex)) - liouville_pairing(z, ex);
            let ry = liouville_pairing(w, j.apply(ey)) - liouville_pairing(z, ey);
            Ok((dx - rx).hypot(dy - ry))
        })
        .collect();
    Ok(residuals?.into_iter().fold(0.0, f64::max))
}

/// Tensor rule on the disc: Gauss–Legendre in `s`, uniform in `θ`.
/// Weights include the area element `dx dy = ½ ds dθ`.
pub fn disc_quadrature(radial: usize, angular: usize) -> Vec<(Point, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(radial.max(1)).expect("nonzero"));
    let dtheta = std::f64::consts::TAU / angular as f64;
    let mut out = Vec::with_capacity(radial * angular);
    for (x, w) in rule.iter() {
        let s = 0.5 * (x + 1.0);
        for j in 0..angular {
            let th = dtheta * j as f64;
            out.push((Point::from_polar_s(s, th), 0.25 * w * dtheta));
        }
    }
    out
}

const RADIAL_NODES: usize = 64;
const ANGULAR_NODES: usize = 128;
const TIME_NODES: usize = 64;

/// Calabi invariant by one of two routes.
///
/// `TimeSpace` integrates `H` over `[0,1] × 𝔻`; `SigmaAverage` integrates the
/// action function over `𝔻`. When `H` vanishes on the boundary the second is
/// exactly twice the first.
pub fn calabi(h: &Spec, method: CalabiMethod) -> Result<f64, ActionError> {
    let defect = h.boundary_defect(256, 16);
    if defect > MOLLIFY_BOUNDARY {
        return Err(ActionError::BoundaryViolation(defect));
    }
    // a radial integrand is constant on circles, so one angle carries the full 2π weight
    let angular = if h.radial_profile().is_some() {
        1
    } else {
        ANGULAR_NODES
    };
    let nodes = disc_quadrature(RADIAL_NODES, angular);
    match method {
        CalabiMethod::TimeSpace => {
            let times: Vec<f64> = if h.is_autonomous() {
                vec![0.0]
            } else {
                (0..TIME_NODES)
                    .map(|j| j as f64 / TIME_NODES as f64)
                    .collect()
            };
            let mut total = 0.0;
            for &t in &times {
                for &(z, w) in &nodes {
                    total += w * h.eval(t, z);
                }
            }
            Ok(total / times.len() as f64)
        }
        CalabiMethod::SigmaAverage => {
            let values: Result<Vec<f64>, FlowError> = nodes
                .par_iter()
                .map(|&(z, w)| propagate(h, z, 1.0, DEFAULT_STEPS_PER_UNIT).map(|(_, a)| w * a))
                .collect();
            Ok(values?.into_iter().sum())
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimitiveShiftReport {
    /// `max |σ' − σ − (f∘φ − f)|` over the sample points.
    pub max_shift_defect: f64,
    /// `max |σ' − σ|` over the supplied fixed points.
    pub max_fixed_change: f64,
    pub holds: bool,
}

fn sigma_with_exact_form(
    h: &Spec,
    z: Point,
    grad_f: &(dyn Fn(Point) -> Point + Sync),
) -> Result<(f64, f64, Point), ActionError> {
    let trace = integrate_orbit(h, z, 1.0, DEFAULT_STEPS_PER_UNIT)?;
    let n = trace.samples.len() - 1;
    let rate = |i: usize| {
        let (t, x) = trace.samples[i];
        grad_f(x).dot(h.vector_field(t, x))
    };
    let dt = 1.0 / n as f64;
    // composite Simpson on an even number of intervals
    let mut df = rate(0) + rate(n);
    for i in 1..n {
        df += if i % 2 == 1 { 4.0 } else { 2.0 } * rate(i);
    }
    df *= dt / 3.0;
    let sigma = trace.total_action();
    Ok((sigma, sigma + df, trace.end()))
}

/// Recomputes `σ` for the primitive `λ₀ + df` and compares with the
/// predicted change `f∘φ − f`; values at fixed points must not move.
pub fn primitive_shift_test(
    h: &Spec,
    f: &(dyn Fn(Point) -> f64 + Sync),
    grad_f: &(dyn Fn(Point) -> Point + Sync),
    points: &[Point],
    fixed_points: &[Point],
    tol: f64,
) -> Result<PrimitiveShiftReport, ActionError> {
    let mut max_shift_defect: f64 = 0.0;
    for &z in points {
        check_in_disc(z)?;
        let (sigma, shifted, end) = sigma_with_exact_form(h, z, grad_f)?;
        max_shift_defect = max_shift_defect.max((shifted - sigma - (f(end) - f(z))).abs());
    }
    let mut max_fixed_change: f64 = 0.0;
    for &p in fixed_points {
        check_in_disc(p)?;
        let (sigma, shifted, _) = sigma_with_exact_form(h, p, grad_f)?;
        max_fixed_change = max_fixed_change.max((shifted - sigma).abs());
    }
    Ok(PrimitiveShiftReport {
        max_shift_defect,
        max_fixed_change,
        holds: max_shift_defect <= tol && max_fixed_change <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{FourierMode, RadialPoly};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn perturbed() -> Spec {
        Spec::perturbed(
            RadialPoly::bump4(),
            vec![FourierMode {
                amplitude: 0.04,
                time_freq: 1,
                angular_freq: 1,
                phase: 0.5,
                radial_power: 0,
            }],
        )
    }

    #[test]
    fn loop_action_examples() {
        let rho = 0.4;
        let origin = integrate_orbit(&Spec::rotation(rho), Point::origin(), 1.0, 2000).unwrap();
        assert!((action_of_loop(&Spec::rotation(rho), &origin).unwrap() - PI * rho).abs() < 1e-12);
        let zero = integrate_orbit(&Spec::zero(), Point::new(0.3, 0.1), 1.0, 2000).unwrap();
        assert_eq!(action_of_loop(&Spec::zero(), &zero).unwrap(), 0.0);

        let s = (4.0 + PI) / 8.0;
        let want = 4.0 * s * s;
        let h = Spec::bump4();
        let circle = integrate_orbit(&h, Point::from_polar_s(s, 0.4), 1.0, 2000).unwrap();
        let got = action_of_loop(&h, &circle).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        assert!((want - 3.187_647).abs() < 1e-6);

        let open = integrate_orbit(&h, Point::from_polar_s(0.3, 0.0), 1.0, 2000).unwrap();
        assert!(matches!(
            action_of_loop(&h, &open),
            Err(ActionError::NotClosed(_))
        ));
    }

    #[test]
    fn action_function_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = Spec::rotation(0.3);
        for _ in 0..20 {
            let z = Point::from_polar_s(rng.gen::<f64>(), rng.gen::<f64>() * 6.0);
            assert!((action_function(&h, z).unwrap().sigma - 0.3 * PI).abs() < 1e-10);
        }
        let b = action_function(&Spec::bump4(), Point::new(0.0, 1.0)).unwrap();
        assert_eq!(b.route, ActionRoute::BoundaryAnchored);
        assert!((b.sigma - 4.0).abs() < 1e-9);
        assert_eq!(
            action_function(&Spec::zero(), Point::new(0.2, 0.2))
                .unwrap()
                .sigma,
            0.0
        );
        assert!(matches!(
            action_function(&Spec::zero(), Point::new(1.2, 0.0)),
            Err(ActionError::OutsideDisc(_))
        ));
    }

    #[test]
    fn boundary_condition_matches_half_angle_change() {
        for h in [Spec::bump4(), perturbed(), Spec::rotation(-0.6)] {
            for i in 0..64 {
                let z = Point::from_polar(1.0, i as f64 * PI / 32.0);
                let trace = integrate_orbit(&h, z, 1.0, 2000).unwrap();
                let lift = trace.angle_lift.as_ref().unwrap();
                let line = 0.5 * (lift[lift.len() - 1] - lift[0]);
                assert!((trace.total_action() - line).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn sigma_pde_residuals() {
        assert!(verify_sigma_pde(&Spec::rotation(0.5), 32).unwrap() <= 1e-5);
        assert!(verify_sigma_pde(&Spec::zero(), 8).unwrap() <= 1e-9);
        assert!(verify_sigma_pde(&perturbed(), 12).unwrap() <= 1e-4);
    }

    #[test]
    fn calabi_closed_forms() {
        let rho = 0.37;
        let ts = calabi(&Spec::rotation(rho), CalabiMethod::TimeSpace).unwrap();
        let sa = calabi(&Spec::rotation(rho), CalabiMethod::SigmaAverage).unwrap();
        assert!((ts - PI * PI * rho / 2.0).abs() < 1e-10);
        assert!((sa - PI * PI * rho).abs() < 1e-9);
        let b = calabi(&Spec::bump4(), CalabiMethod::TimeSpace).unwrap();
        assert!((b - 2.0 * PI / 3.0).abs() < 1e-10);
        let bs = calabi(&Spec::bump4(), CalabiMethod::SigmaAverage).unwrap();
        assert!((bs - 4.0 * PI / 3.0).abs() < 1e-8);
        for m in [CalabiMethod::TimeSpace, CalabiMethod::SigmaAverage] {
            assert_eq!(calabi(&Spec::zero(), m).unwrap(), 0.0);
        }
    }

    #[test]
    fn calabi_routes_differ_by_factor_two_for_time_dependent() {
        let h = perturbed();
        let ts = calabi(&h, CalabiMethod::TimeSpace).unwrap();
        let sa = calabi(&h, CalabiMethod::SigmaAverage).unwrap();
        assert!((sa - 2.0 * ts).abs() < 1e-7, "{sa} vs {}", 2.0 * ts);
    }

    #[test]
    fn calabi_additive_for_radial_profiles() {
        let a = RadialPoly::bump4();
        let b = RadialPoly::new(vec![0.3, -0.1, 0.5, -0.7]);
        let sum = calabi(&Spec::RadialPoly(a.add(&b)), CalabiMethod::TimeSpace).unwrap();
        let parts = calabi(&Spec::RadialPoly(a), CalabiMethod::TimeSpace).unwrap()
            + calabi(&Spec::RadialPoly(b), CalabiMethod::TimeSpace).unwrap();
        assert!((sum - parts).abs() < 1e-12);
    }

    #[test]
    fn calabi_rejects_boundary_violation() {
        let bad = Spec::radial_poly(vec![1.0e15, 3.3e14, -7.1e14, 0.123]);
        assert!(matches!(
            calabi(&bad, CalabiMethod::TimeSpace),
            Err(ActionError::BoundaryViolation(_))
        ));
    }

    #[test]
    fn primitive_shift() {
        let pts = [
            Point::new(0.2, 0.3),
            Point::new(-0.5, 0.1),
            Point::new(0.6, -0.6),
        ];
        let constant = primitive_shift_test(
            &perturbed(),
            &|_| 2.5,
            &|_| Point::origin(),
            &pts,
            &[],
            1e-6,
        )
        .unwrap();
        assert_eq!(constant.max_shift_defect, 0.0);

        let fx = |z: Point| z.x;
        let gx = |_: Point| Point::new(1.0, 0.0);
        let r = primitive_shift_test(
            &Spec::rotation(0.3),
            &fx,
            &gx,
            &pts,
            &[Point::origin()],
            1e-6,
        )
        .unwrap();
        assert!(r.holds, "{r:?}");

        let fxy = |z: Point| z.x * z.y;
        let gxy = |z: Point| Point::new(z.y, z.x);
        let fixed: Vec<Point> = (0..6).map(|i| Point::from_polar_s(0.5, i as f64)).collect();
        let r = primitive_shift_test(&Spec::bump4(), &fxy, &gxy, &pts, &fixed, 1e-6).unwrap();
        assert!(r.holds, "{r:?}");
        let r = primitive_shift_test(&perturbed(), &fxy, &gxy, &pts, &[], 1e-6).unwrap();
        assert!(r.holds, "{r:?}");
    }
}
