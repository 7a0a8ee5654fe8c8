//! Fixed-step RK4 integration of Hamiltonian isotopies.
//!
//! The integrated state carries the position, the running action integrand
//! `∫ (λ₀(ẋ) + H) dt`, and optionally the variational matrix `D_z φ_t`.
//! A step whose spatial displacement exceeds [`MAX_SPATIAL_STEP`] is split
//! in half, recursively, up to [`MAX_HALVING_LEVELS`] times.
//!
//! [`MAX_SPATIAL_STEP`]: crate::tolerances::MAX_SPATIAL_STEP
//! [`MAX_HALVING_LEVELS`]: crate::tolerances::MAX_HALVING_LEVELS

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{liouville_pairing, PlanePoint};
use crate::hamiltonian::HamiltonianSpec;
use crate::scalar::Scalar;
use crate::tolerances::{
    CENTER_HIT, DEFAULT_STEPS_PER_UNIT, ESCAPE_RADIUS, MAX_HALVING_LEVELS, MAX_SPATIAL_STEP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("step rejected at t = {t}: {reason}")]
    StepRejection { t: f64, reason: String },
    #[error("need at least {min} steps for the requested span, got {got}")]
    TooFewSteps { min: usize, got: usize },
    #[error("non-finite initial point")]
    NonFiniteStart,
}

/// `D_z φ_T(z)`, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FlowJacobian<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Scalar> FlowJacobian<T> {
    pub fn identity() -> Self {
        Self {
            m: [[T::one(), T::zero()], [T::zero(), T::one()]],
        }
    }

    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, v: PlanePoint<T>) -> PlanePoint<T> {
        PlanePoint::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    /// Transpose applied to `v`.
    pub fn apply_transpose(&self, v: PlanePoint<T>) -> PlanePoint<T> {
        PlanePoint::new(
            self.m[0][0] * v.x + self.m[1][0] * v.y,
            self.m[0][1] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn compose(&self, inner: &Self) -> Self {
        let a = &self.m;
        let b = &inner.m;
        let mut m = [[T::zero(); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { m }
    }
}

/// Time-sampled trajectory on a uniform grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OrbitTrace<T> {
    pub samples: Vec<(T, PlanePoint<T>)>,
    /// Continuous polar angle, present when the trace stays away from the origin.
    pub angle_lift: Option<Vec<T>>,
    /// `∫₀ᵗ (λ₀(ẋ) + H(τ, x)) dτ` at each sample.
    pub action_integrand: Vec<T>,
}

impl<T: Scalar> OrbitTrace<T> {
    pub fn start(&self) -> PlanePoint<T> {
        self.samples[0].1
    }

    pub fn end(&self) -> PlanePoint<T> {
        self.samples[self.samples.len() - 1].1
    }

    pub fn points(&self) -> Vec<PlanePoint<T>> {
        self.samples.iter().map(|&(_, p)| p).collect()
    }

    pub fn total_action(&self) -> T {
        self.action_integrand[self.action_integrand.len() - 1]
    }

    pub fn closure_gap(&self) -> T {
        self.end().dist(self.start())
    }

    /// `(θ(T) − θ(0)) / 2π`, when the angle lift exists.
    pub fn winding(&self) -> Option<T> {
        self.angle_lift
            .as_ref()
            .map(|lift| (lift[lift.len() - 1] - lift[0]) / T::TAU())
    }
}

/// Point, action integrand and optional variational matrix.
#[derive(Debug, Clone, Copy)]
struct State<T> {
    z: PlanePoint<T>,
    action: T,
    jac: Option<FlowJacobian<T>>,
}

struct Deriv<T> {
    dz: PlanePoint<T>,
    da: T,
    dj: Option<[[T; 2]; 2]>,
}

fn deriv<T: Scalar>(h: &HamiltonianSpec<T>, t: T, s: &State<T>) -> Deriv<T> {
    let (v, g) = h.eval_grad(t, s.z);
    let x = PlanePoint::new(g.y, -g.x);
    let dj = s.jac.map(|j| {
        let a = h.vector_field_jacobian(t, s.z);
        let mut out = [[T::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * j.m[0][k] + a[i][1] * j.m[1][k];
            }
        }
        out
    });
    Deriv {
        dz: x,
        da: liouville_pairing(s.z, x) + v,
        dj,
    }
}

fn advance<T: Scalar>(s: &State<T>, d: &Deriv<T>, h: T) -> State<T> {
    let jac = s.jac.map(|j| {
        let dj = d.dj.expect("jacobian derivative present");
        let mut m = j.m;
        for i in 0..2 {
            for k in 0..2 {
                m[i][k] = m[i][k] + h * dj[i][k];
            }
        }
        FlowJacobian { m }
    });
    State {
        z: s.z + d.dz * h,
        action: s.action + h * d.da,
        jac,
    }
}

fn rk4<T: Scalar>(h: &HamiltonianSpec<T>, t: T, s: &State<T>, dt: T) -> State<T> {
    let half = dt * T::half();
    let k1 = deriv(h, t, s);
    let k2 = deriv(h, t + half, &advance(s, &k1, half));
    let k3 = deriv(h, t + half, &advance(s, &k2, half));
    let k4 = deriv(h, t + dt, &advance(s, &k3, dt));
    let six = T::of(6.0);
    let w = |a: T, b: T, c: T, d: T| (a + T::two() * (b + c) + d) * dt / six;
    let jac = s.jac.map(|j| {
        let (a, b, c, d) = (
            k1.dj.unwrap(),
            k2.dj.unwrap(),
            k3.dj.unwrap(),
            k4.dj.unwrap(),
        );
        let mut m = j.m;
        for i in 0..2 {
            for k in 0..2 {
                m[i][k] = m[i][k] + w(a[i][k], b[i][k], c[i][k], d[i][k]);
            }
        }
        FlowJacobian { m }
    });
    State {
        z: PlanePoint::new(
            s.z.x + w(k1.dz.x, k2.dz.x, k3.dz.x, k4.dz.x),
            s.z.y + w(k1.dz.y, k2.dz.y, k3.dz.y, k4.dz.y),
        ),
        action: s.action + w(k1.da, k2.da, k3.da, k4.da),
        jac,
    }
}

fn step_guarded<T: Scalar>(
    h: &HamiltonianSpec<T>,
    t: T,
    s: &State<T>,
    dt: T,
    level: u32,
) -> Result<State<T>, FlowError> {
    let next = rk4(h, t, s, dt);
    let finite = next.z.is_finite() && next.action.is_finite();
    if finite && next.z.dist(s.z) <= T::of(MAX_SPATIAL_STEP) {
        if next.z.norm() > T::of(ESCAPE_RADIUS) {
            return Err(FlowError::StepRejection {
                t: t.to_f64_lossy(),
                reason: format!("orbit left |z| <= {ESCAPE_RADIUS}"),
            });
        }
        return Ok(next);
    }
    if level >= MAX_HALVING_LEVELS {
        return Err(FlowError::StepRejection {
            t: t.to_f64_lossy(),
            reason: format!("no acceptable step after {MAX_HALVING_LEVELS} halvings"),
        });
    }
    let half = dt * T::half();
    let mid = step_guarded(h, t, s, half, level + 1)?;
    step_guarded(h, t + half, &mid, half, level + 1)
}

fn check_steps<T: Scalar>(span: T, steps: usize) -> Result<(), FlowError> {
    let min = (T::of(100.0) * span.abs())
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(1);
    if steps < min {
        return Err(FlowError::TooFewSteps { min, got: steps });
    }
    Ok(())
}

/// Default step count for a span of length `t`.
pub fn default_steps<T: Scalar>(t: T) -> usize {
    (t.abs() * T::of_usize(DEFAULT_STEPS_PER_UNIT))
        .ceil()
        .to_usize()
        .unwrap_or(DEFAULT_STEPS_PER_UNIT)
        .max(100)
}

fn run<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_start: T,
    t_end: T,
    steps: usize,
    with_jacobian: bool,
    mut visit: impl FnMut(T, &State<T>),
) -> Result<State<T>, FlowError> {
    if !z0.is_finite() {
        return Err(FlowError::NonFiniteStart);
    }
    check_steps(t_end, steps)?;
    let dt = t_end / T::of_usize(steps);
    let mut s = State {
        z: z0,
        action: T::zero(),
        jac: with_jacobian.then(FlowJacobian::identity),
    };
    visit(T::zero(), &s);
    for i in 0..steps {
        let t = t_start + dt * T::of_usize(i);
        s = step_guarded(h, t, &s, dt, 0)?;
        visit(dt * T::of_usize(i + 1), &s);
    }
    Ok(s)
}

fn lift_angles<T: Scalar>(points: &[PlanePoint<T>]) -> Option<Vec<T>> {
    let hit = T::of(CENTER_HIT);
    if points.iter().any(|p| p.norm() <= hit) {
        return None;
    }
    let mut lift = Vec::with_capacity(points.len());
    let mut theta = points[0].angle();
    lift.push(theta);
    for w in points.windows(2) {
        let d = w[0].cross(w[1]).atan2(w[0].dot(w[1]));
        if d.abs() > T::FRAC_PI_2() {
            return None;
        }
        theta = theta + d;
        lift.push(theta);
    }
    Some(lift)
}

/// Trajectory of `X_{H^t}` on `[0, t_end]` with `steps` uniform RK4 steps.
pub fn integrate_orbit<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_end: T,
    steps: usize,
) -> Result<OrbitTrace<T>, FlowError> {
    let mut samples = Vec::with_capacity(steps + 1);
    let mut action = Vec::with_capacity(steps + 1);
    run(h, z0, T::zero(), t_end, steps, false, |t, s| {
        samples.push((t, s.z));
        action.push(s.action);
    })?;
    let pts: Vec<_> = samples.iter().map(|&(_, p)| p).collect();
    Ok(OrbitTrace {
        angle_lift: lift_angles(&pts),
        samples,
        action_integrand: action,
    })
}

/// Endpoint and accumulated action integrand of `φ_{t_end}`, without storing the path.
pub fn propagate<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_end: T,
    steps: usize,
) -> Result<(PlanePoint<T>, T), FlowError> {
    let s = run(h, z0, T::zero(), t_end, steps, false, |_, _| {})?;
    Ok((s.z, s.action))
}

/// Endpoint and action integrand of the flow from time `t_start` to
/// `t_start + duration`.
pub fn propagate_from<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_start: T,
    duration: T,
    steps: usize,
) -> Result<(PlanePoint<T>, T), FlowError> {
    let s = run(h, z0, t_start, duration, steps, false, |_, _| {})?;
    Ok((s.z, s.action))
}

/// Endpoint, action integrand and `D_z φ_{t_end}`.
pub fn propagate_with_jacobian<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_end: T,
    steps: usize,
) -> Result<(PlanePoint<T>, T, FlowJacobian<T>), FlowError> {
    let s = run(h, z0, T::zero(), t_end, steps, true, |_, _| {})?;
    Ok((s.z, s.action, s.jac.expect("jacobian tracked")))
}

/// `φ₁(z0)` at the default resolution.
pub fn time_one_map<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
) -> Result<PlanePoint<T>, FlowError> {
    propagate(h, z0, T::one(), DEFAULT_STEPS_PER_UNIT).map(|(z, _)| z)
}

/// `D_z φ_T(z0)` from the variational system at the default resolution.
pub fn flow_jacobian<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_end: T,
) -> Result<FlowJacobian<T>, FlowError> {
    propagate_with_jacobian(h, z0, t_end, default_steps(t_end)).map(|(_, _, j)| j)
}

/// Richardson estimate of the endpoint error at `steps`, from a run at `2·steps`.
pub fn endpoint_error_estimate<T: Scalar>(
    h: &HamiltonianSpec<T>,
    z0: PlanePoint<T>,
    t_end: T,
    steps: usize,
) -> Result<T, FlowError> {
    let (coarse, _) = propagate(h, z0, t_end, steps)?;
    let (fine, _) = propagate(h, z0, t_end, 2 * steps)?;
    Ok(coarse.dist(fine) * T::of(16.0 / 15.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{precompose_rotation, FourierMode, RadialPoly};
    use std::f64::consts::PI;

    type H = HamiltonianSpec<f64>;

    fn p(x: f64, y: f64) -> PlanePoint<f64> {
        PlanePoint::new(x, y)
    }

    fn perturbed() -> H {
        H::perturbed(
            RadialPoly::bump4(),
            vec![
                FourierMode {
                    amplitude: 0.05,
                    time_freq: 1,
                    angular_freq: 1,
                    phase: 0.2,
                    radial_power: 0,
                },
                FourierMode {
                    amplitude: 0.03,
                    time_freq: 2,
                    angular_freq: 2,
                    phase: 0.0,
                    radial_power: 1,
                },
            ],
        )
    }

    #[test]
    fn orbit_examples() {
        let q = integrate_orbit(&H::rotation(0.25), p(1.0, 0.0), 1.0, 2000).unwrap();
        assert!(q.end().dist(p(0.0, 1.0)) < 1e-8);
        assert!((q.winding().unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(q.action_integrand[0], 0.0);

        let z0 = PlanePoint::from_polar_s(0.5, 0.3);
        let c = integrate_orbit(&H::bump4(), z0, 1.0, 2000).unwrap();
        assert!(c.end().dist(z0) < 1e-8);

        for h in [H::bump4(), perturbed(), H::rotation(0.37)] {
            let tr = integrate_orbit(&h, PlanePoint::from_polar(1.0, 0.7), 1.0, 2000).unwrap();
            let worst = tr
                .samples
                .iter()
                .map(|(_, z)| (z.norm() - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-8, "{} drift {worst}", h.kind_name());
        }
    }

    #[test]
    fn time_one_examples() {
        let z = p(0.3, -0.4);
        assert!(time_one_map(&H::rotation(1.0), z).unwrap().dist(z) < 1e-8);
        assert!(
            time_one_map(&H::rotation(0.5), p(0.5, 0.0))
                .unwrap()
                .dist(p(-0.5, 0.0))
                < 1e-8
        );
        assert_eq!(time_one_map(&H::bump4(), p(0.0, 0.0)).unwrap(), p(0.0, 0.0));
    }

    #[test]
    fn jacobian_examples() {
        let rho = 0.3;
        let j = flow_jacobian(&H::rotation(rho), p(0.2, 0.5), 1.0).unwrap();
        let (c, s) = ((2.0 * PI * rho).cos(), (2.0 * PI * rho).sin());
        let want = [[c, -s], [s, c]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j.m[i][k] - want[i][k]).abs() < 1e-6);
            }
        }
        assert_eq!(
            flow_jacobian(&H::zero(), p(0.4, 0.1), 1.0).unwrap(),
            FlowJacobian::identity()
        );
    }

    #[test]
    fn jacobian_matches_finite_differences_and_is_symplectic() {
        let step = 1e-5;
        for h in [
            H::bump4(),
            perturbed(),
            precompose_rotation(&perturbed(), 1),
        ] {
            for z in [p(0.1, 0.2), p(-0.5, 0.4), p(0.7, -0.6)] {
                let j = flow_jacobian(&h, z, 1.0).unwrap();
                assert!((j.det() - 1.0).abs() < 1e-6, "det {}", j.det());
                let ex = (time_one_map(&h, z + p(step, 0.0)).unwrap()
                    - time_one_map(&h, z - p(step, 0.0)).unwrap())
                    * (0.5 / step);
                let ey = (time_one_map(&h, z + p(0.0, step)).unwrap()
                    - time_one_map(&h, z - p(0.0, step)).unwrap())
                    * (0.5 / step);
                assert!((j.m[0][0] - ex.x).abs() < 1e-4 && (j.m[1][0] - ex.y).abs() < 1e-4);
                assert!((j.m[0][1] - ey.x).abs() < 1e-4 && (j.m[1][1] - ey.y).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn energy_conserved_for_autonomous() {
        let h = H::bump4();
        let z0 = p(0.2, 0.6);
        let tr = integrate_orbit(&h, z0, 1.0, 2000).unwrap();
        let e0 = h.eval(0.0, z0);
        for &(t, z) in &tr.samples {
            assert!((h.eval(t, z) - e0).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            integrate_orbit(&H::bump4(), p(0.1, 0.1), 2.0, 50),
            Err(FlowError::TooFewSteps { .. })
        ));
        assert!(matches!(
            integrate_orbit(&H::bump4(), p(f64::NAN, 0.1), 1.0, 200),
            Err(FlowError::NonFiniteStart)
        ));
        // outward flow from a profile whose extension spins fast far outside
        let wild = H::radial_poly(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 50.0]);
        assert!(matches!(
            integrate_orbit(&wild, p(2.9, 0.0), 1.0, 100),
            Err(FlowError::StepRejection { .. })
        ));
    }

    #[test]
    fn richardson_estimate_is_small() {
        let e = endpoint_error_estimate(&perturbed(), p(0.3, 0.3), 1.0, 2000).unwrap();
        assert!(e < 1e-10, "{e}");
    }

    #[test]
    fn single_precision_flow() {
        let h = HamiltonianSpec::<f32>::rotation(0.25);
        let z = time_one_map(&h, PlanePoint::new(1.0f32, 0.0)).unwrap();
        assert!(z.dist(PlanePoint::new(0.0, 1.0)) < 1e-3);
    }
}
