//! Periodic orbits, action and mean-action spectra, boundary rotation.
//!
//! Radial families are solved exactly in `s`: the circle `|z|² = s` is
//! `q`-periodic when `g'(s) = −πp/q` with `gcd(p, q) = 1`, and each such circle
//! is reported once. Other families go through a seed-grid residual sweep
//! followed by damped Newton on `z ↦ φ^k(z) − z`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{propagate, propagate_from, propagate_with_jacobian, FlowError, FlowJacobian};
use crate::geometry::PlanePoint;
use crate::hamiltonian::{HamiltonianSpec, RadialProfile};
use crate::radial::{solve_slope, RadialError};
use crate::tolerances::{BOUNDARY_BAND, CLUSTER_RADIUS, DEFAULT_STEPS_PER_UNIT, PERIODIC_RESIDUAL};

type Point = PlanePoint<f64>;
type Spec = HamiltonianSpec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitLocation {
    Interior,
    Boundary,
    /// A whole circle `|z|² = s` of periodic points, reported once.
    DegenerateCircle {
        s: f64,
    },
}

impl OrbitLocation {
    pub fn label(&self) -> String {
        match self {
            Self::Interior => "interior".into(),
            Self::Boundary => "boundary".into(),
            Self::DegenerateCircle { s } => format!("circle(s={s:.12})"),
        }
    }

    /// Interior point or interior circle.
    pub fn is_interior(&self) -> bool {
        !matches!(self, Self::Boundary)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitRecord {
    pub point: Point,
    pub period: usize,
    /// `|φ^k(z) − z|` at twice the search resolution.
    pub residual: f64,
    /// `σ_{φ̃^k}(z)`.
    pub action_total: f64,
    pub mean_action: f64,
    pub location: OrbitLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub period_max: usize,
    /// Seeds on a `grid × grid` lattice of `[−1, 1]²`, kept inside the disc.
    pub grid: usize,
    pub steps_per_unit: usize,
    /// Resolution of the residual sweep that picks Newton candidates.
    pub sweep_steps_per_unit: usize,
    pub max_candidates_per_period: usize,
    pub rotation_iterates: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            period_max: 16,
            grid: 64,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            sweep_steps_per_unit: 200,
            max_candidates_per_period: 24,
            rotation_iterates: 1000,
        }
    }
}

impl SearchConfig {
    pub fn with_period_max(mut self, k: usize) -> Self {
        self.period_max = k;
        self
    }

    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid = n;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub seeds: usize,
    pub candidates: usize,
    pub converged: usize,
    /// Seeds or candidates that failed to converge or left the disc.
    pub dropped: usize,
    /// Converged roots that failed post-hoc verification.
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSearch {
    pub records: Vec<PeriodicOrbitRecord>,
    /// The time-one map is the identity.
    pub identity: bool,
    /// Every point has this minimal period (rigid rational rotation).
    pub global_period: Option<usize>,
    pub stats: SearchStats,
}

fn iterate_action(h: &Spec, z: Point, k: usize, steps: usize) -> Result<(Point, f64), FlowError> {
    propagate(h, z, k as f64, k * steps)
}

fn verified_record(
    h: &Spec,
    z: Point,
    k: usize,
    steps: usize,
    location: Option<OrbitLocation>,
) -> Result<Option<PeriodicOrbitRecord>, FlowError> {
    let (_, action_total) = iterate_action(h, z, k, steps)?;
    let (w, _) = iterate_action(h, z, k, 2 * steps)?;
    let residual = w.dist(z);
    if residual > PERIODIC_RESIDUAL {
        return Ok(None);
    }
    let location = location.unwrap_or(if (z.norm() - 1.0).abs() <= BOUNDARY_BAND {
        OrbitLocation::Boundary
    } else {
        OrbitLocation::Interior
    });
    Ok(Some(PeriodicOrbitRecord {
        point: z,
        period: k,
        residual,
        action_total,
        mean_action: action_total / k as f64,
        location,
    }))
}

/// Rational `p/q` with `q ≤ max_den` equal to `x` within `1e-12`.
fn rational_period(x: f64, max_den: usize) -> Option<usize> {
    (1..=max_den).find(|&q| {
        let p = (x * q as f64).round();
        (x * q as f64 - p).abs() <= 1e-12 * q as f64
    })
}

fn radial_search(
    h: &Spec,
    g: &RadialProfile<f64>,
    cfg: &SearchConfig,
) -> Result<OrbitSearch, SpectrumError> {
    let k_max = cfg.period_max;
    let steps = cfg.steps_per_unit;
    let mut stats = SearchStats::default();
    let mut records = Vec::new();
    let origin = verified_record(h, Point::origin(), 1, steps, None)?;
    records.extend(origin);

    if g.is_affine() {
        let rho = -g.deriv(0.5) / PI;
        let global_period = rational_period(rho, k_max);
        return Ok(OrbitSearch {
            records,
            identity: global_period == Some(1),
            global_period,
            stats,
        });
    }

    let n = 2000;
    let (lo, hi) = (0..=n)
        .map(|i| g.deriv(i as f64 / n as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| {
            (a.min(d), b.max(d))
        });
    // g'(s) = −πp/q  ⇔  p/q = −g'(s)/π
    let (r_lo, r_hi) = (-hi / PI, -lo / PI);
    let mut levels: Vec<(usize, f64)> = Vec::new();
    for q in 1..=k_max {
        let p_lo = (r_lo * q as f64).floor() as i64 - 1;
        let p_hi = (r_hi * q as f64).ceil() as i64 + 1;
        for p in p_lo..=p_hi {
            if p.gcd(&(q as i64)) != 1 {
                continue;
            }
            let set = solve_slope(g, -PI * p as f64 / q as f64)?;
            for s in set.roots {
                levels.push((q, s));
            }
            for (a, b) in set.plateaus {
                levels.push((q, 0.5 * (a + b)));
            }
        }
    }
    stats.candidates = levels.len();
    let found: Vec<Result<Option<PeriodicOrbitRecord>, FlowError>> = levels
        .par_iter()
        .map(|&(q, s)| {
            if s <= 1e-12 {
                return Ok(None);
            }
            let location = if 1.0 - s <= BOUNDARY_BAND {
                OrbitLocation::Boundary
            } else {
                OrbitLocation::DegenerateCircle { s }
            };
            let z = Point::from_polar_s(s.min(1.0), 0.0);
            verified_record(h, z, q, steps, Some(location))
        })
        .collect();
    for r in found {
        match r? {
            Some(rec) => {
                stats.converged += 1;
                records.push(rec);
            }
            None => stats.rejected += 1,
        }
    }
    Ok(OrbitSearch {
        records,
        identity: false,
        global_period: None,
        stats,
    })
}

fn seed_grid(n: usize) -> Vec<(usize, usize, Point)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
            let z = Point::new(x, y);
            if z.norm() < 1.0 - 1e-6 {
                out.push((i, j, z));
            }
        }
    }
    out
}

fn solve2(a: [[f64; 2]; 2], b: Point) -> Option<Point> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().map(|v| v * v).sum::<f64>().max(1e-300);
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    Some(Point::new(
        (a[1][1] * b.x - a[0][1] * b.y) / det,
        (a[0][0] * b.y - a[1][0] * b.x) / det,
    ))
}

/// Newton at a quarter of the resolution, then chord iterations at full
/// resolution with the last coarse Jacobian; full Newton only if those stall.
fn newton(h: &Spec, z0: Point, k: usize, steps: usize) -> Option<Point> {
    let (mut z, a) = newton_at(h, z0, k, (steps / 4).max(100), 1e-16, 40)?;
    let total = k * steps;
    for _ in 0..6 {
        let f = propagate(h, z, k as f64, total).ok()?.0 - z;
        if f.dot(f) <= 1e-24 {
            return Some(z);
        }
        z += solve2(a, -f)?;
        if z.norm() >= 1.0 {
            return None;
        }
    }
    newton_at(h, z, k, steps, 1e-24, 8).map(|(z, _)| z)
}

/// Damped Newton with a Levenberg–Marquardt fallback and Armijo backtracking,
/// stopping once `|φ^k(z) − z|² ≤ target`. Runs that have not reached
/// `10⁻⁶` after half the iteration budget are abandoned.
fn newton_at(
    h: &Spec,
    z0: Point,
    k: usize,
    steps: usize,
    target: f64,
    max_iter: usize,
) -> Option<(Point, [[f64; 2]; 2])> {
    let t = k as f64;
    let total = k * steps;
    let residual = |z: Point| propagate(h, z, t, total).ok().map(|(w, _)| w - z);
    let mut z = z0;
    let mut a = [[0.0; 2]; 2];
    for it in 0..max_iter {
        let (w, _, jac) = propagate_with_jacobian(h, z, t, total).ok()?;
        let f = w - z;
        let r2 = f.dot(f);
        let FlowJacobian { m } = jac;
        a = [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
        if r2 <= target {
            return Some((z, a));
        }
        if 2 * it >= max_iter && r2 > 1e-12 {
            return None;
        }
        let step = solve2(a, -f).unwrap_or_else(|| {
            let at = FlowJacobian { m: a };
            let g = at.apply_transpose(-f);
            let ata = [
                [
                    a[0][0] * a[0][0] + a[1][0] * a[1][0],
                    a[0][0] * a[0][1] + a[1][0] * a[1][1],
                ],
                [
                    a[0][1] * a[0][0] + a[1][1] * a[1][0],
                    a[0][1] * a[0][1] + a[1][1] * a[1][1],
                ],
            ];
            let mu = 1e-6 * (ata[0][0] + ata[1][1]) + 1e-14;
            solve2(
                [[ata[0][0] + mu, ata[0][1]], [ata[1][0], ata[1][1] + mu]],
                g,
            )
            .unwrap_or(g)
        });
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-4 {
            let cand = z + step * alpha;
            if cand.norm() < 1.0 {
                if let Some(fc) = residual(cand) {
                    if fc.dot(fc) <= (1.0 - 1e-4 * alpha) * r2 {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(c) => z = c,
            None => return (r2 <= 1e4 * target).then_some((z, a)),
        }
    }
    let f = residual(z)?;
    (f.dot(f) <= 1e4 * target).then_some((z, a))
}

/// Residual sweep over the seed grid, one pass of `K` periods per seed.
fn sweep_candidates(h: &Spec, cfg: &SearchConfig) -> (usize, Vec<Vec<Point>>) {
    let seeds = seed_grid(cfg.grid);
    let k_max = cfg.period_max;
    let sweep: Vec<Option<Vec<f64>>> = seeds
        .par_iter()
        .map(|&(_, _, z)| {
            let mut w = z;
            let mut res = Vec::with_capacity(k_max);
            for _ in 0..k_max {
                w = propagate(h, w, 1.0, cfg.sweep_steps_per_unit).ok()?.0;
                res.push(w.dist(z));
            }
            Some(res)
        })
        .collect();
    let n = cfg.grid;
    let mut index = vec![None; n * n];
    for (idx, &(i, j, _)) in seeds.iter().enumerate() {
        index[i * n + j] = Some(idx);
    }
    let mut per_period = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let mut mins: Vec<(f64, Point)> = Vec::new();
        for (idx, &(i, j, z)) in seeds.iter().enumerate() {
            let Some(r) = sweep[idx].as_ref().map(|v| v[k]) else {
                continue;
            };
            if r > 0.25 {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                        continue;
                    }
                    if let Some(nidx) = index[ni as usize * n + nj as usize] {
                        if let Some(v) = sweep[nidx].as_ref() {
                            if v[k] < r {
                                is_min = false;
                            }
                        }
                    }
                }
            }
            if is_min {
                mins.push((r, z));
            }
        }
        mins.sort_by(|a, b| a.0.total_cmp(&b.0));
        mins.truncate(cfg.max_candidates_per_period);
        per_period.push(mins.into_iter().map(|(_, z)| z).collect());
    }
    (seeds.len(), per_period)
}

fn minimal_period(h: &Spec, z: Point, k: usize, steps: usize) -> usize {
    for d in 1..k {
        if k.is_multiple_of(d) {
            if let Ok((w, _)) = propagate(h, z, d as f64, d * steps) {
                if w.dist(z) <= 1e-7 {
                    return d;
                }
            }
        }
    }
    k
}

/// Periods are processed in increasing order; a candidate for period `k`
/// lying within two grid cells of a known orbit point of period `d | k` is
/// skipped, since Newton would return to that orbit.
fn newton_search(h: &Spec, cfg: &SearchConfig) -> Result<OrbitSearch, SpectrumError> {
    let steps = cfg.steps_per_unit;
    let (seeds, per_period) = sweep_candidates(h, cfg);
    let exclusion = 4.0 / cfg.grid.max(1) as f64;
    let mut stats = SearchStats {
        seeds,
        ..Default::default()
    };
    let mut unique: Vec<(usize, Point)> = Vec::new();
    // (minimal period, point) for every iterate of every orbit found so far
    let mut known: Vec<(usize, Point)> = Vec::new();
    for (idx, zs) in per_period.iter().enumerate() {
        let k = idx + 1;
        let jobs: Vec<Point> = zs
            .iter()
            .copied()
            .filter(|&z| {
                !known
                    .iter()
                    .any(|&(d, p)| k % d == 0 && p.dist(z) <= exclusion)
            })
            .collect();
        stats.candidates += jobs.len();
        let roots: Vec<Option<(usize, Point)>> = jobs
            .par_iter()
            .map(|&z0| {
                let z = newton(h, z0, k, steps)?;
                Some((minimal_period(h, z, k, steps), z))
            })
            .collect();
        for r in roots {
            let Some((d, z)) = r else {
                stats.dropped += 1;
                continue;
            };
            stats.converged += 1;
            if unique.iter().any(|&(_, u)| u.dist(z) <= CLUSTER_RADIUS)
                || known.iter().any(|&(_, u)| u.dist(z) <= CLUSTER_RADIUS)
            {
                continue;
            }
            unique.push((d, z));
            let mut w = z;
            known.push((d, w));
            for _ in 1..d {
                w = propagate(h, w, 1.0, steps)?.0;
                known.push((d, w));
            }
        }
    }
    unique.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.x.total_cmp(&b.1.x))
            .then(a.1.y.total_cmp(&b.1.y))
    });
    let verified: Vec<Result<Option<PeriodicOrbitRecord>, FlowError>> = unique
        .par_iter()
        .map(|&(k, z)| verified_record(h, z, k, steps, None))
        .collect();
    let mut records = Vec::new();
    for v in verified {
        match v? {
            Some(r) => records.push(r),
            None => stats.rejected += 1,
        }
    }
    Ok(OrbitSearch {
        records,
        identity: false,
        global_period: None,
        stats,
    })
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error("period cutoff must be at least 1")]
    ZeroCutoff,
}

/// Periodic points of period `≤ K`, sorted by period then position.
pub fn find_periodic_orbits(h: &Spec, cfg: &SearchConfig) -> Result<OrbitSearch, SpectrumError> {
    if cfg.period_max == 0 {
        return Err(SpectrumError::ZeroCutoff);
    }
    let mut out = match h.radial_profile() {
        Some(g) => radial_search(h, &g, cfg)?,
        None => newton_search(h, cfg)?,
    };
    out.records.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then(a.point.x.total_cmp(&b.point.x))
            .then(a.point.y.total_cmp(&b.point.y))
    });
    Ok(out)
}

/// Plain and weighted boundary rotation number estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    /// `(θ_N − θ_0) / 2πN`.
    pub plain: f64,
    /// Smoothly weighted Birkhoff average of the per-iterate angle advance.
    pub weighted: f64,
}

const SUBSTEPS: usize = 64;

/// Boundary circle dynamics integrated on `∂𝔻`; the lift is accumulated over
/// `1/64` time slices so every increment stays well below `π/2`.
pub fn boundary_rotation(
    h: &Spec,
    iterates: usize,
    steps_per_unit: usize,
) -> Result<RotationEstimate, FlowError> {
    let n = iterates.max(1);
    let slice = 1.0 / SUBSTEPS as f64;
    let slice_steps = (steps_per_unit / SUBSTEPS).max(2);
    let mut z = Point::new(1.0, 0.0);
    let mut t0 = 0.0;
    let mut advances = Vec::with_capacity(n);
    for _ in 0..n {
        let mut turn = 0.0;
        for _ in 0..SUBSTEPS {
            let (w, _) = propagate_from(h, z, t0, slice, slice_steps)?;
            let d = z.cross(w).atan2(z.dot(w));
            if d.abs() > std::f64::consts::FRAC_PI_2 {
                return Err(FlowError::StepRejection {
                    t: t0,
                    reason: "boundary angle jump".into(),
                });
            }
            turn += d;
            // renormalize onto the circle to keep the lift free of radial drift
            z = w * w.norm().recip();
            t0 = (t0 + slice) % 1.0;
        }
        advances.push(turn / TAU);
    }
    let plain = advances.iter().sum::<f64>() / n as f64;
    let weight = |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            (-1.0 / (x * (1.0 - x))).exp()
        }
    };
    let ws: Vec<f64> = (0..n)
        .map(|j| weight((j as f64 + 0.5) / n as f64))
        .collect();
    let wsum: f64 = ws.iter().sum();
    let weighted = ws.iter().zip(&advances).map(|(w, a)| w * a).sum::<f64>() / wsum;
    Ok(RotationEstimate { plain, weighted })
}

/// Boundary rotation number (weighted estimate) from `iterates` turns of the
/// boundary map at the default resolution.
pub fn boundary_rotation_number(h: &Spec, iterates: usize) -> Result<f64, FlowError> {
    boundary_rotation(h, iterates, DEFAULT_STEPS_PER_UNIT).map(|r| r.weighted)
}

/// `(1/N) Σ_{j<N} σ(φ^j z)`, read off the action integrand over `[0, N]`.
pub fn birkhoff_mean_action(h: &Spec, z: Point, iterates: usize) -> Result<f64, FlowError> {
    let n = iterates.max(1);
    let (_, total) = propagate(h, z, n as f64, n * DEFAULT_STEPS_PER_UNIT)?;
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub orbits: Vec<PeriodicOrbitRecord>,
    pub period_cutoff: usize,
    /// Actions of period-one records, sorted.
    pub spec_actions: Vec<f64>,
    /// Mean actions of interior records (points and circles), sorted and
    /// deduplicated; a finite sample of the interior mean action spectrum.
    pub interior_mean_spectrum_sample: Vec<f64>,
    pub boundary_rotation: f64,
    /// Birkhoff mean of `σ` along the boundary orbit of `(1, 0)`.
    pub boundary_mean_action: f64,
    pub identity: bool,
    pub global_period: Option<usize>,
    pub stats: SearchStats,
}

fn sorted_dedup(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

/// Orbit search plus boundary data.
pub fn interior_mean_spectrum(
    h: &Spec,
    cfg: &SearchConfig,
) -> Result<SpectrumReport, SpectrumError> {
    let search = find_periodic_orbits(h, cfg)?;
    let rotation = boundary_rotation(h, cfg.rotation_iterates, cfg.steps_per_unit)?;
    let (_, boundary_total) = propagate(
        h,
        Point::new(1.0, 0.0),
        cfg.rotation_iterates as f64,
        cfg.rotation_iterates * cfg.steps_per_unit,
    )?;
    let spec_actions = sorted_dedup(
        search
            .records
            .iter()
            .filter(|r| r.period == 1)
            .map(|r| r.action_total)
            .collect(),
        1e-12,
    );
    let sample = sorted_dedup(
        search
            .records
            .iter()
            .filter(|r| r.location.is_interior())
            .map(|r| r.mean_action)
            .collect(),
        1e-12,
    );
    Ok(SpectrumReport {
        orbits: search.records,
        period_cutoff: cfg.period_max,
        spec_actions,
        interior_mean_spectrum_sample: sample,
        boundary_rotation: rotation.weighted,
        boundary_mean_action: boundary_total / cfg.rotation_iterates as f64,
        identity: search.identity,
        global_period: search.global_period,
        stats: search.stats,
    })
}

impl SpectrumReport {
    /// One row per orbit: `x, y, period, residual, action, mean_action, location`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "x",
            "y",
            "period",
            "residual",
            "action",
            "mean_action",
            "location",
        ])?;
        for r in &self.orbits {
            out.write_record([
                r.point.x.to_string(),
                r.point.y.to_string(),
                r.period.to_string(),
                format!("{:e}", r.residual),
                r.action_total.to_string(),
                r.mean_action.to_string(),
                r.location.label(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{precompose_rotation, FourierMode, RadialPoly};

    fn cfg(k: usize) -> SearchConfig {
        SearchConfig::default().with_period_max(k)
    }

    #[test]
    fn irrational_rotation_has_only_the_origin() {
        let s = find_periodic_orbits(&Spec::rotation(0.37), &cfg(8)).unwrap();
        assert_eq!(s.records.len(), 1);
        let r = &s.records[0];
        assert_eq!(r.point, Point::origin());
        assert!((r.action_total - 0.37 * PI).abs() < 1e-12);
        assert_eq!(s.global_period, None);
    }

    #[test]
    fn bump_fixed_points() {
        let s = find_periodic_orbits(&Spec::bump4(), &cfg(1)).unwrap();
        let circles: Vec<_> = s
            .records
            .iter()
            .filter(|r| matches!(r.location, OrbitLocation::DegenerateCircle { .. }))
            .collect();
        assert_eq!(s.records[0].action_total, 0.0);
        assert!(circles.iter().any(|r| (r.action_total - 1.0).abs() < 1e-9));
        for r in &s.records {
            assert!(r.residual <= 1e-9);
            assert_eq!(r.mean_action * r.period as f64, r.action_total);
        }
    }

    #[test]
    fn zero_is_identity() {
        let s = find_periodic_orbits(&Spec::zero(), &cfg(3)).unwrap();
        assert!(s.identity);
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.records[0].action_total, 0.0);
    }

    #[test]
    fn rotation_numbers() {
        let r = boundary_rotation_number(&Spec::rotation(0.37), 200).unwrap();
        assert!((r - 0.37).abs() < 1e-4);
        let b = boundary_rotation_number(&Spec::bump4(), 200).unwrap();
        assert!((b - 4.0 / PI).abs() < 1e-3);
        let p = boundary_rotation_number(&precompose_rotation(&Spec::bump4(), 1), 200).unwrap();
        assert!((p - (4.0 / PI - 1.0)).abs() < 1e-3);
    }

    #[test]
    fn birkhoff_examples() {
        let a = birkhoff_mean_action(&Spec::bump4(), Point::new(0.0, 1.0), 200).unwrap();
        assert!((a - 4.0).abs() < 5e-2);
        assert_eq!(
            birkhoff_mean_action(&Spec::bump4(), Point::origin(), 1).unwrap(),
            0.0
        );
        let s = (4.0 + PI / 2.0) / 8.0;
        let m = birkhoff_mean_action(&Spec::bump4(), Point::from_polar_s(s, 1.0), 50).unwrap();
        assert!((m - 4.0 * s * s).abs() < 1e-3);
    }

    #[test]
    fn perturbed_search_finds_verified_fixed_points() {
        let h = Spec::perturbed(
            RadialPoly::bump4(),
            vec![FourierMode {
                amplitude: 0.03,
                time_freq: 1,
                angular_freq: 1,
                phase: 0.0,
                radial_power: 0,
            }],
        );
        let s = find_periodic_orbits(&h, &cfg(2).with_grid(24)).unwrap();
        assert!(!s.records.is_empty());
        for r in &s.records {
            let (w, _) = propagate(&h, r.point, r.period as f64, r.period * 4000).unwrap();
            assert!(w.dist(r.point) <= 1e-9);
        }
        assert!(s
            .records
            .iter()
            .any(|r| r.period == 1 && r.mean_action < 0.2));
        assert!(s
            .records
            .iter()
            .any(|r| r.period == 1 && r.mean_action > 3.0));
    }

    #[test]
    fn csv_has_one_row_per_orbit() {
        let rep = interior_mean_spectrum(
            &Spec::bump4(),
            &SearchConfig {
                rotation_iterates: 10,
                ..cfg(2)
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), rep.orbits.len() + 1);
        assert!(text.starts_with("x,y,period,residual,action,mean_action,location"));
    }
}
