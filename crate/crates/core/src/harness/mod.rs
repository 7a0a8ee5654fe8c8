//! Executable checks of the disc theorems on computable families.
//!
//! Sampled spectra only bound the true infimum from above and the supremum
//! from below, so a bracket that fails on a sample is reported as
//! `INCONCLUSIVE`. `VIOLATION` is reserved for closed-form quantities that
//! contradict a theorem by more than ten times the comparison tolerance.

pub mod catalog;
pub mod loops;

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::action::{calabi, ActionError, CalabiMethod};
use crate::flow::{integrate_orbit, FlowError};
use crate::geometry::{GeometryError, PlanePoint};
use crate::hamiltonian::{build_mollified, HamiltonianError, HamiltonianSpec, RadialProfile};
use crate::radial::{
    covering_slope_range, rotation_closed_form, rotation_spectral_invariants,
    staircase_gap_certificate, tangent_spectrum, RadialError,
};
use crate::spectrum::{
    boundary_rotation_number, interior_mean_spectrum, SearchConfig, SpectrumError, SpectrumReport,
};
use crate::tolerances::{
    BRACKET_SLACK, BROUWER_SLACK, DEFAULT_STEPS_PER_UNIT, MEMBERSHIP_SLACK, WIND_MARGIN,
};

pub use catalog::Family;
pub use loops::{degree_length_suite, AnnulusLoop};

type Point = PlanePoint<f64>;
type Spec = HamiltonianSpec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    WitnessFound,
    Inconclusive,
    Violation,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::WitnessFound => "WITNESS_FOUND",
            Self::Inconclusive => "INCONCLUSIVE",
            Self::Violation => "VIOLATION",
        }
    }
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationVerdict {
    pub check_name: String,
    pub status: VerdictStatus,
    pub evidence: Value,
    pub family: String,
    pub spec: Option<Spec>,
}

impl VerificationVerdict {
    fn new(check: &str, family: &Family, status: VerdictStatus, evidence: Value) -> Self {
        Self {
            check_name: check.into(),
            status,
            evidence,
            family: family.name.clone(),
            spec: Some(family.spec.clone()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("boundary rotation |rho| = {0} is not below 1")]
    PreconditionRho(f64),
    #[error("{0}")]
    NotApplicable(String),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Run parameters shared by the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub search: SearchConfig,
    /// Overrides the per-check default tolerance when set.
    pub tol: Option<f64>,
    pub wind_ns: Vec<u32>,
    /// Radial and angular seed counts per collar for the winding check.
    pub wind_radial: usize,
    pub wind_angular: usize,
    /// Seed of the randomized loop suite.
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            tol: None,
            wind_ns: vec![8, 32, 128],
            wind_radial: 8,
            wind_angular: 64,
            seed: 0,
        }
    }
}

fn extremes(sample: &[f64]) -> Option<(f64, f64)> {
    let min = sample.iter().copied().reduce(f64::min)?;
    let max = sample.iter().copied().reduce(f64::max)?;
    Some((min, max))
}

/// `min(sample) ≤ Cal/π ≤ max(sample)` on the sampled interior mean spectrum.
pub fn check_hutchings(
    family: &Family,
    cfg: &HarnessConfig,
) -> Result<VerificationVerdict, HarnessError> {
    let report = interior_mean_spectrum(&family.spec, &cfg.search)?;
    hutchings_from(family, &report, cfg)
}

fn hutchings_from(
    family: &Family,
    report: &SpectrumReport,
    cfg: &HarnessConfig,
) -> Result<VerificationVerdict, HarnessError> {
    let h = &family.spec;
    let calabi_sigma = calabi(h, CalabiMethod::SigmaAverage)?;
    let calabi_h = calabi(h, CalabiMethod::TimeSpace)?;
    let cal_norm = calabi_sigma / PI;
    let tol = cfg.tol.unwrap_or(BRACKET_SLACK);
    let sample = &report.interior_mean_spectrum_sample;
    let (status, min, max) = match extremes(sample) {
        Some((min, max)) if min <= cal_norm + tol && cal_norm <= max + tol => {
            (VerdictStatus::WitnessFound, Some(min), Some(max))
        }
        Some((min, max)) => (VerdictStatus::Inconclusive, Some(min), Some(max)),
        None => (VerdictStatus::Inconclusive, None, None),
    };
    let evidence = json!({
        "cal_norm": cal_norm,
        "calabi_sigma": calabi_sigma,
        "calabi_h": calabi_h,
        "area": PI,
        "sample_min": min,
        "sample_max": max,
        "sample_size": sample.len(),
        "tol": tol,
        "period_cutoff": report.period_cutoff,
        "boundary_rotation": report.boundary_rotation,
        "search": report.stats,
    });
    Ok(VerificationVerdict::new(
        "hutchings",
        family,
        status,
        evidence,
    ))
}

/// Hutchings bracket for the inverse of an autonomous radial isotopy (`g ↦ −g`).
pub fn check_hutchings_inverse(
    family: &Family,
    cfg: &HarnessConfig,
) -> Result<VerificationVerdict, HarnessError> {
    let inv = family.spec.inverse_autonomous().ok_or_else(|| {
        HarnessError::NotApplicable(format!("{} has no closed-form inverse", family.name))
    })?;
    let inv_family = Family::new(format!("{}_inverse", family.name), inv);
    let mut v = check_hutchings(&inv_family, cfg)?;
    v.check_name = "hutchings_inverse".into();
    Ok(v)
}

/// Default closure tolerance `max(0.1, 4π/K)`.
pub fn closure_tolerance(period_max: usize) -> f64 {
    (4.0 * PI / period_max.max(1) as f64).max(0.1)
}

/// Some sampled interior mean action within `tol` of `a = πρ`.
pub fn check_boundary_in_closure(
    family: &Family,
    cfg: &HarnessConfig,
) -> Result<VerificationVerdict, HarnessError> {
    let report = interior_mean_spectrum(&family.spec, &cfg.search)?;
    Ok(closure_from(family, &report, cfg))
}

fn closure_from(
    family: &Family,
    report: &SpectrumReport,
    cfg: &HarnessConfig,
) -> VerificationVerdict {
    let tol = cfg
        .tol
        .unwrap_or_else(|| closure_tolerance(cfg.search.period_max));
    let a = PI * report.boundary_rotation;
    let nearest = report
        .interior_mean_spectrum_sample
        .iter()
        .copied()
        .min_by(|x, y| (x - a).abs().total_cmp(&(y - a).abs()));
    let distance = nearest.map(|v| (v - a).abs());
    let status = match distance {
        Some(d) if d <= tol => VerdictStatus::WitnessFound,
        _ => VerdictStatus::Inconclusive,
    };
    let evidence = json!({
        "a": a,
        "boundary_rotation": report.boundary_rotation,
        "boundary_mean_action": report.boundary_mean_action,
        "nearest_mean_action": nearest,
        "distance": distance,
        "tol": tol,
        "period_cutoff": report.period_cutoff,
        "sample_size": report.interior_mean_spectrum_sample.len(),
    });
    VerificationVerdict::new("closure", family, status, evidence)
}

/// An interior fixed point with `|σ(x) − πk| ≤ π`, `k = ⌊a/π⌋`.
pub fn check_quantitative_brouwer(
    family: &Family,
    cfg: &HarnessConfig,
) -> Result<VerificationVerdict, HarnessError> {
    let search = SearchConfig {
        period_max: 1,
        ..cfg.search
    };
    let report: SpectrumReport = interior_mean_spectrum(&family.spec, &search)?;
    let a = PI * report.boundary_rotation;
    let k = (a / PI).floor();
    let bound = PI + cfg.tol.unwrap_or(BROUWER_SLACK);
    let best = report
        .orbits
        .iter()
        .filter(|r| r.period == 1 && r.location.is_interior())
        .min_by(|x, y| {
            (x.action_total - PI * k)
                .abs()
                .total_cmp(&(y.action_total - PI * k).abs())
        });
    let status = match best {
        Some(r) if (r.action_total - PI * k).abs() <= bound => VerdictStatus::WitnessFound,
        _ => VerdictStatus::Inconclusive,
    };
    let evidence = json!({
        "a": a,
        "k": k,
        "bound": bound,
        "witness": best,
        "deviation": best.map(|r| (r.action_total - PI * k).abs()),
        "fixed_points": report.orbits.iter().filter(|r| r.period == 1).count(),
    });
    Ok(VerificationVerdict::new(
        "brouwer", family, status, evidence,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CollarWinding {
    n: u32,
    segments: usize,
    discarded: usize,
    max_abs_wind: f64,
    min_wind: f64,
    max_wind: f64,
}

fn collar_windings(
    h: &Spec,
    n: u32,
    radial: usize,
    angular: usize,
) -> Result<CollarWinding, HarnessError> {
    let hn = build_mollified(h, n, true)?;
    let width = 1.0 / n as f64;
    let seeds: Vec<Point> = (0..radial)
        .flat_map(|i| {
            let r = 1.0 + width * (i as f64 + 0.5) / radial as f64;
            (0..angular).map(move |j| Point::from_polar(r, TAU * j as f64 / angular as f64))
        })
        .collect();
    let winds: Result<Vec<Option<f64>>, FlowError> = seeds
        .par_iter()
        .map(|&z| {
            let trace = integrate_orbit(&hn, z, 1.0, DEFAULT_STEPS_PER_UNIT)?;
            if trace.samples.iter().any(|(_, p)| p.norm() < 1.0) {
                return Ok(None);
            }
            Ok(trace.winding())
        })
        .collect();
    let kept: Vec<f64> = winds?.into_iter().flatten().collect();
    Ok(CollarWinding {
        n,
        segments: kept.len(),
        discarded: seeds.len() - kept.len(),
        max_abs_wind: kept.iter().fold(0.0, |m, w| m.max(w.abs())),
        min_wind: kept.iter().copied().fold(f64::INFINITY, f64::min),
        max_wind: kept.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Time-one windings of collar orbits of the refined mollification stay below one turn.
pub fn check_wind_bound(
    family: &Family,
    cfg: &HarnessConfig,
) -> Result<VerificationVerdict, HarnessError> {
    let rho = boundary_rotation_number(&family.spec, cfg.search.rotation_iterates)?;
    if rho.abs() >= 1.0 {
        return Err(HarnessError::PreconditionRho(rho.abs()));
    }
    if cfg.wind_ns.is_empty() {
        return Err(HarnessError::NotApplicable(
            "no mollifier indices given".into(),
        ));
    }
    let rows = cfg
        .wind_ns
        .iter()
        .map(|&n| collar_windings(&family.spec, n, cfg.wind_radial, cfg.wind_angular))
        .collect::<Result<Vec<_>, _>>()?;
    let largest = rows.iter().max_by_key(|r| r.n).expect("non-empty");
    let margin = cfg.tol.unwrap_or(WIND_MARGIN);
    let status = if largest.segments > 0 && largest.max_abs_wind < 1.0 - margin {
        VerdictStatus::WitnessFound
    } else {
        VerdictStatus::Inconclusive
    };
    let evidence = json!({
        "boundary_rotation": rho,
        "margin": margin,
        "per_n": rows,
    });
    Ok(VerificationVerdict::new("wind", family, status, evidence))
}

/// What the membership check runs on.
#[derive(Debug, Clone)]
pub enum MembershipTarget {
    RotationSweep(Vec<f64>),
    Radial(Family),
}

#[derive(Debug, Clone, Serialize)]
struct RotationMembership {
    rho: f64,
    c_plus: f64,
    c_minus: f64,
    failed: Vec<&'static str>,
    c_plus_spectral: bool,
    c_minus_spectral: bool,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Membership clauses for one rotation; returns the failed clause names.
fn rotation_clauses(rho: f64, tol: f64) -> RotationMembership {
    let inv = rotation_spectral_invariants(rho);
    let (cp, cm) = (inv.c_plus, inv.c_minus);
    let spec = PI * rho;
    let in_spec = |c: f64| close(c, spec, tol);
    let mut failed = Vec::new();
    if !(in_spec(cp) || close(cp, 0.0, tol) || close(cp, PI, tol)) {
        failed.push("c_plus in spec, 0 or A");
    }
    if !(in_spec(cm) || close(cm, 0.0, tol) || close(cm, -PI, tol)) {
        failed.push("c_minus in spec, 0 or -A");
    }
    if -1.0 < rho && rho <= 1.0 && !(in_spec(cp) || close(cp, 0.0, tol)) {
        failed.push("-1 < rho <= 1: c_plus in spec or 0");
    }
    if (0.0..=1.0).contains(&rho) && !in_spec(cp) {
        failed.push("0 <= rho <= 1: c_plus in spec");
    }
    if (-1.0..1.0).contains(&rho) && !(in_spec(cm) || close(cm, 0.0, tol)) {
        failed.push("-1 <= rho < 1: c_minus in spec or 0");
    }
    if (-1.0..=0.0).contains(&rho) && !in_spec(cm) {
        failed.push("-1 <= rho <= 0: c_minus in spec");
    }
    if rho > 0.0 && cp <= 0.0 {
        failed.push("rho > 0: c_plus > 0");
    }
    if rho < 0.0 && cm >= 0.0 {
        failed.push("rho < 0: c_minus < 0");
    }
    if cp - cm > PI + tol {
        failed.push("gamma <= A");
    }
    if cm > cp + tol {
        failed.push("c_minus <= c_plus");
    }
    let (fp, fm) = rotation_closed_form(rho);
    if !close(cp, fp, tol) || !close(cm, fm, tol) {
        failed.push("closed form");
    }
    // non-spectral corners: c_plus leaves the spectrum exactly when rho > 1 or rho < 0
    let corner_plus = !(0.0..=1.0).contains(&rho);
    if corner_plus == in_spec(cp) {
        failed.push("c_plus spectral outside the corner cases");
    }
    let corner_minus = !(-1.0..=0.0).contains(&rho);
    if corner_minus == in_spec(cm) {
        failed.push("c_minus spectral outside the corner cases");
    }
    RotationMembership {
        rho,
        c_plus: cp,
        c_minus: cm,
        failed,
        c_plus_spectral: in_spec(cp),
        c_minus_spectral: in_spec(cm),
    }
}

fn radial_membership(family: &Family, tol: f64) -> Result<VerificationVerdict, HarnessError> {
    let profile = family
        .spec
        .radial_profile()
        .ok_or_else(|| HarnessError::NotApplicable(format!("{} is not radial", family.name)))?;
    if profile.is_affine() {
        let rho = -profile.deriv(0.0) / PI;
        let row = rotation_clauses(rho, tol);
        let status = if row.failed.is_empty() {
            VerdictStatus::WitnessFound
        } else {
            VerdictStatus::Violation
        };
        return Ok(VerificationVerdict::new(
            "membership",
            family,
            status,
            json!({ "rotation": row }),
        ));
    }
    if let RadialProfile::Staircase(st) = &profile {
        let cert = staircase_gap_certificate(st.lambda(), st.eps(), st.height())?;
        // c_+ ≥ M and c_+ ∈ Spec ∪ {0} ∪ {A}; with the gap, only values in [M, A] remain
        let candidates: Vec<f64> = cert
            .nonneg_values
            .iter()
            .copied()
            .chain(std::iter::once(PI))
            .filter(|&v| v >= cert.height - tol && v <= PI + tol)
            .collect();
        let status = if !cert.gap_holds || candidates.is_empty() {
            VerdictStatus::Violation
        } else {
            VerdictStatus::WitnessFound
        };
        let evidence = json!({ "gap_certificate": cert, "admissible_c_plus": candidates });
        return Ok(VerificationVerdict::new(
            "membership",
            family,
            status,
            evidence,
        ));
    }
    let spectrum = tangent_spectrum(&profile, covering_slope_range(&profile))?;
    let evidence = json!({
        "spectrum": spectrum.values(),
        "note": "c_plus is not pinned by a closed form for this profile",
    });
    Ok(VerificationVerdict::new(
        "membership",
        family,
        VerdictStatus::Inconclusive,
        evidence,
    ))
}

/// Membership of the spectral invariants, on a rotation sweep or a radial profile.
pub fn check_membership(
    target: &MembershipTarget,
    tol: Option<f64>,
) -> Result<VerificationVerdict, HarnessError> {
    let tol = tol.unwrap_or(MEMBERSHIP_SLACK);
    match target {
        MembershipTarget::RotationSweep(rhos) => {
            let rows: Vec<RotationMembership> =
                rhos.iter().map(|&r| rotation_clauses(r, tol)).collect();
            let failures = rows.iter().filter(|r| !r.failed.is_empty()).count();
            let corners: Vec<&RotationMembership> =
                rows.iter().filter(|r| !r.c_plus_spectral).collect();
            let status = if failures == 0 {
                VerdictStatus::WitnessFound
            } else {
                VerdictStatus::Violation
            };
            let evidence = json!({
                "tol": tol,
                "failures": failures,
                "non_spectral_c_plus": corners.iter().map(|r| r.rho).collect::<Vec<_>>(),
                "rows": rows,
                "note": "homotopy invariance is exercised only through this sweep",
            });
            let family = Family::new("rotation_sweep", Spec::zero());
            let mut v = VerificationVerdict::new("membership", &family, status, evidence);
            v.spec = None;
            Ok(v)
        }
        MembershipTarget::Radial(family) => radial_membership(family, tol),
    }
}

/// Check names accepted by [`run_check`].
pub const CHECKS: [&str; 5] = ["brouwer", "closure", "hutchings", "membership", "wind"];

/// One check over a list of families. Precondition failures become
/// `INCONCLUSIVE` verdicts carrying the error text; the wind and membership
/// checks use their own family lists when `families` is `None`.
pub fn run_check(
    name: &str,
    families: Option<&[Family]>,
    cfg: &HarnessConfig,
) -> Result<Vec<VerificationVerdict>, HarnessError> {
    let shipped = catalog::shipped();
    let wind = catalog::wind_families();
    let list: &[Family] = match (name, families) {
        (_, Some(f)) => f,
        ("wind", None) => &wind,
        _ => &shipped,
    };
    let mut out: Vec<VerificationVerdict> = match name {
        "membership" => {
            let mut v = vec![check_membership(
                &MembershipTarget::RotationSweep(catalog::rotation_sweep()),
                cfg.tol,
            )?];
            for f in list.iter().filter(|f| f.spec.radial_profile().is_some()) {
                v.push(check_membership(
                    &MembershipTarget::Radial(f.clone()),
                    cfg.tol,
                )?);
            }
            v
        }
        "hutchings" | "closure" | "brouwer" | "wind" => list
            .par_iter()
            .map(|f| {
                let r = match name {
                    "hutchings" => check_hutchings(f, cfg),
                    "closure" => check_boundary_in_closure(f, cfg),
                    "brouwer" => check_quantitative_brouwer(f, cfg),
                    _ => check_wind_bound(f, cfg),
                };
                match r {
                    Err(e @ HarnessError::PreconditionRho(_)) => Ok(VerificationVerdict::new(
                        name,
                        f,
                        VerdictStatus::Inconclusive,
                        json!({ "precondition": e.to_string() }),
                    )),
                    other => other,
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
        other => {
            return Err(HarnessError::NotApplicable(format!(
                "unknown check {other}"
            )))
        }
    };
    sort_verdicts(&mut out);
    Ok(out)
}

/// Every check on the shipped catalog plus the seeded loop suite, sharing one
/// spectrum search per family between the bracket and closure checks.
pub fn run_all(cfg: &HarnessConfig) -> Result<Vec<VerificationVerdict>, HarnessError> {
    let shipped = catalog::shipped();
    let pairs = shipped
        .par_iter()
        .map(|f| {
            let report = interior_mean_spectrum(&f.spec, &cfg.search)?;
            Ok::<_, HarnessError>([
                hutchings_from(f, &report, cfg)?,
                closure_from(f, &report, cfg),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<VerificationVerdict> = pairs.into_iter().flatten().collect();
    let inverses: Vec<Family> = shipped
        .iter()
        .filter(|f| f.spec.inverse_autonomous().is_some())
        .cloned()
        .collect();
    for f in &inverses {
        out.push(check_hutchings_inverse(f, cfg)?);
    }
    for name in ["brouwer", "wind", "membership"] {
        out.extend(run_check(name, None, cfg)?);
    }
    out.push(degree_length_suite(cfg.seed, 400, 4000)?);
    sort_verdicts(&mut out);
    Ok(out)
}

/// Deterministic report order: check name, then family name.
pub fn sort_verdicts(v: &mut [VerificationVerdict]) {
    v.sort_by(|a, b| {
        a.check_name
            .cmp(&b.check_name)
            .then_with(|| a.family.cmp(&b.family))
    });
}

/// Process exit code for a set of verdicts.
pub fn exit_code(verdicts: &[VerificationVerdict]) -> i32 {
    if verdicts
        .iter()
        .any(|v| v.status == VerdictStatus::Violation)
    {
        1
    } else if verdicts
        .iter()
        .any(|v| v.status == VerdictStatus::Inconclusive)
    {
        2
    } else {
        0
    }
}
