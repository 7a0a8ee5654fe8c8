use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use discflow::action::{action_of_loop, calabi as calabi_of, CalabiMethod};
use discflow::flow::integrate_orbit;
use discflow::hamiltonian::{
    build_mollified, grad_bound_outside_disc, hofer_norm, HoferRegion, MollifierProfile,
};
use discflow::harness::{
    check_hutchings_inverse, degree_length_suite, exit_code, run_all, run_check, HarnessConfig,
    VerdictStatus, VerificationVerdict, CHECKS,
};
use discflow::radial::{covering_slope_range, tangent_spectrum, tangent_sweep};
use discflow::spectrum::interior_mean_spectrum;
use discflow::{Hamiltonian, Point};
use serde::Serialize;
use serde_json::json;

use crate::{CheckName, Format, Settings};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

pub fn orbit(s: &Settings, x: Option<f64>, y: Option<f64>, t_end: Option<f64>) -> Result<u8> {
    let [fx, fy] = s.file.start.unwrap_or([0.5, 0.0]);
    let z0 = Point::new(x.unwrap_or(fx), y.unwrap_or(fy));
    let t = t_end.or(s.file.t_end).unwrap_or(1.0);
    let steps = ((s.search.steps_per_unit as f64) * t).ceil().max(1.0) as usize;
    let trace = integrate_orbit(&s.family.spec, z0, t, steps)?;
    let loop_action = action_of_loop(&s.family.spec, &trace).ok();
    let summary = json!({
        "family": s.family.name,
        "start": trace.start(),
        "end": trace.end(),
        "t_end": t,
        "steps": steps,
        "closure_gap": trace.closure_gap(),
        "winding": trace.winding(),
        "action": trace.total_action(),
        "loop_action": loop_action,
    });
    let json_path = s.path("orbit.json");
    write_json(&json_path, &summary)?;
    announce(&json_path);
    let csv_path = s.path("orbit.csv");
    write_csv(
        &csv_path,
        &["t", "x", "y", "action"],
        trace
            .samples
            .iter()
            .zip(&trace.action_integrand)
            .map(|(&(t, p), a)| {
                vec![
                    t.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    a.to_string(),
                ]
            }),
    )?;
    announce(&csv_path);
    println!("{}", serde_json::to_string(&summary)?);
    Ok(0)
}

pub fn spectrum(s: &Settings) -> Result<u8> {
    let report = interior_mean_spectrum(&s.family.spec, &s.search)?;
    match s.format {
        Format::Json => {
            let path = s.path("spectrum.json");
            write_json(&path, &report)?;
            announce(&path);
        }
        Format::Csv => {
            let path = s.path("spectrum.csv");
            report.write_csv(File::create(&path)?)?;
            announce(&path);
        }
    }
    let plot = s.path("mean_action_vs_radius.csv");
    write_csv(
        &plot,
        &["radius", "mean_action", "period", "location"],
        report.orbits.iter().map(|r| {
            vec![
                r.point.norm().to_string(),
                r.mean_action.to_string(),
                r.period.to_string(),
                r.location.label(),
            ]
        }),
    )?;
    announce(&plot);
    println!(
        "{} orbits, {} interior mean actions, boundary rotation {:.9}, a = {:.9}",
        report.orbits.len(),
        report.interior_mean_spectrum_sample.len(),
        report.boundary_rotation,
        PI * report.boundary_rotation,
    );
    Ok(0)
}

pub fn radial_spec(s: &Settings) -> Result<u8> {
    let Some(g) = s.family.spec.radial_profile() else {
        bail!("{} is not radial", s.family.name);
    };
    let range = covering_slope_range(&g);
    let spectrum = tangent_spectrum(&g, range)?;
    let params = serde_json::to_string(&s.family.spec)?;
    let rows = tangent_sweep(&s.family.name, &params, &g, range, s.search.steps_per_unit)?;
    match s.format {
        Format::Json => {
            let path = s.path("radial_spectrum.json");
            write_json(&path, &json!({ "spectrum": spectrum, "sweep": rows }))?;
            announce(&path);
        }
        Format::Csv => {
            let path = s.path("radial_spectrum.csv");
            write_csv(
                &path,
                &["family", "s", "k", "value", "oracle_value", "abs_err"],
                rows.iter().map(|r| {
                    vec![
                        r.family.clone(),
                        r.s.to_string(),
                        r.k.to_string(),
                        r.value.to_string(),
                        r.oracle_value.to_string(),
                        format!("{:e}", r.abs_err),
                    ]
                }),
            )?;
            announce(&path);
        }
    }
    let plot = s.path("tangent_intercept.csv");
    let n = 1000;
    write_csv(
        &plot,
        &["s", "g", "g_prime", "intercept"],
        (0..=n).map(|i| {
            let x = i as f64 / n as f64;
            vec![
                x.to_string(),
                g.value(x).to_string(),
                g.deriv(x).to_string(),
                g.intercept(x).to_string(),
            ]
        }),
    )?;
    announce(&plot);
    let worst = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    println!(
        "{} tangent levels, largest loop-action mismatch {worst:.3e}",
        rows.len()
    );
    Ok(0)
}

pub fn calabi(s: &Settings) -> Result<u8> {
    let time_space = calabi_of(&s.family.spec, CalabiMethod::TimeSpace)?;
    let sigma_average = calabi_of(&s.family.spec, CalabiMethod::SigmaAverage)?;
    let summary = json!({
        "family": s.family.name,
        "calabi_h": time_space,
        "calabi_sigma": sigma_average,
        "ratio": sigma_average / time_space,
        "cal_norm": sigma_average / PI,
    });
    let path = s.path("calabi.json");
    write_json(&path, &summary)?;
    announce(&path);
    println!("{}", serde_json::to_string(&summary)?);
    Ok(0)
}

#[derive(Serialize)]
struct MollifyRow {
    n: u32,
    support_radius: f64,
    support_exact: bool,
    sup_outside: f64,
    grad_sup_outside: f64,
    hofer_collar: f64,
    refined_min_slope: f64,
    refined_slope_floor: f64,
}

pub fn mollify_diag(s: &Settings, ns: Vec<u32>) -> Result<u8> {
    let base = if s.explicit_family {
        s.family.spec.clone()
    } else {
        Hamiltonian::rotation(0.5)
    };
    let ns = if ns.is_empty() {
        s.file
            .n_list
            .clone()
            .unwrap_or_else(|| (2..=8).map(|k| 1 << k).collect())
    } else {
        ns
    };
    let mut rows = Vec::new();
    for n in ns {
        let h = build_mollified(&base, n, false)?;
        let edge = 1.0 + 1.0 / n as f64;
        let mut support_exact = true;
        let mut sup: f64 = 0.0;
        for j in 0..64 {
            let th = j as f64 * PI / 32.0;
            for i in 0..=1000 {
                let r = 1.0 + (edge - 1.0) * 1.5 * i as f64 / 1000.0;
                let z = Point::from_polar(r, th);
                let v = h.eval(0.0, z);
                if z.norm() > edge && v != 0.0 {
                    support_exact = false;
                }
                sup = sup.max(v.abs());
            }
        }
        let refined = MollifierProfile::<f64>::refined();
        let min_slope = (0..=20_000)
            .map(|i| refined.unscaled(n, i as f64 / 20_000.0).1)
            .fold(f64::INFINITY, f64::min);
        rows.push(MollifyRow {
            n,
            support_radius: edge,
            support_exact,
            sup_outside: sup,
            grad_sup_outside: grad_bound_outside_disc(&h)?,
            hofer_collar: hofer_norm(&h, HoferRegion::Annulus(n)),
            refined_min_slope: min_slope,
            refined_slope_floor: -1.0 / n as f64,
        });
    }
    match s.format {
        Format::Json => {
            let path = s.path("mollify_diag.json");
            write_json(&path, &rows)?;
            announce(&path);
        }
        Format::Csv => {
            let path = s.path("mollify_diag.csv");
            write_csv(
                &path,
                &[
                    "n",
                    "support_radius",
                    "support_exact",
                    "sup_outside",
                    "grad_sup_outside",
                    "hofer_collar",
                    "refined_min_slope",
                    "refined_slope_floor",
                ],
                rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        r.support_radius.to_string(),
                        r.support_exact.to_string(),
                        r.sup_outside.to_string(),
                        r.grad_sup_outside.to_string(),
                        r.hofer_collar.to_string(),
                        r.refined_min_slope.to_string(),
                        r.refined_slope_floor.to_string(),
                    ]
                }),
            )?;
            announce(&path);
        }
    }
    for r in &rows {
        println!(
            "n = {:>4}  sup {:.3e}  grad {:.4}  refined slope {:.6} (floor {:.6})  support exact {}",
            r.n, r.sup_outside, r.grad_sup_outside, r.refined_min_slope, r.refined_slope_floor, r.support_exact
        );
    }
    Ok(0)
}

pub fn verify(s: &Settings, check: CheckName) -> Result<u8> {
    let mut cfg = HarnessConfig {
        search: s.search,
        tol: s.tol,
        seed: s.seed,
        ..HarnessConfig::default()
    };
    if let Some(ns) = &s.file.n_list {
        cfg.wind_ns = ns.clone();
    }
    let chosen = s.explicit_family.then(|| vec![s.family.clone()]);
    let verdicts: Vec<VerificationVerdict> = match (check, &chosen) {
        (CheckName::All, None) => run_all(&cfg)?,
        (CheckName::All, Some(fams)) => {
            let mut out = Vec::new();
            for name in CHECKS {
                out.extend(run_check(name, Some(fams), &cfg)?);
            }
            if s.family.spec.inverse_autonomous().is_some() {
                out.push(check_hutchings_inverse(&s.family, &cfg)?);
            }
            out.push(degree_length_suite(cfg.seed, 400, 4000)?);
            out
        }
        (one, fams) => run_check(one.as_str(), fams.as_deref(), &cfg)?,
    };
    let mut by_check: BTreeMap<&str, Vec<&VerificationVerdict>> = BTreeMap::new();
    for v in &verdicts {
        by_check.entry(v.check_name.as_str()).or_default().push(v);
    }
    for (name, group) in &by_check {
        let path = s.path(&format!("verdict_{name}.json"));
        write_json(&path, group)?;
        announce(&path);
    }
    for v in &verdicts {
        println!("{:<18} {:<22} {}", v.check_name, v.family, v.status);
    }
    let violations = verdicts
        .iter()
        .filter(|v| v.status == VerdictStatus::Violation)
        .count();
    if violations > 0 {
        eprintln!("{violations} violation(s)");
    }
    Ok(exit_code(&verdicts) as u8)
}
