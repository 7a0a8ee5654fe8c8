use discflow::harness::{
    catalog, check_boundary_in_closure, check_hutchings, check_hutchings_inverse, check_membership,
    check_quantitative_brouwer, check_wind_bound, exit_code, run_check, Family, HarnessConfig,
    HarnessError, MembershipTarget, VerdictStatus,
};
use discflow::spectrum::SearchConfig;
use discflow::Hamiltonian;

fn with_k(k: usize) -> HarnessConfig {
    HarnessConfig {
        search: SearchConfig::default().with_period_max(k),
        ..HarnessConfig::default()
    }
}

fn radial_catalog() -> Vec<Family> {
    catalog::shipped()
        .into_iter()
        .filter(|f| f.spec.radial_profile().is_some())
        .collect()
}

#[test]
fn inverse_isotopy_bracket_holds_on_radial_families() {
    for f in radial_catalog()
        .iter()
        .filter(|f| f.spec.inverse_autonomous().is_some())
    {
        let v = check_hutchings_inverse(f, &with_k(16)).unwrap();
        assert_eq!(
            v.status,
            VerdictStatus::WitnessFound,
            "{}: {}",
            f.name,
            v.evidence
        );
    }
}

#[test]
fn radial_bump_reaches_the_boundary_action() {
    let f = Family::new("bump", Hamiltonian::bump4());
    let cfg = HarnessConfig {
        tol: Some(0.2),
        ..with_k(32)
    };
    let v = check_boundary_in_closure(&f, &cfg).unwrap();
    assert_eq!(v.status, VerdictStatus::WitnessFound, "{}", v.evidence);
    assert!((v.evidence["a"].as_f64().unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn verdicts_never_downgrade_as_the_cutoff_grows() {
    let f = Family::new("bump", Hamiltonian::bump4());
    let mut last: Option<[VerdictStatus; 2]> = None;
    for k in [4, 8, 16, 32] {
        let cfg = with_k(k);
        let statuses = [
            check_hutchings(&f, &cfg).unwrap().status,
            check_boundary_in_closure(&f, &cfg).unwrap().status,
        ];
        if let Some(prev) = last {
            for (p, s) in prev.iter().zip(&statuses) {
                assert!(
                    !(*p == VerdictStatus::WitnessFound && *s != VerdictStatus::WitnessFound),
                    "K = {k}"
                );
            }
        }
        last = Some(statuses);
    }
}

#[test]
fn winding_verdict_is_stable_in_n() {
    let f = Family::new("rot", Hamiltonian::rotation(0.5));
    let mut seen_witness = false;
    for n in [8, 32, 128] {
        let cfg = HarnessConfig {
            wind_ns: vec![n],
            ..HarnessConfig::default()
        };
        let ok = check_wind_bound(&f, &cfg).unwrap().status == VerdictStatus::WitnessFound;
        assert!(!(seen_witness && !ok), "downgrade at n = {n}");
        seen_witness |= ok;
    }
    assert!(seen_witness);
}

#[test]
fn wind_rejects_boundary_rotation_at_least_one() {
    let f = Family::new("rot", Hamiltonian::rotation(1.2));
    assert!(matches!(
        check_wind_bound(&f, &HarnessConfig::default()),
        Err(HarnessError::PreconditionRho(_))
    ));
}

#[test]
fn rotation_brouwer_window() {
    let f = Family::new("rot", Hamiltonian::rotation(0.5));
    let v = check_quantitative_brouwer(&f, &HarnessConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::WitnessFound);
    assert_eq!(v.evidence["k"].as_f64(), Some(0.0));
}

#[test]
fn no_shipped_family_violates_membership() {
    let verdicts = run_check("membership", None, &HarnessConfig::default()).unwrap();
    assert!(verdicts
        .iter()
        .all(|v| v.status != VerdictStatus::Violation));
    let sweep = check_membership(
        &MembershipTarget::RotationSweep(catalog::rotation_sweep()),
        None,
    )
    .unwrap();
    assert_eq!(sweep.status, VerdictStatus::WitnessFound);
    assert_eq!(exit_code(&[sweep]), 0);
}

#[test]
fn radial_checks_over_the_cheap_catalog_never_violate() {
    let cfg = with_k(8);
    let families = radial_catalog();
    for name in ["hutchings", "closure", "brouwer"] {
        let verdicts = run_check(name, Some(&families), &cfg).unwrap();
        assert_eq!(verdicts.len(), families.len());
        assert!(
            verdicts
                .iter()
                .all(|v| v.status != VerdictStatus::Violation),
            "{name}"
        );
        let names: Vec<&str> = verdicts.iter().map(|v| v.family.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
