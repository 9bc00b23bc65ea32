//! Verification suites across seeds and configuration overrides.

use qortho::suites::{run_suite, Suite, SuiteConfig, ToleranceOverride, GENFUN_GRID, IDENTITY_GRID};

fn failures(suite: Suite, cfg: &SuiteConfig) -> Vec<String> {
    run_suite(suite, cfg)
        .unwrap()
        .into_iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} {:?} computed={} predicted={} err={:?}", r.name, r.params, r.computed, r.predicted, r.error))
        .collect()
}

#[test]
fn randomized_suites_pass_for_several_seeds() {
    for seed in [1, 7, 2024, u64::MAX] {
        let cfg = SuiteConfig { seed, ..SuiteConfig::default() };
        for suite in [Suite::QseriesIdentities, Suite::Genfun] {
            let f = failures(suite, &cfg);
            assert!(f.is_empty(), "seed {seed} {suite}: {f:#?}");
        }
    }
}

#[test]
fn grids_have_the_advertised_size() {
    let cfg = SuiteConfig::default();
    let r = run_suite(Suite::QseriesIdentities, &cfg).unwrap();
    for name in ["theta_shift", "shift_1phi1", "transform_1phi1_heine"] {
        let n = r.iter().filter(|x| x.name == format!("qseries-identities.{name}")).count();
        assert_eq!(n, IDENTITY_GRID, "{name}");
    }
    let n = r.iter().filter(|x| x.name.contains("qdiff_residual")).count();
    assert_eq!(n, IDENTITY_GRID);
    let g = run_suite(Suite::Genfun, &cfg).unwrap();
    assert_eq!(g.iter().filter(|x| x.name == "genfun.genfun_i").count(), GENFUN_GRID);
    assert_eq!(g.iter().filter(|x| x.name == "genfun.genfun_ii").count(), GENFUN_GRID);
}

#[test]
fn all_is_the_concatenation_of_the_suites() {
    let cfg = SuiteConfig::default();
    let all = run_suite(Suite::All, &cfg).unwrap();
    let mut parts = Vec::new();
    for s in Suite::EACH {
        parts.extend(run_suite(s, &cfg).unwrap());
    }
    assert_eq!(all, parts);
    assert!(all.iter().all(|r| r.pass));
}

#[test]
fn other_parameters_still_verify() {
    let cfg = SuiteConfig {
        alpha: 0.7,
        c: 1.3,
        ..SuiteConfig::default()
    };
    for suite in [Suite::Theorem41, Suite::Corollary, Suite::Bigjacobi] {
        let f = failures(suite, &cfg);
        assert!(f.is_empty(), "{suite}: {f:#?}");
    }
}

#[test]
fn impossible_tolerance_fails() {
    let cfg = SuiteConfig {
        tolerance: ToleranceOverride {
            rtol: Some(1e-30),
            atol: Some(1e-30),
        },
        ..SuiteConfig::default()
    };
    assert!(!failures(Suite::Theorem41, &cfg).is_empty());
}

#[test]
fn limit_suite_follows_r_values() {
    let cfg = SuiteConfig {
        r_values: vec![12, 24],
        ..SuiteConfig::default()
    };
    let r = run_suite(Suite::Limits, &cfg).unwrap();
    let rs: Vec<f64> = r
        .iter()
        .filter(|x| x.name == "limits.finite_r_orth" && x.params["k"] == 0.0 && x.params["l"] == 0.0)
        .map(|x| x.params["r"])
        .collect();
    assert_eq!(rs, vec![12.0, 24.0]);
    assert!(r.iter().all(|x| x.pass), "{:#?}", r.iter().filter(|x| !x.pass).collect::<Vec<_>>());
}
