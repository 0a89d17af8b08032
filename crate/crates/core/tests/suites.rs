use legsphere::suites::{run_suite, Suite, SuiteConfig};

#[test]
fn all_suites_pass_at_defaults() {
    let cfg = SuiteConfig::new(2, 0.1).unwrap();
    let reports = run_suite(Suite::All, &cfg).unwrap();
    assert!(reports.len() >= 20);
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.line()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn isotopy_suite_passes_at_large_eps() {
    let mut cfg = SuiteConfig::new(1, 0.4).unwrap();
    cfg.grid = 200;
    let reports = run_suite(Suite::Isotopy, &cfg).unwrap();
    assert!(reports.iter().all(|r| r.pass), "{:#?}", reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
}

#[test]
fn every_suite_has_a_negative_control() {
    let mut cfg = SuiteConfig::new(1, 0.1).unwrap();
    cfg.grid = 200;
    for suite in [Suite::Jet, Suite::Surgery, Suite::Chart, Suite::Isotopy, Suite::Constructions, Suite::Openbook] {
        let reports = run_suite(suite, &cfg).unwrap();
        let controls: Vec<_> = reports.iter().filter(|r| r.check.starts_with("negative control")).collect();
        assert!(!controls.is_empty(), "{suite}");
        for c in controls {
            assert!(c.pass, "{}", c.line());
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = SuiteConfig::new(2, 0.1).unwrap();
    cfg.t_count = 2;
    assert!(run_suite(Suite::Jet, &cfg).is_err());
    cfg.t_count = 101;
    cfg.eps = 0.5;
    assert!(run_suite(Suite::Jet, &cfg).is_err());
}
