use parisian_core::config::{parse_entries, Entries};
use parisian_core::{run_validation_suite, RunConfig};

fn config(text: &str) -> RunConfig {
    RunConfig::resolve(&parse_entries(text).unwrap(), &Entries::new()).unwrap()
}

const BM: &str = "model.kind = bm\nmodel.mu = 0.5\nmodel.sigma = 1\n";
const CL: &str = "model.kind = cl\nmodel.mu = 1\nmodel.jump_rate = 1\nmodel.jump_mean = 0.5\n";

#[test]
fn suite_passes_for_closed_form_models() {
    for text in [BM, CL] {
        let report = run_validation_suite(&config(text)).unwrap();
        assert!(report.checks.len() > 40);
        assert!(report.all_pass(), "{:#?}", report.failures().collect::<Vec<_>>());
        for c in &report.checks {
            assert!(c.rel_err.is_finite() && c.lhs.is_finite() && c.rhs.is_finite(), "{c:?}");
        }
    }
}

#[test]
fn loose_quadrature_is_caught() {
    let report = run_validation_suite(&config(&format!("{BM}quad.rel_tol = 10\n"))).unwrap();
    assert!(!report.all_pass());
}
