//! The ten acceptance criteria, one PASS/FAIL line each.

use mcg_core::audit::{run_suite, AuditConfig, AuditReport, Status};

const CRITERIA: &[(usize, &str, &str)] = &[
    (1, "tower", "tower conditions, faithful 0-2 and scaled 0-12, <= 5 min"),
    (2, "regularity", "fixed-point freeness, 100 words, zero tolerance, <= 1 min"),
    (3, "coding", "χ†∘χ = id on 1000 sequences, good_extend unique up to length 16"),
    (4, "theta", "ϑ properties on 20 finite g, 20 pairs almost disjoint, <= 2 min"),
    (5, "blayer", "B ⊆ B₀ on 50 triples, 5 case-(b) instances, 3 removal instances"),
    (6, "surgery", "30 seeds, windows of 10³, finite x agrees past the bound, <= 5 min"),
    (7, "recognizer", "soundness on 30 images, oracle equivalence on 200 + 200, <= 10 min"),
    (8, "orders", "strict partial orders on 100 contexts × 20 points"),
    (9, "explorer", "dichotomy outcomes verify on 20 g, planted probes recovered"),
    (10, "periodic", "10³ glue steps from three sources, substitute respects equality, <= 1 min"),
];

fn line(n: usize, what: &str, rep: &AuditReport) -> String {
    let skipped = rep.checks.iter().filter(|c| c.status == Status::Skipped).count();
    let mut s = format!(
        "criterion {n:>2} [{}] {}: {} ({} checks, {skipped} skipped, {:.1}s)",
        rep.suite,
        what,
        if rep.ok() && skipped == 0 { "PASS" } else { "FAIL" },
        rep.checks.len(),
        rep.elapsed_ms as f64 / 1000.0
    );
    for c in &rep.checks {
        let tag = match c.status {
            Status::Pass => "ok",
            Status::Fail => "FAILED",
            Status::Skipped => "SKIPPED",
        };
        s.push_str(&format!("\n    {tag:<7} {:<36} [{}] {}", c.name, c.bound, c.detail));
        if let Some(cx) = &c.counterexample {
            s.push_str(&format!("\n            counterexample (seed {}): {cx}", rep.seed));
        }
    }
    s
}

#[test]
fn acceptance_criteria() {
    let cfg = AuditConfig::default();
    let mut failed = vec![];
    for &(n, suite, what) in CRITERIA {
        let rep = run_suite(suite, &cfg).expect("known suite");
        let pass = rep.ok() && rep.checks.iter().all(|c| c.status != Status::Skipped);
        println!("{}", line(n, what, &rep));
        if !pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
