use std::path::PathBuf;

use mas_sim::acceptance::{run_acceptance, CRITERIA};

#[test]
fn acceptance_suite() {
    let suite = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let report = run_acceptance(&suite);
    for line in report.lines() {
        println!("{line}");
    }
    assert_eq!(report.verdicts.len(), CRITERIA.len());
    let failed: Vec<u32> = report.verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
