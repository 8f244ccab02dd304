//! Medial-axis retraction against uniform sampling on the rhombus fixture.

use hasp_bench::fixtures::make_rhombus;
use hasp_bench::{run_trial, RunStats};
use hasp_core::planners::PlannerSettings;

/// Mean over the trial's queries of each returned path's minimum clearance.
fn trial_clearance(stats: &RunStats) -> f64 {
    let c: Vec<f64> = stats
        .queries
        .iter()
        .map(|q| q.min_clearance.expect("every rhombus query is solved"))
        .collect();
    c.iter().sum::<f64>() / c.len() as f64
}

#[test]
fn maprm_paths_keep_more_clearance_than_basic() {
    let sc = make_rhombus();
    let settings = PlannerSettings::default();
    let mut wins = 0;
    for seed in 0..20 {
        let ma = run_trial(&sc, "maprm", seed, &settings).unwrap().stats;
        let basic = run_trial(&sc, "basic", seed, &settings).unwrap().stats;
        let (m, b) = (trial_clearance(&ma), trial_clearance(&basic));
        println!("seed {seed}: maprm {m:.3} basic {b:.3}");
        if m >= b {
            wins += 1;
        }
    }
    println!("maprm at least as clear in {wins}/20 trials");
    assert!(wins >= 16, "{wins}/20");
}
