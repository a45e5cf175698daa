mod common;

use common::{instance, prediction_run, spec, LISTED};
use nbvb::ensemble::SensingGraph;

#[test]
fn verified_sets_match_predictions_on_girth_six_graphs() {
    for (k, (_, l, r)) in LISTED.iter().enumerate() {
        for (j, alpha) in [0.2, 0.4, 0.55].into_iter().enumerate() {
            let inst = instance(&spec(l, r, 2000, alpha), (10 * k + j) as u64, true);
            let obs = prediction_run(&inst);
            assert!(obs.rounds >= 2);
            assert!(
                obs.mismatches.is_empty(),
                "{l} / {r} at {alpha}: {:?}",
                obs.mismatches
            );
        }
    }
}

// Shares a check with a variable on a 4-cycle.
fn near_four_cycle(g: &SensingGraph<f64>, v: usize) -> bool {
    g.var_adj(v).0.iter().any(|&c| {
        g.chk_adj(c as usize)
            .0
            .iter()
            .any(|&u| g.var_in_four_cycle(u as usize))
    })
}

#[test]
fn mismatches_stay_next_to_four_cycles() {
    let mut seen = 0;
    for seed in 0..6 {
        let inst = instance(&spec("x^3", "x^4", 400, 0.45), seed, false);
        for (_, _, a, b) in prediction_run(&inst).mismatches {
            for v in a.into_iter().chain(b) {
                seen += 1;
                assert!(near_four_cycle(&inst.graph, v), "seed {seed}, variable {v}");
            }
        }
    }
    assert!(seen > 0);
}
