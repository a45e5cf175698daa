mod common;

use common::{bookkeeping_run, events_correct, instance, spec, LISTED};
use nbvb::scalar::Tolerances;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn residuals_match_recomputation(
        seed in 0u64..100_000,
        n in 50usize..=1000,
        alpha in 0.05f64..0.8,
        which in 0usize..4,
        oracle in any::<bool>(),
    ) {
        let (_, l, r) = LISTED[which];
        let s = spec(l, r, n, alpha);
        prop_assume!(s.plan().is_ok());
        let inst = instance(&s, seed, false);
        for tol in [Tolerances::exact(), Tolerances::default()] {
            let (boundaries, failures) = bookkeeping_run(&inst, oracle, tol);
            prop_assert!(boundaries >= 1);
            prop_assert!(failures.is_empty(), "{:?}", &failures[..failures.len().min(3)]);
        }
    }

    #[test]
    fn no_event_disagrees_with_the_signal(
        seed in 0u64..100_000,
        alpha in 0.05f64..0.75,
        which in 0usize..4,
    ) {
        let (_, l, r) = LISTED[which];
        let inst = instance(&spec(l, r, 2000, alpha), seed, false);
        let (events, ok) = events_correct(&inst);
        prop_assert!(events > 0);
        prop_assert!(ok);
    }
}
