mod common;

use proptest::prelude::*;

#[test]
fn ten_thousand_random_steps_balance() {
    let n = common::conservation_run(0x5eed, 10_000, 1e-9).unwrap();
    assert!(n >= 10_000);
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn books_balance_for_any_seed(seed in any::<u64>()) {
        let r = common::conservation_run(seed, 200, 1e-9);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}
