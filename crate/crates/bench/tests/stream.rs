// SPDX-License-Identifier: Apache-2.0

use momentburst_bench::stream;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    // benchmark inputs must not drift between runs
    #[test]
    fn stream_is_seeded_and_ordered(seed in any::<u64>(), duration in 120i64..=600) {
        let a = stream(duration, seed);
        let b = stream(duration, seed);
        prop_assert_eq!(&a, &b);
        prop_assert!(!a.is_empty());
        prop_assert!(a.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        prop_assert!(a.iter().all(|m| (0..duration).contains(&(m.timestamp - a[0].timestamp))));
    }
}
