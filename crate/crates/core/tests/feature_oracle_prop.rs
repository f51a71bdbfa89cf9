// SPDX-License-Identifier: Apache-2.0

//! Randomized window geometry against the brute-force feature oracle.

#[path = "common/oracle.rs"]
mod oracle;

use momentburst::features::{scan_windows, FEATURE_NAMES};
use momentburst::{FeatureConfig, StreamConfig};
use oracle::{close, oracle_features, rough_stream, OracleParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn streamed_features_match_oracle(
        seed in any::<u64>(),
        delta in prop::sample::select(vec![20i64, 30, 60]),
        span in 2i64..=4,
        k in 2usize..=6,
        rate in 2u32..=5,
    ) {
        let omega = delta * span;
        // room for the planted 120 s burst at the midpoint
        let duration = (omega * (k as i64 + 3)).max(300);
        let messages = rough_stream(seed, rate, duration);
        let stream = StreamConfig { delta, omega, k, t0: None };
        let p = OracleParams { delta, omega, k, ceiling: (k as i64 * omega) as f64, ..Default::default() };

        let mut got = std::collections::BTreeMap::new();
        scan_windows(&messages, stream, &FeatureConfig::for_stream(&stream), |history, cands, _| {
            if history.len() >= 2 {
                for (tok, raw) in &cands.tokens {
                    got.insert((cands.end_time, tok.to_string()), raw.to_array());
                }
            }
            Ok(())
        })
        .unwrap();
        let want = oracle_features(&messages, &p);

        prop_assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
        for (key, w) in &want {
            let g = &got[key];
            for i in 0..12 {
                prop_assert!(close(g[i], w[i], 1e-9), "{:?} {}: streamed {} oracle {}", key, FEATURE_NAMES[i], g[i], w[i]);
            }
        }
    }
}
