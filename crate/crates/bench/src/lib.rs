// SPDX-License-Identifier: Apache-2.0

//! Shared inputs for the benchmarks.

use momentburst::synth::generate;
use momentburst::{BurstSpec, Message, SynthConfig};

/// Default-rate synthetic stream of `duration` seconds with one planted burst.
pub fn stream(duration: i64, seed: u64) -> Vec<Message> {
    let cfg = SynthConfig {
        duration,
        seed,
        bursts: vec![BurstSpec {
            start: duration / 2,
            length: 60,
            tokens: vec!["goal".into(), "gooal".into()],
            intensity: 20.0,
            volume_boost: 1.0,
        }],
        ..Default::default()
    };
    generate(&cfg).expect("valid config").0
}
