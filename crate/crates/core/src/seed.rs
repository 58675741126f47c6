//! Seed splitting.
//!
//! Every random stream in an experiment is keyed by `(master_seed, trial_index, lane)`.
//! The derived seed only depends on those three numbers, so adding trials never
//! changes the seeds of existing ones and the execution order is irrelevant.

/// Stream used to draw the channel of a trial.
pub const LANE_CHANNEL: u64 = 0;
/// Stream used to draw training symbols and noise of a trial.
pub const LANE_STREAM: u64 = 1;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(master) ^ trial) ^ lane)`.
pub fn mix(master_seed: u64, trial_index: u64, lane: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ trial_index) ^ lane)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn distinct_lanes_and_trials() {
        let mut seen = HashSet::new();
        for trial in 0..1000 {
            for lane in [LANE_CHANNEL, LANE_STREAM] {
                assert!(seen.insert(mix(7, trial, lane)));
            }
        }
    }

    #[test]
    fn splitmix_reference_value() {
        // first output of the reference SplitMix64 generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
