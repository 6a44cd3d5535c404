//! Seed splitting.
//!
//! A master seed fans out into independent streams with SplitMix64:
//! `derive(master, stream) = mix(master ^ mix(stream + 1))`. Stream
//! [`SCENARIO_STREAM`] drives geometry, [`SOLVER_STREAM`] drives samplers.
//! Within a sampler, restart `r` runs ChaCha8 seeded with the solver seed on
//! stream `r`.

pub const SCENARIO_STREAM: u64 = 0;
pub const SOLVER_STREAM: u64 = 1;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: u64) -> u64 {
    mix(master ^ mix(stream.wrapping_add(1)))
}

pub fn scenario_seed(master: u64) -> u64 {
    derive(master, SCENARIO_STREAM)
}

pub fn solver_seed(master: u64) -> u64 {
    derive(master, SOLVER_STREAM)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        assert_ne!(scenario_seed(7), solver_seed(7));
        assert_ne!(scenario_seed(7), scenario_seed(8));
        assert_eq!(derive(42, 3), derive(42, 3));
    }
}
