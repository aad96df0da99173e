//! Seed derivation. Every random stream in a run is keyed by the master
//! seed, a purpose label and the grid coordinates, hashed with 64-bit FNV-1a
//! and finished with one SplitMix64 round.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of `master` (little-endian), `label`, a zero byte, then each part
/// (little-endian).
pub fn derive_seed(master: u64, label: &str, parts: &[u64]) -> u64 {
    let mut key = Vec::with_capacity(9 + label.len() + 8 * parts.len());
    key.extend_from_slice(&master.to_le_bytes());
    key.extend_from_slice(label.as_bytes());
    key.push(0);
    for p in parts {
        key.extend_from_slice(&p.to_le_bytes());
    }
    splitmix64(fnv1a64(&key))
}

/// Seeds for one grid cell. Methods compared in the same cell share all of
/// them, so their runs differ only in how support sets are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSeeds {
    pub partition: u64,
    pub init: u64,
    pub train: u64,
    pub target: u64,
}

impl CellSeeds {
    pub fn new(master: u64, n: usize, k: usize, input_len: usize, seed: u64) -> Self {
        let (n, k, l) = (n as u64, k as u64, input_len as u64);
        Self {
            partition: derive_seed(master, "partition", &[n, k, l, seed]),
            init: derive_seed(master, "init", &[l, seed]),
            train: derive_seed(master, "train", &[n, k, l, seed]),
            target: derive_seed(master, "target", &[k, l, seed]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the SplitMix64 generator started from state 0.
        assert_eq!(splitmix64(0), 0xe220a8397b1dcdaf);
        assert_eq!(splitmix64(0x9e3779b97f4a7c15), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn seeds_separate_purposes_and_coordinates() {
        let a = CellSeeds::new(0, 70, 5, 16, 0);
        assert_eq!(a, CellSeeds::new(0, 70, 5, 16, 0));
        let all = [a.partition, a.init, a.train, a.target];
        for i in 0..4 {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_ne!(a.partition, CellSeeds::new(0, 70, 5, 16, 1).partition);
        assert_ne!(a.partition, CellSeeds::new(1, 70, 5, 16, 0).partition);
        assert_eq!(a.init, CellSeeds::new(0, 100, 10, 16, 0).init);
    }
}
