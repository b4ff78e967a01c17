//! Labeled seed derivation.
//!
//! All randomness in a run flows from a single root seed; each stage derives
//! its own stream seed from the root and a stable label, so adding or
//! reordering stages never shifts another stage's stream.

/// FNV-1a hash of the label folded into the root by a splitmix round.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = root ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_label_sensitive() {
        let a = derive_seed(1, "sample");
        assert_eq!(a, derive_seed(1, "sample"));
        assert_ne!(a, derive_seed(1, "net"));
        assert_ne!(a, derive_seed(2, "sample"));
    }
}
