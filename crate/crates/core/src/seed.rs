//! Deterministic seed derivation.

/// SplitMix64 finalizer: a bijective 64-bit mix.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` under `namespace`, derived from `root`.
pub fn derive(root: u64, namespace: u64, index: u64) -> u64 {
    mix64(mix64(mix64(root) ^ namespace).wrapping_add(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_indices_and_namespaces() {
        let mut seen = std::collections::HashSet::new();
        for ns in 0..4 {
            for i in 0..1000 {
                assert!(seen.insert(derive(7, ns, i)));
            }
        }
    }
}
