//! Small combinatorial and RNG helpers shared across modules.
//!
//! Everything here is exact: counts are `u128`/`BigInt`, never floats.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Binomial coefficient C(n, k) as an exact big integer.
pub(crate) fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Binomial coefficient C(n, k) as u128; panics on overflow (desk-scale
/// parameters never approach it).
pub(crate) fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflow")
            / (i + 1) as u128;
    }
    acc
}

/// Falling factorial n·(n−1)···(n−k+1) as u128.
pub(crate) fn falling_factorial_u128(n: u64, k: u64) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("falling factorial overflow");
    }
    acc
}

/// Falling factorial as an exact big integer.
pub(crate) fn falling_factorial_big(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
    }
    acc
}

/// Lexicographic unranking of a k-combination of {0, .., n−1}.
///
/// Rank 0 is [0, 1, .., k−1]; the last rank is [n−k, .., n−1]. Inverse of
/// [`combination_rank`].
pub(crate) fn combination_unrank(n: u64, k: u64, mut rank: u128) -> Option<Vec<u64>> {
    if rank >= binomial_u128(n, k) {
        return None;
    }
    let mut out = Vec::with_capacity(k as usize);
    let mut next = 0u64; // smallest value still available
    for remaining in (1..=k).rev() {
        let mut c = next;
        loop {
            // combinations that start at c: C(n-1-c, remaining-1)
            let count = binomial_u128(n - 1 - c, remaining - 1);
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    Some(out)
}

/// Lexicographic rank of a strictly increasing k-combination of {0, .., n−1}.
#[cfg_attr(not(test), allow(dead_code))] // round-trip oracle for unranking
pub(crate) fn combination_rank(n: u64, combo: &[u64]) -> u128 {
    let k = combo.len() as u64;
    let mut rank: u128 = 0;
    let mut prev = 0u64;
    for (pos, &c) in combo.iter().enumerate() {
        let remaining = k - pos as u64 - 1;
        for skipped in prev..c {
            rank += binomial_u128(n - 1 - skipped, remaining);
        }
        prev = c + 1;
    }
    rank
}

/// Lexicographic unranking of a permutation of {0, .., n−1} (Lehmer code).
pub(crate) fn permutation_unrank(n: u64, mut rank: u128) -> Option<Vec<u64>> {
    if rank >= falling_factorial_u128(n, n) {
        return None;
    }
    let mut available: Vec<u64> = (0..n).collect();
    let mut out = Vec::with_capacity(n as usize);
    for pos in (1..=n).rev() {
        let block = falling_factorial_u128(pos - 1, pos - 1); // (pos-1)!
        let idx = (rank / block) as usize;
        rank %= block;
        out.push(available.remove(idx));
    }
    Some(out)
}

/// In-place successor for a strictly increasing k-combination of {0, .., n−1}
/// in lexicographic order. Returns false after the last combination.
pub(crate) fn combination_next(n: u64, combo: &mut [u64]) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) as u64 {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// SplitMix64 step; the standard 64-bit finalizer used to derive independent
/// substream seeds from (master seed, counter) pairs.
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of substream `index` from a master seed. Distinct indices
/// give statistically independent ChaCha streams, so trials can run in
/// parallel in any order while staying reproducible.
pub(crate) fn substream_seed(master: u64, index: u64) -> u64 {
    let mut s = master ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial_u128(7, 2), 21);
        assert_eq!(binomial_u128(8, 5), 56);
        assert_eq!(binomial_u128(4, 0), 1);
        assert_eq!(binomial_u128(3, 5), 0);
        assert_eq!(binomial_big(52, 26).to_string(), "495918532948104");
    }

    #[test]
    fn combination_roundtrip_all_ranks() {
        let (n, k) = (7u64, 3u64);
        let total = binomial_u128(n, k);
        let mut seen = Vec::new();
        for rank in 0..total {
            let combo = combination_unrank(n, k, rank).unwrap();
            assert!(combo.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(combination_rank(n, &combo), rank);
            seen.push(combo);
        }
        // lexicographic order
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(combination_unrank(n, k, total), None);
    }

    #[test]
    fn combination_next_agrees_with_unrank() {
        let (n, k) = (6u64, 4u64);
        let mut combo = combination_unrank(n, k, 0).unwrap();
        let mut rank = 0u128;
        loop {
            assert_eq!(combo, combination_unrank(n, k, rank).unwrap());
            rank += 1;
            if !combination_next(n, &mut combo) {
                break;
            }
        }
        assert_eq!(rank, binomial_u128(n, k));
    }

    #[test]
    fn permutation_unrank_is_lexicographic_and_complete() {
        let n = 4u64;
        let mut perms = Vec::new();
        for rank in 0..falling_factorial_u128(n, n) {
            perms.push(permutation_unrank(n, rank).unwrap());
        }
        assert_eq!(perms.len(), 24);
        assert!(perms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(perms[0], vec![0, 1, 2, 3]);
        assert_eq!(perms[23], vec![3, 2, 1, 0]);
    }

    #[test]
    fn substream_seeds_differ() {
        let a = substream_seed(42, 0);
        let b = substream_seed(42, 1);
        let c = substream_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        // deterministic
        assert_eq!(a, substream_seed(42, 0));
    }
}
