//! Stable LSD radix sort on `u32` keys.

const BITS: u32 = 11;
const BUCKETS: usize = 1 << BITS;
const SMALL: usize = 512;

/// Stable sort of `items` by key, where every key is at most `max_key`.
pub(crate) fn sort<P: Copy>(items: &mut Vec<(u32, P)>, tmp: &mut Vec<(u32, P)>, max_key: u32) {
    if items.len() <= SMALL {
        items.sort_by_key(|&(k, _)| k);
        return;
    }
    let key_bits = 32 - max_key.leading_zeros();
    let mut shift = 0;
    while shift < key_bits {
        let mut counts = [0usize; BUCKETS];
        for &(k, _) in items.iter() {
            counts[((k >> shift) as usize) & (BUCKETS - 1)] += 1;
        }
        let mut total = 0;
        for c in counts.iter_mut() {
            let n = *c;
            *c = total;
            total += n;
        }
        tmp.clear();
        tmp.resize(items.len(), items[0]);
        for &item in items.iter() {
            let b = ((item.0 >> shift) as usize) & (BUCKETS - 1);
            tmp[counts[b]] = item;
            counts[b] += 1;
        }
        std::mem::swap(items, tmp);
        shift += BITS;
    }
}

/// Sort of bare keys.
pub(crate) fn sort_keys(keys: &mut Vec<u32>, tmp: &mut Vec<u32>, max_key: u32) {
    if keys.len() <= SMALL {
        keys.sort_unstable();
        return;
    }
    let key_bits = 32 - max_key.leading_zeros();
    let mut shift = 0;
    while shift < key_bits {
        let mut counts = [0usize; BUCKETS];
        for &k in keys.iter() {
            counts[((k >> shift) as usize) & (BUCKETS - 1)] += 1;
        }
        let mut total = 0;
        for c in counts.iter_mut() {
            let n = *c;
            *c = total;
            total += n;
        }
        tmp.clear();
        tmp.resize(keys.len(), 0);
        for &k in keys.iter() {
            let b = ((k >> shift) as usize) & (BUCKETS - 1);
            tmp[counts[b]] = k;
            counts[b] += 1;
        }
        std::mem::swap(keys, tmp);
        shift += BITS;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_stable_sort(keys in proptest::collection::vec(0u32..5_000_000, 0..3000)) {
            let mut items: Vec<(u32, usize)> = keys.iter().copied().zip(0..).collect();
            let mut expected = items.clone();
            expected.sort_by_key(|&(k, _)| k);
            let max = keys.iter().copied().max().unwrap_or(0);
            sort(&mut items, &mut Vec::new(), max);
            prop_assert_eq!(items, expected);

            let mut bare = keys.clone();
            let mut want = keys;
            want.sort_unstable();
            sort_keys(&mut bare, &mut Vec::new(), max);
            prop_assert_eq!(bare, want);
        }
    }
}
