use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use qp_spectral::cyclic_group::{classify, enumerate_tij, tij_count, DigitSet};
use qp_spectral::padic::Prime;

/// Homogeneous subsets grouped by their branching levels, from a full sweep.
fn homogeneous_by_levels(p: Prime, gamma: u32) -> BTreeMap<Vec<u32>, BTreeSet<Vec<u64>>> {
    let n = p.pow(gamma);
    let mut out: BTreeMap<Vec<u32>, BTreeSet<Vec<u64>>> = BTreeMap::new();
    for mask in 1u64..1 << n {
        let c = DigitSet::new(p, gamma, (0..n).filter(|i| mask >> i & 1 == 1)).unwrap();
        let v = classify(&c, false);
        if let Some(i) = v.i {
            out.entry(i).or_default().insert(c.elements());
        }
    }
    out
}

#[test]
fn enumeration_matches_exhaustive_filter() {
    for (p, gamma) in [(2u64, 1u32), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)] {
        let p = Prime::new(p).unwrap();
        let expected = homogeneous_by_levels(p, gamma);
        for mask in 0u32..1 << gamma {
            let levels: BTreeSet<u32> = (0..gamma).filter(|i| mask >> i & 1 == 1).collect();
            let key: Vec<u32> = levels.iter().copied().collect();
            let stream: Vec<Vec<u64>> = enumerate_tij(p, gamma, &levels).unwrap().map(|c| c.elements()).collect();
            let distinct: BTreeSet<Vec<u64>> = stream.iter().cloned().collect();
            assert_eq!(distinct.len(), stream.len(), "duplicates for I={:?}", key);
            assert_eq!(Some(&distinct), expected.get(&key), "p={} γ={} I={:?}", p, gamma, key);
            assert_eq!(BigUint::from(stream.len()), tij_count(p, gamma, &levels));
        }
    }
}
