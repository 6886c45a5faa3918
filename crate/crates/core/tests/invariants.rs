use polarforge::bec::{bhattacharyya, bhattacharyya_chain};
use polarforge::coding::{polar_encode, polar_transform, ScDecoder};
use polarforge::designer::design;
use polarforge::ga::{evolve, ChannelParam};
use polarforge::order::{comparable, PosetRelation};
use polarforge::{ChannelIndex, Comparison, DesignSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_an_involution(bits in prop::collection::vec(0u8..2, 64)) {
        let mut x = bits.clone();
        polar_transform(&mut x);
        polar_transform(&mut x);
        prop_assert_eq!(x, bits);
    }

    #[test]
    fn design_partitions_channels(n in 1u32..9, frac in 0.0f64..=1.0, s2 in 0.1f64..4.0) {
        let len = 1u64 << n;
        let k = (frac * len as f64).round() as u64;
        let d = design(&DesignSpec::ga(n, k, s2)).unwrap();
        prop_assert_eq!(d.info.len() as u64, k);
        let mut all: Vec<u64> = d.info.iter().chain(&d.frozen).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
    }

    #[test]
    fn noiseless_decoding_recovers_message(n in 1u32..8, s2 in 0.2f64..2.0, seed in any::<u64>()) {
        let len = 1usize << n;
        let d = design(&DesignSpec::ga(n, len as u64 / 2, s2)).unwrap();
        let mask = d.is_frozen_mask();
        let u: Vec<u8> = (0..len)
            .map(|i| if mask[i] { 0 } else { ((seed >> (i % 64)) & 1) as u8 })
            .collect();
        let x = polar_encode(&u, n).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
        let mut dec = ScDecoder::<f64>::new(n, mask).unwrap();
        prop_assert_eq!(dec.decode(&llr).unwrap(), u);
    }

    #[test]
    fn ga_means_grow_along_single_additions(n in 1u32..10, s2 in 0.1f64..4.0, k in any::<u64>()) {
        let k = k & ((1u64 << n) - 1);
        let m = evolve(n, ChannelParam::new(s2).unwrap());
        for b in 0..n {
            if k & (1 << b) == 0 {
                prop_assert!(m[k as usize] <= m[(k | (1 << b)) as usize]);
            }
        }
    }

    #[test]
    fn bec_chain_matches_table(n in 1u32..8, k in any::<u64>(), eps in 0.01f64..0.99) {
        let k = k & ((1u64 << n) - 1);
        let table = bhattacharyya(n, eps);
        let one = bhattacharyya_chain(ChannelIndex::new(n, k).unwrap(), eps);
        prop_assert!((table[k as usize] - one).abs() <= 1e-15);
    }

    #[test]
    fn search_agrees_with_closure(a in 0u64..64, b in 0u64..64) {
        let rel = PosetRelation::build(6, 3).unwrap();
        let got = comparable(ChannelIndex::new(6, a).unwrap(), ChannelIndex::new(6, b).unwrap(), 3).unwrap();
        prop_assert_eq!(got, rel.compare(a, b));
        if a == b {
            prop_assert_eq!(got, Comparison::Equal);
        }
    }
}
