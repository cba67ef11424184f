use ambit::bits::BitRow;
use ambit::config::SimConfig;
use ambit::controller::{AmbitController, BbopKind, RowAddress};
use ambit::dram::{charge_share_deviation, ChipConfig};
use ambit::runtime::tmr::{tmr_encode, tmr_op};
use ambit::runtime::Runtime;
use ambit::workloads::BitWeavingTable;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = BbopKind> {
    prop::sample::select(BbopKind::ALL.to_vec())
}

fn bools(len: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), len)
}

fn scalar(kind: BbopKind, a: bool, b: bool) -> bool {
    match kind {
        BbopKind::Not => !a,
        BbopKind::And => a && b,
        BbopKind::Or => a || b,
        BbopKind::Nand => !(a && b),
        BbopKind::Nor => !(a || b),
        BbopKind::Xor => a != b,
        BbopKind::Xnor => a == b,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bitrow_roundtrips(v in bools(200), off in 0usize..200) {
        let row = BitRow::from_bools(&v);
        prop_assert_eq!(row.count_ones() as usize, v.iter().filter(|&&b| b).count());
        prop_assert_eq!(BitRow::from_bytes(&row.to_bytes()).resized(200), row.clone());
        let tail = row.slice(off, 200 - off);
        prop_assert!((0..200 - off).all(|i| tail.get(i) == v[off + i]));
        prop_assert_eq!(row.iter_ones().collect::<Vec<_>>(), (0..200).filter(|&i| v[i]).collect::<Vec<_>>());
    }

    #[test]
    fn in_dram_op_matches_scalar(k in kind(), a in bools(256), b in bools(256)) {
        let mut ctl = AmbitController::with_config(ChipConfig {
            banks: 1,
            subarrays_per_bank: 1,
            ..ChipConfig::default().with_row_bits(256)
        }).unwrap();
        let (ra, rb, rd) = (RowAddress::data(0, 0, 3), RowAddress::data(0, 0, 9), RowAddress::data(0, 0, 5));
        ctl.write(ra, &BitRow::from_bools(&a)).unwrap();
        ctl.write(rb, &BitRow::from_bools(&b)).unwrap();
        ctl.exec_bbop(k, rd, ra, (k.arity() == 2).then_some(rb)).unwrap();
        let got = ctl.read(rd).unwrap();
        for i in 0..256 {
            prop_assert_eq!(got.get(i), scalar(k, a[i], b[i]), "bit {}", i);
        }
        prop_assert_eq!(ctl.read(ra).unwrap(), BitRow::from_bools(&a));
    }

    #[test]
    fn in_place_op(k in kind(), a in bools(128), b in bools(128)) {
        let mut ctl = AmbitController::with_config(ChipConfig::default().with_row_bits(128)).unwrap();
        let (ra, rb) = (RowAddress::data(1, 2, 0), RowAddress::data(1, 2, 1));
        ctl.write(ra, &BitRow::from_bools(&a)).unwrap();
        ctl.write(rb, &BitRow::from_bools(&b)).unwrap();
        ctl.exec_bbop(k, ra, ra, (k.arity() == 2).then_some(rb)).unwrap();
        let got = ctl.read(ra).unwrap();
        prop_assert!((0..128).all(|i| got.get(i) == scalar(k, a[i], b[i])));
    }

    #[test]
    fn majority_sign(caps in prop::array::uniform3(0.7f64..1.3), k in 0usize..=3) {
        // within +-30% of nominal every input combination still resolves
        let charges: Vec<f64> = (0..3).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
        let d = charge_share_deviation(&charges, &caps, 10.0, 1.2);
        prop_assert_eq!(d > 0.0, k >= 2);
        prop_assert!(d != 0.0);
    }

    #[test]
    fn tmr_commutes(k in kind(), a in bools(96), b in bools(96)) {
        let (a, b) = (BitRow::from_bools(&a), BitRow::from_bools(&b));
        let cb = tmr_encode(&b);
        let got = tmr_op(k, &tmr_encode(&a), (k.arity() == 2).then_some(&cb)).unwrap();
        prop_assert_eq!(got, tmr_encode(&k.apply(&a, Some(&b))));
    }

    #[test]
    fn slices_reassemble(values in prop::collection::vec(0u64..1 << 13, 1..300)) {
        let t = BitWeavingTable::from_values(values.clone(), 13);
        prop_assert_eq!(t.reassemble(), values);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn runtime_bbop_any_length(k in kind(), len in 1usize..5000, seed in any::<u64>(), grouped in any::<bool>()) {
        use rand::SeedableRng;
        let mut rt = Runtime::new(SimConfig {
            chip: ChipConfig { banks: 4, subarrays_per_bank: 4, ..ChipConfig::default().with_row_bits(1024) },
            ..SimConfig::default()
        }).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = rt.new_group();
        let g2 = if grouped { g } else { rt.new_group() };
        let a = rt.alloc(len, g).unwrap();
        let b = rt.alloc(len, g2).unwrap();
        let d = rt.alloc(len, g).unwrap();
        let (va, vb) = (BitRow::random(len, &mut rng), BitRow::random(len, &mut rng));
        rt.write(&a, &va).unwrap();
        rt.write(&b, &vb).unwrap();
        rt.bbop(k, &d, &a, (k.arity() == 2).then_some(&b)).unwrap();
        prop_assert_eq!(rt.read(&d).unwrap(), k.apply(&va, Some(&vb)));
        prop_assert_eq!(rt.read(&a).unwrap(), va);
        prop_assert_eq!(rt.read(&b).unwrap(), vb);
    }
}
