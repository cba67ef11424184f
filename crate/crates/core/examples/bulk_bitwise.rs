//! Every bulk bitwise operation on a pair of random rows, checked against
//! the CPU.

use ambit::bits::BitRow;
use ambit::controller::{AmbitController, BbopKind, RowAddress};
use ambit::dram::ChipConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let bits = 4096;
    let mut ctl = AmbitController::with_config(ChipConfig::default().with_row_bits(bits)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a = BitRow::random(bits, &mut rng);
    let b = BitRow::random(bits, &mut rng);

    let (ra, rb) = (RowAddress::data(0, 0, 0), RowAddress::data(0, 0, 1));
    ctl.write(ra, &a).unwrap();
    ctl.write(rb, &b).unwrap();

    for (i, kind) in BbopKind::ALL.into_iter().enumerate() {
        let dst = RowAddress::data(0, 0, 2 + i as u16);
        let src2 = (kind.arity() == 2).then_some(rb);
        let trace = ctl.exec_bbop(kind, dst, ra, src2).unwrap();
        let got = ctl.read(dst).unwrap();
        let ok = got == kind.apply(&a, Some(&b));
        println!(
            "{:<5} {:>2} commands  popcount {:>4}  {}",
            kind.name(),
            trace.len(),
            got.count_ones(),
            if ok { "ok" } else { "MISMATCH" }
        );
    }
    assert_eq!(ctl.read(ra).unwrap(), a, "sources are never overwritten");
}
