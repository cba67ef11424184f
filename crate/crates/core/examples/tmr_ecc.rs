//! Duplicated-copy error detection commutes with bitwise operations, so
//! codewords can be operated on directly.

use ambit::bits::BitRow;
use ambit::controller::BbopKind;
use ambit::runtime::tmr::{tmr_check, tmr_encode, tmr_op};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = BitRow::random(1024, &mut rng);
    let b = BitRow::random(1024, &mut rng);
    let (ca, cb) = (tmr_encode(&a), tmr_encode(&b));

    for kind in BbopKind::ALL {
        let on_codes = tmr_op(kind, &ca, (kind.arity() == 2).then_some(&cb)).unwrap();
        let direct = tmr_encode(&kind.apply(&a, Some(&b)));
        println!("{:<5} code(a op b) == code(a) op code(b): {}", kind.name(), on_codes == direct);
    }

    let mut flipped = ca.clone();
    flipped.replica.set(300, !flipped.replica.get(300));
    println!("\nsingle flipped bit: {:?}", tmr_check(&flipped).unwrap_err());
    println!("operating on it: {:?}", tmr_op(BbopKind::And, &flipped, Some(&cb)).unwrap_err());
}
