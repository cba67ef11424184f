//! Host-side view: allocate bitvectors, issue `bbop` instructions and see
//! where the time goes.

use ambit::bits::BitRow;
use ambit::config::SimConfig;
use ambit::controller::BbopKind;
use ambit::runtime::{BbopInstruction, BbopOutcome, Runtime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rt = Runtime::new(SimConfig::default()).unwrap();
    let len = 4 * rt.row_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // same group: row i of each vector shares a subarray
    let g = rt.new_group();
    let a = rt.alloc(len, g).unwrap();
    let b = rt.alloc(len, g).unwrap();
    let out = rt.alloc(len, g).unwrap();
    let (va, vb) = (BitRow::random(len, &mut rng), BitRow::random(len, &mut rng));
    rt.write(&a, &va).unwrap();
    rt.write(&b, &vb).unwrap();

    rt.reset_costs();
    rt.bbop(BbopKind::Xor, &out, &a, Some(&b)).unwrap();
    assert_eq!(rt.read(&out).unwrap(), &va ^ &vb);
    report("grouped xor, 4 rows", &rt);

    // a vector from another group has to be moved next to its partner first
    let other = rt.new_group();
    let c = rt.alloc(len, other).unwrap();
    rt.write(&c, &vb).unwrap();
    rt.reset_costs();
    rt.bbop(BbopKind::Xor, &out, &a, Some(&c)).unwrap();
    assert_eq!(rt.read(&out).unwrap(), &va ^ &vb);
    report("ungrouped xor, 4 rows", &rt);

    // dirty cache lines over the sources are written back first
    let addr = rt.address_of(a.segments[0]);
    rt.host_store(addr, &[0xff; 256]).unwrap();
    rt.reset_costs();
    rt.bbop(BbopKind::And, &out, &a, Some(&b)).unwrap();
    report("and after a host write", &rt);

    // not row aligned: the host does it
    let row = rt.row_bytes() as u64;
    let instr = BbopInstruction {
        op: BbopKind::Or,
        dst: rt.address_of(out.segments[0]) + 64,
        src1: rt.address_of(a.segments[0]) + 64,
        src2: Some(rt.address_of(b.segments[0]) + 64),
        size: row / 2,
    };
    rt.reset_costs();
    match rt.bbop_execute(instr).unwrap() {
        BbopOutcome::HostFallback { reason, host_ns } => println!("misaligned or: {reason:?}, {host_ns:.1} ns on the host"),
        BbopOutcome::InMemory { .. } => unreachable!(),
    }

    for h in [&a, &b, &out, &c] {
        rt.free(h);
    }
}

fn report(what: &str, rt: &Runtime) {
    let l = rt.ledger();
    println!(
        "{what}: {:.0} ns simulated ({:.0} ns coherence), {:.0} ns on the host channel, {} rows staged, {} transfers",
        l.sim_ns(),
        l.coherence_ns,
        l.baseline_ns,
        l.staged_rows,
        l.transfers
    );
}
