//! Union, intersection and difference of many sets stored as bitvectors,
//! next to a balanced-tree cost estimate.

use ambit::config::SimConfig;
use ambit::runtime::Runtime;
use ambit::workloads::{set_op, SetInstance, SetOpKind};

fn main() {
    let (m, domain) = (15, 1 << 19);
    let mut rt = Runtime::new(SimConfig::default()).unwrap();
    println!("{m} sets over 1..={domain}");
    println!("{:>6} {:>13} {:>8} {:>10} {:>10} {:>12}", "size", "op", "result", "sim ns", "host ns", "tree ns");
    for e in [16, 64, 1024, 4096, 16384] {
        let inst = SetInstance::random(m, domain, e, e as u64);
        for kind in [SetOpKind::Union, SetOpKind::Intersection, SetOpKind::Difference] {
            let r = set_op(&mut rt, kind, &inst).unwrap();
            println!(
                "{e:>6} {:>13} {:>8} {:>10.0} {:>10.0} {:>12.0}",
                format!("{kind:?}").to_lowercase(),
                r.elements.len(),
                r.sim_ns,
                r.baseline_ns,
                r.rbtree_ns_estimate
            );
        }
    }
}
