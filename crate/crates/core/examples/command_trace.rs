//! The command sequence behind one operation, as CSV, plus its primitive
//! breakdown for every operation.

use std::io;

use ambit::controller::{symbolic_trace, BbopKind};
use ambit::trace::{Command, Primitive};

fn main() {
    let op: BbopKind = std::env::args().nth(1).as_deref().unwrap_or("xor").parse().unwrap();
    symbolic_trace(op).write_csv(io::stdout()).unwrap();

    println!();
    println!("{:<5} {:>4} {:>3} {:>9} {:>10}", "op", "AAP", "AP", "ACTIVATE", "PRECHARGE");
    for kind in BbopKind::ALL {
        let t = symbolic_trace(kind);
        println!(
            "{:<5} {:>4} {:>3} {:>9} {:>10}",
            kind.name(),
            t.count(Primitive::Aap),
            t.count(Primitive::Ap),
            t.count_command(Command::Activate),
            t.count_command(Command::Precharge)
        );
    }
}
