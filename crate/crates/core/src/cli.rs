//! Command-line front end behind the `ambit` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitRow;
use crate::config::SimConfig;
use crate::controller::{decode, symbolic_trace, AddressGroup, AmbitController, BbopKind, RowAddress};
use crate::dram::{ChipConfig, Row, RowLoc, Wordline, WordlineSet};
use crate::reliability::{self, AdversarialModel};
use crate::runtime::tmr::{tmr_encode, tmr_op};
use crate::runtime::Runtime;
use crate::timing::{
    ambit_throughput, baseline_throughput, latency_of, op_energy_per_kb, BandwidthPreset, DecoderMode, OpReport,
};
use crate::workloads::{bitmap_query, scan_once, set_op, BitWeavingTable, BitmapWorkload, SetInstance, SetOpKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Variation levels swept by `mc` when none are given.
pub const DEFAULT_LEVELS: [f64; 6] = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25];

#[derive(Parser, Debug)]
#[command(name = "ambit", version, about = "In-DRAM bulk bitwise operation simulator")]
struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    banks: Option<usize>,
    #[arg(long, global = true)]
    row_bits: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check every operation against its oracle
    Verify {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 4096)]
        width: usize,
    },
    /// JSON timing/energy report for an operation or workload
    Bench {
        /// not|and|or|nand|nor|xor|xnor|bitmap|bitweaving|sets
        target: String,
        #[arg(long, default_value_t = 1 << 20)]
        users: usize,
        #[arg(long, default_value_t = 4)]
        weeks: usize,
        #[arg(long, default_value_t = 1 << 16)]
        rows: usize,
        #[arg(long, default_value_t = 12)]
        bits: u32,
        #[arg(long, default_value = "union")]
        set_op: String,
        #[arg(long, default_value_t = 15)]
        sets: usize,
        #[arg(long, default_value_t = 1 << 19)]
        domain: usize,
        #[arg(long, default_value_t = 4096)]
        elements: usize,
    },
    /// Monte-Carlo failure rate of triple-row activation, as CSV
    Mc {
        #[arg(long)]
        variation: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Command trace of one operation, as CSV
    Trace { op: String },
    /// Latency, energy and throughput tables
    Table7,
}

struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &text) {
                    let _ = writeln!(stderr, "error: {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            EXIT_OK
        }
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn load_config(cli: &Cli) -> Result<SimConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => SimConfig::load(p).map_err(usage)?,
        None => SimConfig::default(),
    };
    if let Some(b) = cli.banks {
        cfg.chip.banks = b;
    }
    if let Some(r) = cli.row_bits {
        cfg.chip.row_bits = r;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn parse_op(s: &str) -> Result<BbopKind, Failure> {
    s.parse().map_err(usage)
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Cmd::Verify { pairs, width } => verify(&cfg, *pairs, *width),
        Cmd::Bench {
            target,
            users,
            weeks,
            rows,
            bits,
            set_op,
            sets,
            domain,
            elements,
        } => match target.as_str() {
            "bitmap" => bench_bitmap(&cfg, *users, *weeks),
            "bitweaving" => bench_bitweaving(&cfg, *rows, *bits),
            "sets" => bench_sets(&cfg, set_op.parse().map_err(usage)?, *sets, *domain, *elements),
            op => {
                let kind = parse_op(op)?;
                Ok(json(&OpReport::new(
                    kind,
                    cfg.chip.banks,
                    cfg.row_bytes(),
                    &cfg.timing,
                    &cfg.energy,
                    &cfg.baseline,
                )))
            }
        },
        Cmd::Mc { variation, trials } => {
            let levels = if variation.is_empty() {
                DEFAULT_LEVELS.to_vec()
            } else {
                variation.clone()
            };
            if let Some(v) = levels.iter().find(|v| !(0.0..=0.5).contains(*v)) {
                return Err(usage(format!("variation must lie in [0, 0.5], got {v}")));
            }
            if *trials == 0 {
                return Err(usage("trials must be at least 1"));
            }
            let results = reliability::sweep(&levels, *trials, cfg.seed, &cfg.chip.device);
            let mut buf = Vec::new();
            reliability::write_csv(&results, &mut buf).map_err(|e| usage(e.to_string()))?;
            Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
        }
        Cmd::Trace { op } => Ok(symbolic_trace(parse_op(op)?).to_csv_string()),
        Cmd::Table7 => Ok(tables(&cfg)),
    }
}

#[derive(Serialize)]
struct WorkloadReport<P: Serialize, R: Serialize> {
    workload: &'static str,
    params: P,
    result: R,
    speedup: f64,
}

fn runtime_for(cfg: &SimConfig) -> Result<Runtime, Failure> {
    Runtime::new(cfg.clone()).map_err(|e| usage(e.to_string()))
}

fn bench_bitmap(cfg: &SimConfig, users: usize, weeks: usize) -> Result<String, Failure> {
    if weeks == 0 || users == 0 {
        return Err(usage("users and weeks must be positive"));
    }
    let wl = BitmapWorkload::generate(users, weeks, 0.5, cfg.seed);
    let mut rt = runtime_for(cfg)?;
    let r = bitmap_query(&mut rt, &wl).map_err(|e| usage(e.to_string()))?;
    #[derive(Serialize)]
    struct P {
        users: usize,
        weeks: usize,
        seed: u64,
    }
    Ok(json(&WorkloadReport {
        workload: "bitmap",
        params: P {
            users,
            weeks,
            seed: cfg.seed,
        },
        speedup: r.baseline_ns / r.sim_ns,
        result: r,
    }))
}

fn bench_bitweaving(cfg: &SimConfig, rows: usize, bits: u32) -> Result<String, Failure> {
    if !(1..=32).contains(&bits) || rows == 0 {
        return Err(usage("bits must be in 1..=32 and rows positive"));
    }
    let table = BitWeavingTable::random(rows, bits, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5ca1);
    let (a, b) = (rng.random_range(0..1u64 << bits), rng.random_range(0..1u64 << bits));
    let (c1, c2) = (a.min(b), a.max(b));
    let mut rt = runtime_for(cfg)?;
    let r = scan_once(&mut rt, &table, c1, c2).map_err(|e| usage(e.to_string()))?;
    #[derive(Serialize)]
    struct P {
        rows: usize,
        bits: u32,
        c1: u64,
        c2: u64,
        seed: u64,
    }
    Ok(json(&WorkloadReport {
        workload: "bitweaving",
        params: P {
            rows,
            bits,
            c1,
            c2,
            seed: cfg.seed,
        },
        speedup: r.baseline_ns / r.sim_ns,
        result: r,
    }))
}

fn bench_sets(cfg: &SimConfig, kind: SetOpKind, m: usize, domain: usize, e: usize) -> Result<String, Failure> {
    if m < 2 || domain == 0 {
        return Err(usage("need at least two sets and a positive domain"));
    }
    let inst = SetInstance::random(m, domain, e, cfg.seed);
    let mut rt = runtime_for(cfg)?;
    let r = set_op(&mut rt, kind, &inst).map_err(|e| usage(e.to_string()))?;
    #[derive(Serialize)]
    struct P {
        op: SetOpKind,
        sets: usize,
        domain: usize,
        elements: usize,
        seed: u64,
    }
    #[derive(Serialize)]
    struct R {
        result_size: usize,
        sim_ns: f64,
        baseline_ns: f64,
        rbtree_ns_estimate: f64,
    }
    Ok(json(&WorkloadReport {
        workload: "sets",
        params: P {
            op: kind,
            sets: m,
            domain,
            elements: e,
            seed: cfg.seed,
        },
        speedup: r.baseline_ns / r.sim_ns,
        result: R {
            result_size: r.elements.len(),
            sim_ns: r.sim_ns,
            baseline_ns: r.baseline_ns,
            rbtree_ns_estimate: r.rbtree_ns_estimate,
        },
    }))
}

/// Reference energies (nJ/KB) for the DDR3 interface and Ambit.
const ENERGY_REFERENCE: [(&str, f64, f64); 4] =
    [("not", 93.7, 1.6), ("and/or", 137.9, 3.2), ("nand/nor", 137.9, 4.0), ("xor/xnor", 137.9, 5.5)];

fn tables(cfg: &SimConfig) -> String {
    let mut s = String::new();
    let split = cfg.timing.clone().with_mode(DecoderMode::Split);
    let naive = cfg.timing.clone().with_mode(DecoderMode::Naive);
    let _ = writeln!(s, "Latency (ns)");
    let _ = writeln!(s, "{:<6} {:>5} {:>4} {:>8} {:>8}", "op", "AAPs", "APs", "naive", "split");
    for kind in BbopKind::ALL {
        let t = symbolic_trace(kind);
        let _ = writeln!(
            s,
            "{:<6} {:>5} {:>4} {:>8.1} {:>8.1}",
            kind.name(),
            t.count(crate::trace::Primitive::Aap),
            t.count(crate::trace::Primitive::Ap),
            latency_of(&t, &naive),
            latency_of(&t, &split)
        );
    }

    let _ = writeln!(s, "\nEnergy (nJ/KB)");
    let _ = writeln!(
        s,
        "{:<9} {:>7} {:>7} {:>9} {:>9} {:>9}",
        "op", "DDR3", "Ambit", "Ambit ref", "reduction", "ref"
    );
    let reps = [BbopKind::Not, BbopKind::And, BbopKind::Nand, BbopKind::Xor];
    for ((label, ddr_ref, ambit_ref), kind) in ENERGY_REFERENCE.iter().zip(reps) {
        let ddr = cfg.energy.baseline_nj_per_kb(kind);
        let e = op_energy_per_kb(kind, &cfg.energy);
        let _ = writeln!(
            s,
            "{:<9} {:>7.1} {:>7.2} {:>9.1} {:>8.1}X {:>8.1}X",
            label,
            ddr,
            e,
            ambit_ref,
            ddr / e,
            ddr_ref / ambit_ref
        );
    }

    let _ = writeln!(s, "\nThroughput (GB/s)");
    let row_bytes = cfg.row_bytes();
    let a3d = ChipConfig::ambit_3d();
    let presets = [BandwidthPreset::skylake(), BandwidthPreset::gtx745(), BandwidthPreset::hmc2()];
    let _ = write!(s, "{:<6}", "op");
    for p in &presets {
        let _ = write!(s, " {:>9}", p.name);
    }
    let _ = writeln!(s, " {:>9} {:>9} {:>9}", "ambit", "ambit-3d", "speedup");
    let mut speedups = Vec::new();
    for kind in BbopKind::ALL {
        let _ = write!(s, "{:<6}", kind.name());
        for p in &presets {
            let _ = write!(s, " {:>9.1}", baseline_throughput(kind, p) / 1e9);
        }
        let ambit = ambit_throughput(kind, cfg.chip.banks, row_bytes, &split);
        let ambit3d = ambit_throughput(kind, a3d.banks, row_bytes, &split);
        let sp = ambit / baseline_throughput(kind, &presets[0]);
        speedups.push(sp);
        let _ = writeln!(s, " {:>9.1} {:>9.1} {:>8.1}X", ambit / 1e9, ambit3d / 1e9, sp);
    }
    let mean = speedups.iter().sum::<f64>() / speedups.len() as f64;
    let _ = writeln!(s, "mean speedup over {}: {:.1}X", presets[0].name, mean);

    let cap = reliability::worst_case_threshold(&AdversarialModel::capacitance_only());
    let _ = writeln!(s, "\nWorst-case TRA variation, capacitance only: {:.4}", cap);
    s
}

fn check(out: &mut String, failures: &mut usize, name: &str, result: Result<(), String>) {
    match result {
        Ok(()) => {
            let _ = writeln!(out, "ok   {name}");
        }
        Err(msg) => {
            *failures += 1;
            let _ = writeln!(out, "FAIL {name}: {msg}");
        }
    }
}

fn verify(cfg: &SimConfig, pairs: usize, width: usize) -> Result<String, Failure> {
    let chip_cfg = ChipConfig {
        banks: 1,
        subarrays_per_bank: 1,
        row_bits: width,
        device: cfg.chip.device,
    };
    chip_cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut out = String::new();
    let mut failures = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    check(&mut out, &mut failures, "majority over all inputs", verify_majority(&chip_cfg));

    let golden: [&str; 16] = [
        "T0", "T1", "T2", "T3", "DCC0", "!DCC0", "DCC1", "!DCC1", "!DCC0,T0", "!DCC1,T1", "T2,T3", "T0,T3",
        "T0,T1,T2", "T1,T2,T3", "DCC0,T1,T2", "DCC1,T0,T3",
    ];
    let table = (0..16u8).try_for_each(|i| {
        let got: Vec<String> = decode(AddressGroup::B(i))
            .map_err(|e| e.to_string())?
            .iter()
            .map(Wordline::to_string)
            .collect();
        if got.join(",") == golden[usize::from(i)] {
            Ok(())
        } else {
            Err(format!("B{i} decodes to {}", got.join(",")))
        }
    });
    check(&mut out, &mut failures, "B-group decoder table", table);

    for kind in BbopKind::ALL {
        let r = verify_op(&chip_cfg, kind, pairs, &mut rng);
        check(&mut out, &mut failures, &format!("{kind} matches bitwise oracle"), r);
    }

    let tmr = BbopKind::ALL.iter().try_for_each(|&kind| {
        for _ in 0..pairs {
            let a = BitRow::random(width, &mut rng);
            let b = BitRow::random(width, &mut rng);
            let cb = (kind.arity() == 2).then(|| tmr_encode(&b));
            let got = tmr_op(kind, &tmr_encode(&a), cb.as_ref()).map_err(|e| e.to_string())?;
            if got != tmr_encode(&kind.apply(&a, Some(&b))) {
                return Err(format!("{kind} breaks the duplication code"));
            }
        }
        Ok(())
    });
    check(&mut out, &mut failures, "duplication code is homomorphic", tmr);

    let t = &cfg.timing;
    let lat = {
        let naive = t.clone().with_mode(DecoderMode::Naive).aap_ns();
        let split = t.clone().with_mode(DecoderMode::Split).aap_ns();
        if split < naive {
            Ok(())
        } else {
            Err(format!("split AAP {split} ns not below naive {naive} ns"))
        }
    };
    check(&mut out, &mut failures, "split decoder shortens AAP", lat);

    let _ = writeln!(out, "{} checks failed", failures);
    if failures > 0 {
        return Err(Failure(EXIT_VERIFY, out));
    }
    Ok(out)
}

fn verify_majority(cfg: &ChipConfig) -> Result<(), String> {
    let mut ctl = AmbitController::with_config(cfg.clone()).map_err(|e| e.to_string())?;
    let w = cfg.row_bits;
    let chip = ctl.chip_mut();
    for (i, row) in [Row::T0, Row::T1, Row::T2].into_iter().enumerate() {
        chip.write_row(RowLoc::new(0, 0, row), &BitRow::from_fn(w, |b| (b % 8) >> i & 1 == 1))
            .map_err(|e| e.to_string())?;
    }
    let tra = WordlineSet::new(&[Wordline::d(Row::T0), Wordline::d(Row::T1), Wordline::d(Row::T2)])
        .map_err(|e| e.to_string())?;
    chip.activate(0, 0, &tra).map_err(|e| e.to_string())?;
    chip.precharge(0);
    let got = chip.read_row(RowLoc::new(0, 0, Row::T0)).map_err(|e| e.to_string())?;
    for b in 0..w {
        let c = b % 8;
        let (x, y, z) = (c & 1 != 0, c & 2 != 0, c & 4 != 0);
        if got.get(b) != ((x && y) || (y && z) || (x && z)) {
            return Err(format!("bitline {b} (inputs {c:03b})"));
        }
    }
    Ok(())
}

fn verify_op(cfg: &ChipConfig, kind: BbopKind, pairs: usize, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut ctl = AmbitController::with_config(cfg.clone()).map_err(|e| e.to_string())?;
    let (d0, d1, d2) = (RowAddress::data(0, 0, 0), RowAddress::data(0, 0, 1), RowAddress::data(0, 0, 2));
    for p in 0..pairs {
        let a = BitRow::random(cfg.row_bits, rng);
        let b = BitRow::random(cfg.row_bits, rng);
        ctl.write(d0, &a).map_err(|e| e.to_string())?;
        ctl.write(d1, &b).map_err(|e| e.to_string())?;
        let src2 = (kind.arity() == 2).then_some(d1);
        ctl.exec_bbop(kind, d2, d0, src2).map_err(|e| e.to_string())?;
        let read = |addr| ctl.read(addr).map_err(|e| e.to_string());
        if read(d2)? != kind.apply(&a, Some(&b)) {
            return Err(format!("pair {p}: wrong result"));
        }
        if read(d0)? != a || read(d1)? != b {
            return Err(format!("pair {p}: source modified"));
        }
    }
    Ok(())
}
