use std::fs;
use std::process::{Command, Output};

fn ambit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ambit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_passes_on_defaults() {
    let o = ambit(&["verify", "--pairs", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn trace_and_is_twelve_commands() {
    let o = ambit(&["trace", "and"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 13);
    assert_eq!(text.lines().filter(|l| l.contains(",ACTIVATE,")).count(), 8);
}

#[test]
fn mc_at_zero_variation() {
    let o = ambit(&["mc", "--variation", "0", "--trials", "1000", "--seed", "9"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[2], "0");
    assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn bench_json_for_every_op() {
    for op in ["not", "and", "or", "nand", "nor", "xor", "xnor"] {
        let o = ambit(&["bench", op]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        for key in ["op", "latency_ns", "energy_nj_per_kb", "ambit_gbps", "baseline_gbps", "speedup", "energy_reduction"] {
            assert!(v.get(key).is_some(), "{op}: missing {key}");
        }
    }
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(ambit(&["trace", "implies"]).status.code(), Some(2));
    assert_eq!(ambit(&[]).status.code(), Some(2));
    assert_eq!(ambit(&["--banks", "0", "bench", "and"]).status.code(), Some(2));
    assert_eq!(ambit(&["--config", "/nonexistent.json", "table7"]).status.code(), Some(2));

    let dir = std::env::temp_dir().join(format!("ambit-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"timing": {"t_ras": 35, "bogus": 1}}"#).unwrap();
    let o = ambit(&["--config", bad.to_str().unwrap(), "table7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_out_flag() {
    let dir = std::env::temp_dir().join(format!("ambit-cfg-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    fs::write(&cfg, r#"{"timing": {"mode": "naive"}, "chip": {"banks": 16}}"#).unwrap();
    let out = dir.join("and.json");
    let o = ambit(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "bench", "and"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["latency_ns"], 320.0);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn table7_mentions_every_op() {
    let o = ambit(&["table7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for op in ["not", "and", "nand", "xor", "xnor"] {
        assert!(text.lines().any(|l| l.starts_with(op)), "{op}");
    }
}

#[test]
fn same_seed_same_bytes() {
    for args in [
        &["--seed", "5", "bench", "sets", "--elements", "100"][..],
        &["--seed", "5", "mc", "--variation", "0.2", "--trials", "3000"][..],
    ] {
        assert_eq!(ambit(args).stdout, ambit(args).stdout);
    }
    let a = ambit(&["--seed", "1", "mc", "--variation", "0.2", "--trials", "3000"]).stdout;
    let b = ambit(&["--seed", "2", "mc", "--variation", "0.2", "--trials", "3000"]).stdout;
    assert_ne!(a, b);
}
