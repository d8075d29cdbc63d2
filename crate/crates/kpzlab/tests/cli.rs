use std::path::Path;
use std::process::Command;

use kpzlab::harness::verify_manifest;

fn kpzlab(out: &Path, args: &[&str]) -> String {
    let output = Command::new(env!("CARGO_BIN_EXE_kpzlab"))
        .args(args)
        .env("KPZLAB_OUT", out)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    String::from_utf8(output.stdout).unwrap()
}

#[test]
fn subcommands_write_verified_runs() {
    let out = std::env::temp_dir().join(format!("kpzlab-cli-{}", std::process::id()));
    let cases: [&[&str]; 5] = [
        &["local-clt", "--sizes", "100,1000"],
        &["sample-asep", "--replicas", "2", "--sizes", "8", "--seed", "3"],
        &["sample-s6v", "--replicas", "2", "--sizes", "8", "-p", "q=0.4"],
        &["verify-monotone", "-p", "max_len=3", "-p", "box=3"],
        &["tw-reference", "--replicas", "200", "--sizes", "20", "--workers", "2"],
    ];
    for args in cases {
        kpzlab(&out, args);
        verify_manifest(&out.join(args[0])).unwrap();
    }
    let a = kpzlab(&out, &["sample-hahp", "--replicas", "3", "-p", "m=3", "-p", "n=2", "--seed", "5"]);
    let first = std::fs::read(out.join("sample-hahp/samples.jsonl")).unwrap();
    let b = kpzlab(&out, &["sample-hahp", "--replicas", "3", "-p", "m=3", "-p", "n=2", "--seed", "5", "--workers", "3"]);
    assert_eq!(a, b);
    assert_eq!(first, std::fs::read(out.join("sample-hahp/samples.jsonl")).unwrap());
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let out = std::env::temp_dir().join(format!("kpzlab-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("run.json");
    std::fs::write(&cfg, r#"{"experiment": "x", "seed": 9, "n_list": [200], "params": {"exponent": 0.5}}"#).unwrap();
    let text = kpzlab(&out, &["local-clt", "--config", cfg.to_str().unwrap(), "--seed", "10"]);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rows[0]["n"], 200);
    let manifest = verify_manifest(&out.join("local-clt")).unwrap();
    assert_eq!(manifest.config.seed, 10);
    assert_eq!(manifest.config.params["exponent"], 0.5);
    std::fs::remove_dir_all(&out).unwrap();
}
