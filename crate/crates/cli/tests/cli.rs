use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cosetpack_cli::{run, CliError, ExperimentConfig};
use serde_json::{json, Value};

fn config(v: Value) -> ExperimentConfig {
    ExperimentConfig::from_json(&v.to_string()).unwrap()
}

fn code(v: Value) -> i32 {
    match run(&config(v), Path::new("."), None) {
        Ok(_) => 0,
        Err(e) => e.exit_code(),
    }
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Scratch {
        let p = std::env::temp_dir().join(format!("cosetpack-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&p).unwrap();
        Scratch(p)
    }

    fn write(&self, name: &str, v: &Value) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, v.to_string()).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosetpack")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    let z2 = json!({ "kind": "free_abelian", "rank": 2 });
    assert_eq!(code(json!({ "command": "ball", "backend": z2, "R": 2 })), 0);
    assert_eq!(code(json!({ "command": "ball", "backend": z2 })), 2);
    assert_eq!(code(json!({ "command": "dist", "backend": z2, "R": 2, "x": "q", "y": "a" })), 2);
    assert_eq!(code(json!({ "command": "no-such-command" })), 2);
    let free = json!({ "kind": "free", "rank": 2 });
    assert_eq!(code(json!({ "command": "rel.dist", "backend": free, "x": "a", "y": "b" })), 3);
    assert_eq!(code(json!({ "command": "ball", "backend": free, "R": 10, "budget": 1000 })), 4);
}

#[test]
fn unknown_fields_are_config_errors() {
    let e = ExperimentConfig::from_json(r#"{"command":"ball","radius":3}"#).unwrap_err();
    assert!(matches!(e, CliError::Config(_)));
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = Scratch::new("err");
    let p = dir.write("c.json", &json!({ "command": "ball", "backend": { "kind": "free", "rank": 2 } }));
    let out = bin(&["--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["exit_code"], 2);
}

#[test]
fn command_flag_must_match_config() {
    let dir = Scratch::new("cmd");
    let p = dir.write("c.json", &json!({ "command": "ball", "backend": { "kind": "free", "rank": 2 }, "R": 1 }));
    assert_eq!(bin(&["dist", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bin(&["ball", "--config", p.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn timestamps_and_hashes() {
    let dir = Scratch::new("ts");
    let cfg = json!({ "command": "stallings.height", "gens": ["a^2", "a*b"] });
    let p = dir.write("c.json", &cfg);
    let p = p.to_str().unwrap();
    let a = bin(&["--config", p, "--no-timestamp"]);
    let b = bin(&["--config", p, "--no-timestamp", "--seed", "0"]);
    let stamped: Value = serde_json::from_slice(&bin(&["--config", p]).stdout).unwrap();
    let quiet: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(stamped["timestamp"].is_u64());
    assert!(quiet.get("timestamp").is_none());
    assert_eq!(stamped["config_hash"], quiet["config_hash"]);
    // An explicit seed changes the config and therefore the hash.
    let seeded: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_ne!(seeded["config_hash"], quiet["config_hash"]);
    assert_eq!(seeded["result"], quiet["result"]);
}

#[test]
fn out_flag_writes_file() {
    let dir = Scratch::new("out");
    let p = dir.write(
        "c.json",
        &json!({ "command": "packing-profile", "backend": { "kind": "free_abelian", "rank": 2 }, "gens": ["a"], "R": 6, "D_max": 3 }),
    );
    let target = dir.0.join("profile.csv");
    let out = bin(&["--config", p.to_str().unwrap(), "--out", target.to_str().unwrap(), "--no-timestamp"]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("D,N_lower,saturated,family,certificates_exact,config_hash"));
    assert_eq!(lines.count(), 3);
}
