#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub const NF_SWEEP: &str = r#"
[system]
power_db = 10
alpha = 0.3
cap_low = 1.0
cap_delta = 0.5
p_low = 0.1

[sweep]
param = "p"
from = 0.0
to = 1.0
steps = 21
"#;

pub fn small_fading(seed: u64) -> String {
    format!(
        r#"
[system]
power_db = 30
alpha = 0.3
cap_low = 4.0
cap_delta = 6.0
p_low = 0.2

[sweep]
param = "p"
from = 0.0
to = 1.0
steps = 3

[run]
scenario = "fading"
mc_samples = 1500
budget = 60
seed = {seed}
"#
    )
}

/// Runs the binary with its cache in `cache`.
pub fn uplink(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uplink"))
        .args(args)
        .env("UPLINK_CACHE_DIR", cache)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}
