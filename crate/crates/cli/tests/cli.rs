use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nhband::formats::{load_hoppings, parse_hoppings, write_hoppings};

const SMALL_C20I: &str = r#"
[potential]
c_sin = { c = "20i" }

[numerics]
l_max = 16
n_k = 40
n_x = 32
n_bands = 2
m_max = 2
"#;

fn nhband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhband"))
        .args(args)
        .output()
        .expect("spawn nhband")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path) -> Output {
    nhband(&[sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn bad_field_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        "[potential]\nc_sin = { c = \"20i\" }\n[numerics]\nn_k = 41\n",
    );
    let out = tmp.path().join("out");
    let o = run("bands", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("numerics.n_k"), "{err}");
    let m = manifest(&out);
    assert_eq!(m["status"], "failed");
    assert_eq!(m["error"]["kind"], "config");
}

#[test]
fn unknown_key_and_missing_file_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[potential]\nc_sin = { c = \"20i\" }\nbogus = 1\n");
    let o = run("bands", &cfg, &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    let o = run("bands", &tmp.path().join("absent.toml"), &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_error_exits_1_with_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // Bands 1 and 2 coalesce at c = 20i, so the diagonal gauge is refused.
    let text = format!("{SMALL_C20I}\n[task]\ngauge = \"diagonal\"\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("out");
    let o = run("wannier", &cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(&out);
    assert_eq!(m["status"], "failed");
    assert_eq!(m["error"]["kind"], "computation");
    assert_eq!(m["config"]["numerics"]["l_max"], 16);
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_C20I);
    for sub in ["bands", "tb"] {
        let a = tmp.path().join(format!("{sub}-a"));
        let b = tmp.path().join(format!("{sub}-b"));
        assert_eq!(run(sub, &cfg, &a).status.code(), Some(0));
        assert_eq!(run(sub, &cfg, &b).status.code(), Some(0));
        let outputs = manifest(&a)["outputs"].as_array().unwrap().clone();
        assert!(!outputs.is_empty());
        for f in outputs {
            let f = f.as_str().unwrap();
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{sub}/{f}");
        }
    }
}

#[test]
fn written_hopping_table_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_C20I);
    let out = tmp.path().join("out");
    assert_eq!(run("tb", &cfg, &out).status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("hoppings.txt")).unwrap();
    let table = load_hoppings(&out.join("hoppings.txt")).unwrap();
    assert_eq!(write_hoppings(&table), text);
    assert_eq!(parse_hoppings(&text).unwrap(), table);
    assert_eq!(table.m_max, 2);
}

#[test]
fn json_format_writes_row_objects() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_C20I}\n[output]\nformat = \"json\"\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("out");
    assert_eq!(run("gaps", &cfg, &out).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("gaps.json")).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["quantity"], "delta1");
}

#[test]
fn cached_trials_reproduce_the_in_memory_default() {
    let tmp = tempfile::tempdir().unwrap();
    let regen = r#"
[potential]
c_sin = { c = "200i" }

[numerics]
l_max = 16
n_k = 40
n_x = 32
n_bands = 2

[task]
gauge = "diagonal"
cells = [0, 0]
"#;
    let cfg = write_config(tmp.path(), "regen.toml", regen);
    let cache_dir = tmp.path().join("cache");
    assert_eq!(run("wannier", &cfg, &cache_dir).status.code(), Some(0));
    assert!(cache_dir.join("trials.txt").exists());

    let cached = format!("{SMALL_C20I}\n[task]\ngauge = \"projection\"\ntrials = \"cache/trials.txt\"\n");
    let default = format!("{SMALL_C20I}\n[task]\ngauge = \"projection\"\n");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run("tb", &write_config(tmp.path(), "a.toml", &cached), &a).status.code(), Some(0));
    assert_eq!(run("tb", &write_config(tmp.path(), "b.toml", &default), &b).status.code(), Some(0));
    let ta = load_hoppings(&a.join("hoppings.txt")).unwrap();
    let tb = load_hoppings(&b.join("hoppings.txt")).unwrap();
    assert!(ta.max_difference(&tb) < 1e-12, "{}", ta.max_difference(&tb));
}

#[test]
fn broken_trial_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("t.txt"), "# nhband trial cache v1\n# c = oops\n").unwrap();
    let text = format!("{SMALL_C20I}\n[task]\ngauge = \"projection\"\ntrials = \"t.txt\"\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let o = run("wannier", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_prefixes_parameter_column() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_C20I}\n[task.sweep]\ntask = \"bands\"\nparameter = \"c_im\"\nvalues = [10.0, 30.0]\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("out");
    assert_eq!(run("sweep", &cfg, &out).status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("bands.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("c_im,k,band,re,im"));
    assert_eq!(lines.count(), 2 * 40 * 2);
    assert_eq!(manifest(&out)["checks"]["values"].as_array().unwrap().len(), 2);
}
