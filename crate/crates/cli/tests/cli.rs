use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn voxkv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voxkv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A small plane-and-sphere scene that maps in well under a second.
fn small_config(dir: &Path, extra: Value) -> std::path::PathBuf {
    let mut cfg = json!({
        "camera": { "fx": 40.0, "fy": 40.0, "cx": 20.0, "cy": 15.0, "width": 40, "height": 30 },
        "trajectory": { "kind": "orbit", "center": [0.0, 0.0, 0.2], "radius": 1.6, "height": 1.2, "frames": 3 },
        "world": { "voxel_size": 0.1 },
        "sweep": { "voxel_sizes": [0.15, 0.1] },
    });
    let (base, patch) = (cfg.as_object_mut().unwrap(), extra.as_object().unwrap().clone());
    for (k, v) in patch {
        base.insert(k, v);
    }
    let path = dir.join("config.in.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn gen_trace_writes_trace_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), json!({}));
    let out = tmp.path().join("out");
    let o = voxkv(&["gen-trace", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
    let stats = read_json(&out.join("store_stats.json"));
    assert!(stats["store"]["allocations"].as_u64().unwrap() > 0);
    assert_eq!(stats["frames"], 3);
    assert_eq!(stats["provenance"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn zero_frames_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(
        tmp.path(),
        json!({ "trajectory": { "kind": "orbit", "center": [0.0, 0.0, 0.0], "radius": 1.0, "height": 1.0, "frames": 0 } }),
    );
    let o = voxkv(&["gen-trace", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), json!({ "voxel_sise": 0.1 }));
    let o = voxkv(&["gen-trace", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("voxel_sise"), "{}", stderr(&o));
}

#[test]
fn unknown_profile_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), json!({}));
    let o = voxkv(&["sweep", "--config", cfg.to_str().unwrap(), "--profile", "l3-only"], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
}

#[test]
fn block_budget_exhaustion_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(
        tmp.path(),
        json!({ "store": { "kind": "chained_hash", "bucket_count": 64, "block_budget": 1 } }),
    );
    let o = voxkv(&["gen-trace", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn malformed_trace_reports_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("t.csv");
    fs::write(&trace, "seq,op,frame,kx,ky,kz\n0,L,0,1,2,3\n1,Q,0,1,2,3\n").unwrap();
    let o = voxkv(&["simulate", "--trace", trace.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn analyze_rejects_unknown_header() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("t.csv");
    fs::write(&trace, "seq,op,frame,x,y,z\n0,L,0,1,2,3\n").unwrap();
    let o = voxkv(&["analyze", "--trace", trace.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn missing_trace_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = voxkv(&["analyze"], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_trace_gives_zero_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("t.csv");
    fs::write(&trace, "seq,op,frame,kx,ky,kz\n").unwrap();
    let out = tmp.path().join("out");
    let o = voxkv(&["simulate", "--trace", trace.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sim = read_json(&out.join("sim_cpu-table5.json"));
    assert_eq!(sim["replay"]["hits"], 0);
    assert_eq!(sim["replay"]["misses"], 0);
    assert_eq!(sim["sim"]["global"]["kv_lookups"], 0);
    for level in sim["sim"]["levels"].as_object().unwrap().values() {
        assert!(level.as_object().unwrap().values().all(|v| v == 0), "{level}");
    }
}

#[test]
fn single_key_trace_has_one_miss() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("t.csv");
    let mut text = String::from("seq,op,frame,kx,ky,kz\n");
    for i in 0..50 {
        text.push_str(&format!("{i},L,{},4,-2,1\n", i / 10));
    }
    fs::write(&trace, text).unwrap();
    let out = tmp.path().join("out");
    let o = voxkv(&["simulate", "--profile", "gpu-table6", "--trace", trace.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sim = read_json(&out.join("sim_gpu-table6.json"));
    assert_eq!(sim["replay"]["misses"], 1);
    assert_eq!(sim["replay"]["hits"], 49);
}

#[test]
fn store_stats_from_another_config_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), json!({}));
    let out = tmp.path().join("out");
    assert_eq!(code(&voxkv(&["gen-trace", "--config", cfg.to_str().unwrap()], &out)), 0);
    let o = voxkv(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "9"], &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config"), "{}", stderr(&o));
    let o = voxkv(&["report", "--config", cfg.to_str().unwrap(), "--seed", "9"], &out);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_manifest_lists_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), json!({}));
    let out = tmp.path().join("out");
    let o = voxkv(&["report", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = read_json(&out.join("manifest.json"));
    let listed: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json" && n != "config.json")
        .collect();
    on_disk.sort();
    assert_eq!(listed, on_disk);
    assert_eq!(manifest["inputs"][0]["path"], "config.json");
    let hash = manifest["provenance"]["config_hash"].as_str().unwrap();
    for name in ["store_stats.json", "sim_cpu-table5.json", "analysis.json", "sweep.json"] {
        assert_eq!(read_json(&out.join(name))["provenance"]["config_hash"], hash, "{name}");
    }
    for f in manifest["outputs"].as_array().unwrap() {
        let bytes = fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"], bytes.len());
    }
    let text = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(!text.contains(tmp.path().to_str().unwrap()));
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), json!({ "integration": { "depth_noise_std": 0.01 } }));
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = voxkv(&["report", "--config", cfg.to_str().unwrap(), "--seed", "5"], &out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read(out.join("manifest.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
    let other = tmp.path().join("c");
    voxkv(&["report", "--config", cfg.to_str().unwrap(), "--seed", "6"], &other);
    assert_ne!(run("a"), fs::read(other.join("manifest.json")).unwrap());
}

/// Default-configuration artifacts frozen after the first validated run.
#[test]
fn default_pipeline_matches_frozen_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    for cmd in ["gen-trace", "simulate", "analyze", "sweep"] {
        let o = voxkv(&[cmd], out);
        assert_eq!(code(&o), 0, "{cmd}: {}", stderr(&o));
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for entry in fs::read_dir(&golden).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name();
        let want = fs::read_to_string(entry.path()).unwrap();
        let got = fs::read_to_string(out.join(&name)).unwrap();
        assert_eq!(got, want, "{name:?} drifted from the frozen artifact");
    }
}
