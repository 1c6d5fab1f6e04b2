//! Command implementations. Every artifact is a pure function of the run
//! configuration, so two runs with the same config produce identical bytes.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use voxkv_core::analysis::{
    distinct_blocks, distinct_blocks_per_frame, footprint_report, hit_rate_curve, plateau_onset, resolution_sweep,
    reuse_gap_histogram, reuse_gaps, run_mapping, write_distinct_csv, write_footprint_csv, write_gap_csv,
    write_hit_curve_csv, write_sweep_csv, AnalysisError,
};
use voxkv_core::cachesim::run_trace;
use voxkv_core::exec::Execution;
use voxkv_core::mapper::{AccessTrace, UpdateStats};
use voxkv_core::store::{FootprintReport, StoreKind, StoreStats};

use crate::{CliError, RunConfig};

pub const TRACE_FILE: &str = "trace.csv";
pub const STORE_STATS_FILE: &str = "store_stats.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const GAP_FILE: &str = "gap_histogram.csv";
pub const DISTINCT_FILE: &str = "distinct_per_frame.csv";
pub const HIT_CURVE_FILE: &str = "hit_rate_curve.csv";
pub const SWEEP_FILE: &str = "resolution_sweep.csv";
pub const FOOTPRINT_FILE: &str = "footprint.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep.json";
pub const CONFIG_FILE: &str = "config.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sim_file(profile: &str) -> String {
    format!("sim_{profile}.json")
}

fn out_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| out_err(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| out_err(path, e))?))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| out_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| out_err(path, e))
}

fn write_csv_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), AnalysisError>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| out_err(path, e))
}

fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn read_trace(path: &Path) -> Result<AccessTrace, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    AccessTrace::read_csv(BufReader::new(file)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Provenance block embedded in every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    fn of(cfg: &RunConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            seed: cfg.seed,
        }
    }
}

/// Fails when a JSON artifact at `path` records a different config hash.
pub fn check_provenance(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let recorded = value
        .pointer("/provenance/config_hash")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Input(format!("{}: no provenance.config_hash", path.display())))?;
    let current = cfg.hash();
    if recorded != current {
        return Err(CliError::Config(format!(
            "{} was produced by config {recorded}, current config is {current}",
            path.display()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreStatsArtifact {
    pub provenance: Provenance,
    pub frames: usize,
    pub trace_events: usize,
    pub store: StoreStats,
    pub footprint: FootprintReport,
    pub totals: UpdateStats,
    pub per_frame: Vec<UpdateStats>,
}

/// Renders, integrates and writes the access trace plus store statistics.
pub fn gen_trace(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let run = run_mapping(&cfg.mapping_spec(), Execution::default())?;
    let trace_path = out.join(TRACE_FILE);
    let mut w = create(&trace_path)?;
    run.trace.write_csv(&mut w).map_err(|e| out_err(&trace_path, e))?;
    w.flush().map_err(|e| out_err(&trace_path, e))?;
    let stats_path = out.join(STORE_STATS_FILE);
    write_json(
        &stats_path,
        &StoreStatsArtifact {
            provenance: Provenance::of(cfg),
            frames: run.per_frame.len(),
            trace_events: run.trace.len(),
            store: run.store.stats(),
            footprint: run.store.memory_footprint(),
            totals: run.totals,
            per_frame: run.per_frame,
        },
    )?;
    Ok(vec![trace_path, stats_path])
}

/// Replays a trace through the configured cache profile. Store statistics
/// come from `store_stats`, else from `store_stats.json` beside the trace;
/// without either the store cost is the hash cost alone.
pub fn simulate(cfg: &RunConfig, trace_path: &Path, store_stats: Option<&Path>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let trace = read_trace(trace_path)?;
    let sibling = trace_path.with_file_name(STORE_STATS_FILE);
    let stats_path = match store_stats {
        Some(p) => Some(p.to_path_buf()),
        None => sibling.exists().then_some(sibling),
    };
    let stats = match &stats_path {
        Some(p) => {
            check_provenance(p, cfg)?;
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let artifact: StoreStatsArtifact =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            artifact.store
        }
        None => StoreStats::default(),
    };
    let profile = cfg.cache_profile()?;
    let report = run_trace(&trace, &profile, &cfg.cost, &stats)?;
    let (trace_sha, _) = sha256_file(trace_path)?;
    let path = out.join(sim_file(&profile.name));
    write_json(
        &path,
        &json!({
            "provenance": Provenance::of(cfg),
            "trace": { "file": file_name(trace_path), "sha256": trace_sha },
            "store_stats_file": stats_path.as_deref().map(file_name),
            "levels": profile.levels,
            "sim": report.sim,
            "replay": report.replay,
            "cost": report.cost,
        }),
    )?;
    Ok(vec![path])
}

/// Reuse gaps, distinct blocks per frame and the fully-associative
/// hit-rate curve of a trace.
pub fn analyze(cfg: &RunConfig, trace_path: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let trace = read_trace(trace_path)?;
    let a = &cfg.analysis;
    let hist = reuse_gap_histogram(&trace, &a.gap_edges);
    let gaps = reuse_gaps(&trace);
    let per_frame = distinct_blocks_per_frame(&trace);
    let curve = hit_rate_curve(&trace, &a.capacities, Execution::default());

    let gap_path = out.join(GAP_FILE);
    write_csv_with(&gap_path, |w| write_gap_csv(&hist, w))?;
    let distinct_path = out.join(DISTINCT_FILE);
    write_csv_with(&distinct_path, |w| write_distinct_csv(&per_frame, w))?;
    let curve_path = out.join(HIT_CURVE_FILE);
    write_csv_with(&curve_path, |w| write_hit_curve_csv(&curve, w))?;

    let accesses = trace.lookups().count() as u64;
    let frames = per_frame.len().max(1) as f64;
    let mean_distinct = per_frame.iter().map(|p| p.1 as f64).sum::<f64>() / frames;
    let near = gaps.iter().filter(|&&g| g <= a.gap_threshold).count() as u64;
    let summary_path = out.join(ANALYSIS_FILE);
    write_json(
        &summary_path,
        &json!({
            "provenance": Provenance::of(cfg),
            "trace": { "file": file_name(trace_path), "sha256": sha256_file(trace_path)?.0 },
            "accesses": accesses,
            "frames": per_frame.len(),
            "distinct_blocks": distinct_blocks(&trace),
            "mean_accesses_per_frame": accesses as f64 / frames,
            "mean_distinct_blocks_per_frame": mean_distinct,
            "reuse_ratio": if mean_distinct > 0.0 { accesses as f64 / frames / mean_distinct } else { 0.0 },
            "gaps": gaps.len(),
            "gap_threshold": a.gap_threshold,
            "gaps_at_or_below_threshold": near,
            "fraction_at_or_below_threshold": if gaps.is_empty() { 0.0 } else { near as f64 / gaps.len() as f64 },
            "hit_rate_curve": curve,
            "plateau_onset": plateau_onset(&curve, a.plateau_tolerance),
        }),
    )?;
    Ok(vec![gap_path, distinct_path, curve_path, summary_path])
}

/// Resolution sweep and store footprint comparison.
pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let s = &cfg.sweep;
    let profile = cfg.cache_profile()?;
    let result = resolution_sweep(&cfg.mapping_spec(), &s.voxel_sizes, &profile, &cfg.cost, Execution::default())?;
    let footprint = footprint_report(
        &[StoreKind::ChainedHash, StoreKind::FlatHta, StoreKind::Octree],
        &s.footprint_load_factors,
        s.footprint_entries,
        cfg.world.voxels_per_block(),
    )?;
    let sweep_path = out.join(SWEEP_FILE);
    write_csv_with(&sweep_path, |w| write_sweep_csv(&result.rows, w))?;
    let footprint_path = out.join(FOOTPRINT_FILE);
    write_csv_with(&footprint_path, |w| write_footprint_csv(&footprint, w))?;

    let mut sizes = s.voxel_sizes.clone();
    sizes.sort_by(|a, b| b.total_cmp(a));
    let ratios: Vec<Value> = sizes
        .windows(2)
        .chain(std::iter::once(&[sizes[0], *sizes.last().expect("non-empty")][..]))
        .filter(|w| w[0] != w[1])
        .map(|w| json!({ "coarse": w[0], "fine": w[1], "updates_per_frame_ratio": result.update_ratio(w[1], w[0]) }))
        .collect();
    let summary_path = out.join(SWEEP_SUMMARY_FILE);
    write_json(
        &summary_path,
        &json!({
            "provenance": Provenance::of(cfg),
            "profile": profile.name,
            "rows": result.rows,
            "update_ratios": ratios,
            "footprint": footprint,
        }),
    )?;
    Ok(vec![sweep_path, footprint_path, summary_path])
}

const PROVENANCE_CHECKED: [&str; 4] = [STORE_STATS_FILE, ANALYSIS_FILE, SWEEP_SUMMARY_FILE, MANIFEST_FILE];

/// Runs every stage into `out` and writes a manifest of inputs and outputs.
/// Refuses to mix with artifacts from a different configuration.
pub fn report(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let profile = cfg.cache_profile()?;
    for name in PROVENANCE_CHECKED.iter().map(|s| s.to_string()).chain([sim_file(&profile.name)]) {
        let p = out.join(&name);
        if p.exists() {
            check_provenance(&p, cfg)?;
        }
    }
    let config_path = out.join(CONFIG_FILE);
    write_json(&config_path, cfg)?;
    let mut outputs = gen_trace(cfg, out)?;
    let trace = out.join(TRACE_FILE);
    outputs.extend(simulate(cfg, &trace, None, out)?);
    outputs.extend(analyze(cfg, &trace, out)?);
    outputs.extend(sweep(cfg, out)?);

    let mut listed: Vec<String> = fs::read_dir(out)
        .map_err(|e| out_err(out, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST_FILE && n != CONFIG_FILE)
        .collect();
    listed.sort();
    let mut files = Vec::new();
    for name in &listed {
        let (sha, bytes) = sha256_file(&out.join(name))?;
        files.push(json!({ "path": name, "bytes": bytes, "sha256": sha }));
    }
    let (config_sha, _) = sha256_file(&config_path)?;
    let manifest_path = out.join(MANIFEST_FILE);
    write_json(
        &manifest_path,
        &json!({
            "provenance": Provenance::of(cfg),
            "tool": { "name": "voxkv", "version": env!("CARGO_PKG_VERSION") },
            "profile": profile.name,
            "inputs": [{ "path": CONFIG_FILE, "sha256": config_sha }],
            "outputs": files,
        }),
    )?;
    outputs.push(config_path);
    outputs.push(manifest_path);
    Ok(outputs)
}
