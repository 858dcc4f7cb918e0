//! `listflow rescale`: scan a finished run's curvature history for essential
//! blow-up candidates and emit parabolically rescaled profiles at the nearest
//! stored snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use listflow_core::{rescale, track_blowup, BlowUpPoint, FlowParameters, FlowState, RadialGrid};

use crate::output::{self, fmt};

/// At most this many rescaled profiles are emitted; the kept subsequence is
/// log-spaced in curvature scale (every step of a monotone blow-up qualifies,
/// which would otherwise mean one file per step).
const MAX_PROFILES: usize = 16;

pub fn rescale_cmd(run_dir: &Path, c: f64) -> Result<i32> {
    let history_path = run_dir.join("history.csv");
    if !history_path.exists() {
        bail!("{} has no history.csv (not a finished run?)", run_dir.display());
    }
    let history = output::read_history(&history_path)?;
    let meta = output::read_meta(&run_dir.join("run.meta")).unwrap_or_default();

    let mut snapshots = list_snapshots(&run_dir.join("snapshots"))?;
    if snapshots.is_empty() {
        bail!("{} has no snapshots to rescale", run_dir.display());
    }

    let (_, r0, _, _) = output::read_snapshot(&snapshots[0].1)?;
    let grid = Arc::new(RadialGrid::from_nodes(r0).map_err(|e| anyhow!("snapshot grid: {e}"))?);
    let params = params_from_meta(&meta)?;

    let record = track_blowup(&history, grid.nodes(), c).map_err(|e| anyhow!("{e}"))?;
    let sensitivity: Vec<(f64, usize)> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&cc| {
            let n = track_blowup(&history, grid.nodes(), cc)
                .map(|r| r.points.len())
                .unwrap_or(0);
            (cc, n)
        })
        .collect();

    let report_path = run_dir.join("blowup_report.txt");
    let mut report = BufWriter::new(
        File::create(&report_path).with_context(|| format!("create {}", report_path.display()))?,
    );
    writeln!(report, "c_used = {}", fmt(record.c_used))?;
    writeln!(
        report,
        "termination = {}",
        meta.get("termination").map(String::as_str).unwrap_or("unknown")
    )?;
    writeln!(report, "history_samples = {}", history.len())?;
    writeln!(report, "candidates = {}", record.points.len())?;
    for (cc, n) in &sensitivity {
        writeln!(report, "candidates_at_c_{cc} = {n}")?;
    }

    if record.is_empty() {
        writeln!(report, "result = no blow-up candidates (curvature never grew)")?;
        report.flush()?;
        println!("no blow-up candidates (curvature never grew)");
        println!("wrote {}", report_path.display());
        return Ok(0);
    }

    // Re-scan of the defining inequality on the stored history.
    let mut check_ok = true;
    for p in &record.points {
        let sup_before = history
            .iter()
            .filter(|s| s.t <= p.t)
            .fold(0.0_f64, |m, s| m.max(s.sup_riem));
        if sup_before > record.c_used * p.curvature_scale * (1.0 + 1e-12) {
            check_ok = false;
        }
    }
    writeln!(report, "definition_check = {}", if check_ok { "ok" } else { "VIOLATED" })?;

    let kept = thin_points(&record.points);
    writeln!(report, "profiles_emitted = {}", kept.len())?;
    writeln!(report, "k,t,r,node,B,snapshot_t,profile")?;
    for (idx, p) in kept.iter().enumerate() {
        let (snap_t, snap_path) = nearest_snapshot(&snapshots, p.t)?;
        let (_, r, f, z) = output::read_snapshot(&snap_path)?;
        let grid = if r.len() == grid.node_count() {
            grid.clone()
        } else {
            Arc::new(RadialGrid::from_nodes(r).map_err(|e| anyhow!("snapshot grid: {e}"))?)
        };
        let state = FlowState::new(snap_t, f, z, grid).map_err(|e| anyhow!("snapshot state: {e}"))?;
        let profile = rescale(&state, &params, p.curvature_scale).map_err(|e| anyhow!("{e}"))?;
        let name = format!("rescaled_{idx:03}.csv");
        output::write_rescaled_profile(&run_dir.join(&name), &profile)?;
        writeln!(
            report,
            "{idx},{},{},{},{},{},{name}",
            fmt(p.t),
            fmt(p.r),
            p.node,
            fmt(p.curvature_scale),
            fmt(snap_t)
        )?;
    }
    report.flush()?;
    println!(
        "{} candidates ({} profiles emitted), definition check: {}",
        record.points.len(),
        kept.len(),
        if check_ok { "ok" } else { "VIOLATED" }
    );
    println!("wrote {}", report_path.display());
    snapshots.clear();
    Ok(0)
}

fn params_from_meta(meta: &std::collections::BTreeMap<String, String>) -> Result<FlowParameters> {
    let get = |k: &str| -> Result<f64> {
        meta.get(k)
            .ok_or_else(|| anyhow!("run.meta is missing {k}"))?
            .parse::<f64>()
            .map_err(|e| anyhow!("run.meta {k}: {e}"))
    };
    let dim = get("dimension")? as u32;
    let mut params = FlowParameters::new(dim, get("coupling")?);
    params.f_infinity = get("f_infinity")?;
    params.validate().map_err(|e| anyhow!("run.meta parameters: {e}"))?;
    Ok(params)
}

/// Snapshot files with their stored times, sorted by time.
fn list_snapshots(dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(dir).with_context(|| format!("read {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let (t, _, _, _) = output::read_snapshot(&path)?;
            out.push((t, path));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(out)
}

fn nearest_snapshot(snapshots: &[(f64, PathBuf)], t: f64) -> Result<(f64, PathBuf)> {
    snapshots
        .iter()
        .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
        .map(|(t, p)| (*t, p.clone()))
        .ok_or_else(|| anyhow!("no snapshots"))
}

/// Keeps a log-spaced (in curvature scale) subsequence, always including the
/// first and last candidates.
fn thin_points(points: &[BlowUpPoint]) -> Vec<BlowUpPoint> {
    if points.len() <= MAX_PROFILES {
        return points.to_vec();
    }
    let mut kept: Vec<BlowUpPoint> = vec![points[0]];
    let b0 = points[0].curvature_scale;
    let b1 = points.last().unwrap().curvature_scale;
    let factor = (b1 / b0).powf(1.0 / (MAX_PROFILES - 1) as f64).max(1.0 + 1e-12);
    let mut next = b0 * factor;
    for p in &points[1..points.len() - 1] {
        if p.curvature_scale >= next {
            kept.push(*p);
            next = p.curvature_scale * factor;
            if kept.len() == MAX_PROFILES - 1 {
                break;
            }
        }
    }
    kept.push(*points.last().unwrap());
    kept
}
