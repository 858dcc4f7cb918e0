//! Bit-stable file output and the readers that take it back in.
//!
//! Numbers are written as decimal text with 17 significant digits, which
//! round-trips `f64` exactly; identical configurations therefore produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use listflow_core::{
    curvature, hessian_profile, masses, reconstruct_u, y_profile, zeta_profile,
    DiagnosticsRecord, FlowParameters, FlowState, HistorySample, RescaledProfile,
};

/// 17 significant digits: exact round trip for doubles.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SERIES_HEADER: &str = "t,dt,sup_riem,min_f,max_f,sup_z,min_S,min_lambda2,\
min_H_off_origin,max_zeta,m1,m2,m3a,m3b,m4,m5,m6,adm_estimate";

pub const SNAPSHOT_HEADER: &str =
    "r,f,z,u,lambda1,lambda2,R,S,riem_norm_sq,H,mu_BY,mu_MS,zeta,zprime,y";

pub struct SeriesWriter {
    w: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = BufWriter::new(
            File::create(path).with_context(|| format!("create {}", path.display()))?,
        );
        writeln!(w, "{SERIES_HEADER}")?;
        Ok(SeriesWriter { w })
    }

    pub fn row(&mut self, rec: &DiagnosticsRecord, dt: f64, adm_estimate: f64) -> Result<()> {
        let cols = [
            rec.t,
            dt,
            rec.sup_riem,
            rec.min_f,
            rec.max_f,
            rec.sup_z,
            rec.min_s,
            rec.min_lambda2,
            rec.min_h_off_origin,
            rec.max_zeta,
            rec.m1,
            rec.m2,
            rec.m3a,
            rec.m3b,
            rec.m4,
            rec.m5,
            rec.m6,
            adm_estimate,
        ];
        let line: Vec<String> = cols.iter().map(|&v| fmt(v)).collect();
        writeln!(self.w, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

/// Writes one snapshot with the full diagnostic column set. The first line
/// is a `# t = ...` comment so every file carries its flow time without
/// widening the column schema.
pub fn write_snapshot(path: &Path, state: &FlowState, params: &FlowParameters) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("create {}", path.display()))?);
    let curv = curvature(state, params);
    let mass = masses(state, params).map_err(|e| anyhow!("snapshot diagnostics: {e}"))?;
    let u = reconstruct_u(state);
    let zeta = zeta_profile(state);
    let zprime = hessian_profile(state);
    let y = y_profile(state);
    writeln!(w, "# t = {}", fmt(state.t))?;
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    let nodes = state.grid().nodes();
    for i in 0..nodes.len() {
        let cols = [
            nodes[i],
            state.f[i],
            state.z[i],
            u[i],
            curv.lambda1[i],
            curv.lambda2[i],
            curv.scalar[i],
            curv.s[i],
            curv.riem_norm_sq[i],
            mass.mean_curvature[i],
            mass.brown_york[i],
            mass.misner_sharpe[i],
            zeta[i],
            zprime[i],
            y[i],
        ];
        let line: Vec<String> = cols.iter().map(|&v| fmt(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `r`, `f`, `z` and the flow time back from a snapshot.
pub fn read_snapshot(path: &Path) -> Result<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let mut t = None;
    let mut r = Vec::new();
    let mut f = Vec::new();
    let mut z = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("t =") {
                t = Some(v.trim().parse::<f64>().context("snapshot time")?);
            }
            continue;
        }
        if trimmed.starts_with('r') {
            continue; // header
        }
        let mut it = trimmed.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| anyhow!("{}:{}: short row", path.display(), ln + 1))?
                .trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("{}:{}: {e}", path.display(), ln + 1))
        };
        r.push(parse(it.next())?);
        f.push(parse(it.next())?);
        z.push(parse(it.next())?);
    }
    let t = t.ok_or_else(|| anyhow!("{}: missing '# t =' line", path.display()))?;
    Ok((t, r, f, z))
}

pub const HISTORY_HEADER: &str = "t,sup_riem,node,r";

pub fn write_history(path: &Path, history: &[HistorySample], radii: &[f64]) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("create {}", path.display()))?);
    writeln!(w, "{HISTORY_HEADER}")?;
    for h in history {
        writeln!(
            w,
            "{},{},{},{}",
            fmt(h.t),
            fmt(h.sup_riem),
            h.node,
            fmt(radii[h.node])
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history(path: &Path) -> Result<Vec<HistorySample>> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let mut out = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('t') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() < 3 {
            bail!("{}:{}: short row", path.display(), ln + 1);
        }
        out.push(HistorySample {
            t: cols[0].trim().parse().map_err(|e| anyhow!("{}:{}: {e}", path.display(), ln + 1))?,
            sup_riem: cols[1]
                .trim()
                .parse()
                .map_err(|e| anyhow!("{}:{}: {e}", path.display(), ln + 1))?,
            node: cols[2]
                .trim()
                .parse()
                .map_err(|e| anyhow!("{}:{}: {e}", path.display(), ln + 1))?,
        });
    }
    Ok(out)
}

pub fn write_rescaled_profile(path: &Path, rp: &RescaledProfile) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("create {}", path.display()))?);
    writeln!(w, "# b = {}", fmt(rp.b))?;
    writeln!(w, "r,f,z,u,lambda1,lambda2,riem_norm_sq")?;
    for i in 0..rp.radius.len() {
        let cols = [
            rp.radius[i],
            rp.f[i],
            rp.z[i],
            rp.u[i],
            rp.lambda1[i],
            rp.lambda2[i],
            rp.riem_norm_sq[i],
        ];
        let line: Vec<String> = cols.iter().map(|&v| fmt(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Machine-readable run metadata, written as ordered `key = value` lines.
pub fn write_meta(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("create {}", path.display()))?);
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<std::collections::BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("read {}", path.display()))?;
    let mut map = std::collections::BTreeMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}
