//! Run configuration: a sectioned key-value TOML file mapped onto the solver
//! types, with full validation before anything touches the filesystem.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use listflow_core::{FlowParameters, GridSpacing, InitialDataSpec, RadialGrid};

/// Environment variable overriding `[output] directory`.
pub const OUTDIR_ENV: &str = "LISTFLOW_OUTDIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    grid: GridSection,
    physics: PhysicsSection,
    initial_data: InitialDataSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    monitors: MonitorsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    r_max: f64,
    intervals: usize,
    stretch: Option<String>,
    stretch_gamma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysicsSection {
    dimension: u32,
    coupling: f64,
    f_infinity: Option<f64>,
    t_end: f64,
    cfl_safety: Option<f64>,
    dt_floor: Option<f64>,
    f_cap: Option<f64>,
    robin_outer: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDataSection {
    kind: String,
    amplitude: Option<f64>,
    field_amplitude: Option<f64>,
    field_width: Option<f64>,
    path: Option<PathBuf>,
    seed: Option<u64>,
    perturbation: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    directory: Option<PathBuf>,
    series_dt: Option<f64>,
    snapshot_every: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonitorsSection {
    tolerance: Option<f64>,
    fatal: Option<bool>,
    blowup_c: Option<f64>,
    zeta_hypothesis: Option<f64>,
}

/// Fully validated run setup.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub params: FlowParameters,
    pub grid: Arc<RadialGrid>,
    pub spec: InitialDataSpec,
    pub seed: u64,
    pub perturbation: f64,
    pub out_dir: PathBuf,
    pub series_dt: f64,
    /// Write a snapshot every this many series samples (0: first/last only).
    pub snapshot_every: u64,
    /// Monitor slack; `None` means the discretisation default `10 h^2`.
    pub tolerance: Option<f64>,
    pub fatal_violations: bool,
    pub blowup_c: f64,
    /// Equivalent uniform step used for the default tolerance.
    pub h_equiv: f64,
}

impl RunSetup {
    pub fn monitor_tol(&self) -> f64 {
        self.tolerance
            .unwrap_or(10.0 * self.h_equiv * self.h_equiv)
    }
}

/// Loads and validates a configuration file.
pub fn load(path: &Path) -> Result<RunSetup> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: ConfigFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    build(cfg, path)
}

fn build(cfg: ConfigFile, path: &Path) -> Result<RunSetup> {
    let spacing = match cfg.grid.stretch.as_deref() {
        None | Some("uniform") => GridSpacing::Uniform,
        Some("power") => GridSpacing::Power {
            gamma: cfg
                .grid
                .stretch_gamma
                .ok_or_else(|| anyhow!("grid.stretch = \"power\" needs grid.stretch_gamma"))?,
        },
        Some(other) => bail!("unknown grid.stretch \"{other}\" (expected uniform or power)"),
    };
    let grid = RadialGrid::build(cfg.grid.r_max, cfg.grid.intervals, spacing)
        .map_err(|e| anyhow!("grid: {e}"))?;

    let mut params = FlowParameters::new(cfg.physics.dimension, cfg.physics.coupling);
    match (cfg.physics.dimension, cfg.physics.f_infinity) {
        (2, None) => bail!("physics.f_infinity is required when dimension = 2"),
        (2, Some(v)) => params.f_infinity = v,
        (_, Some(v)) if v != 1.0 => {
            bail!("physics.f_infinity must be 1 for dimension >= 3 (got {v})")
        }
        _ => {}
    }
    params.t_end = cfg.physics.t_end;
    if let Some(v) = cfg.physics.cfl_safety {
        params.cfl_safety = v;
    }
    if let Some(v) = cfg.physics.dt_floor {
        params.dt_floor = v;
    }
    if let Some(v) = cfg.physics.f_cap {
        params.f_cap = v;
    }
    if let Some(v) = cfg.physics.robin_outer {
        params.robin_outer = v;
    }
    if let Some(v) = cfg.monitors.zeta_hypothesis {
        params.zeta_hypothesis = v;
    }
    params.validate().map_err(|e| anyhow!("physics: {e}"))?;

    let id = &cfg.initial_data;
    let spec = match id.kind.as_str() {
        "flat" => InitialDataSpec::Flat,
        "metric_bump" => InitialDataSpec::MetricBump {
            amplitude: id
                .amplitude
                .ok_or_else(|| anyhow!("initial_data.amplitude is required for metric_bump"))?,
        },
        "field_bump" => InitialDataSpec::FieldBump {
            amplitude: id.field_amplitude.or(id.amplitude).ok_or_else(|| {
                anyhow!("initial_data.field_amplitude is required for field_bump")
            })?,
            width: id
                .field_width
                .ok_or_else(|| anyhow!("initial_data.field_width is required for field_bump"))?,
        },
        "combined" => InitialDataSpec::Combined {
            metric_amplitude: id
                .amplitude
                .ok_or_else(|| anyhow!("initial_data.amplitude is required for combined"))?,
            field_amplitude: id
                .field_amplitude
                .ok_or_else(|| anyhow!("initial_data.field_amplitude is required for combined"))?,
            field_width: id
                .field_width
                .ok_or_else(|| anyhow!("initial_data.field_width is required for combined"))?,
        },
        "tabulated" => {
            let data_path = id
                .path
                .as_ref()
                .ok_or_else(|| anyhow!("initial_data.path is required for tabulated"))?;
            let resolved = if data_path.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(data_path)
            } else {
                data_path.clone()
            };
            crate::tabulated::read(&resolved)?
        }
        other => bail!(
            "unknown initial_data.kind \"{other}\" \
             (expected flat, metric_bump, field_bump, combined or tabulated)"
        ),
    };

    let out_dir = std::env::var_os(OUTDIR_ENV)
        .map(PathBuf::from)
        .or_else(|| cfg.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let series_dt = match cfg.output.series_dt {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => bail!("output.series_dt must be positive (got {v})"),
        None => (cfg.physics.t_end / 100.0).max(f64::MIN_POSITIVE),
    };

    if let Some(t) = cfg.monitors.tolerance {
        if !(t > 0.0) || !t.is_finite() {
            bail!("monitors.tolerance must be positive (got {t})");
        }
    }
    let blowup_c = cfg.monitors.blowup_c.unwrap_or(2.0);
    if !(blowup_c >= 1.0) {
        bail!("monitors.blowup_c must be >= 1 (got {blowup_c})");
    }

    let h_equiv = cfg.grid.r_max / cfg.grid.intervals as f64;

    Ok(RunSetup {
        params,
        grid: Arc::new(grid),
        spec,
        seed: id.seed.unwrap_or(0),
        perturbation: id.perturbation.unwrap_or(0.0),
        out_dir,
        series_dt,
        snapshot_every: cfg.output.snapshot_every.unwrap_or(0),
        tolerance: cfg.monitors.tolerance,
        fatal_violations: cfg.monitors.fatal.unwrap_or(false),
        blowup_c,
        h_equiv,
    })
}
