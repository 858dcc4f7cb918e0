//! `listflow run`: evolve a configuration, writing the time series, snapshots,
//! per-step curvature history and run metadata.

use std::path::Path;

use anyhow::{anyhow, Context, Result};

use listflow_core::{
    audit, compute_constants, evolve, masses, validate_asymptotics, DecayFit, EvolveOptions,
    ObserverSignal,
};

use crate::commands::{build_initial_state, exit_code};
use crate::output::{self, fmt, SeriesWriter};

#[derive(Default)]
struct WorstMargins {
    m1: f64,
    m2: f64,
    m3a: f64,
    m3b: f64,
    m4: f64,
    m5: f64,
    m6: f64,
    mass: f64,
}

impl WorstMargins {
    fn new() -> Self {
        WorstMargins {
            m1: f64::INFINITY,
            m2: f64::INFINITY,
            m3a: f64::INFINITY,
            m3b: f64::INFINITY,
            m4: f64::INFINITY,
            m5: f64::INFINITY,
            m6: f64::INFINITY,
            mass: f64::INFINITY,
        }
    }
}

pub fn run(config: &Path) -> Result<i32> {
    let setup = crate::config::load(config)?;
    let params = setup.params.clone();
    let tol = setup.monitor_tol();

    let state0 = build_initial_state(&setup)?;
    let consts = compute_constants(&state0, &params).map_err(|e| anyhow!("{e}"))?;
    let decay = validate_asymptotics(&state0, &params).map_err(|e| anyhow!("{e}"))?;

    let snap_dir = setup.out_dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir)
        .with_context(|| format!("create {}", snap_dir.display()))?;

    let mut series = SeriesWriter::create(&setup.out_dir.join("series.csv"))?;
    let mut io_err: Option<anyhow::Error> = None;
    let mut fatal_hit: Option<Vec<&'static str>> = None;
    let mut worst = WorstMargins::new();
    let mut sample_idx: u64 = 0;

    let opts = EvolveOptions {
        sample_dt: setup.series_dt,
        record_history: true,
        max_steps: None,
    };

    let summary = evolve(state0, &params, &opts, |state, info| {
        let rec = audit(state, &consts, &params, tol);
        let adm = match masses(state, &params) {
            Ok(m) => m.adm_estimate,
            Err(e) => {
                io_err = Some(anyhow!("{e}"));
                return ObserverSignal::Halt;
            }
        };
        worst.m1 = worst.m1.min(rec.m1);
        worst.m2 = worst.m2.min(rec.m2);
        worst.m3a = worst.m3a.min(rec.m3a);
        worst.m3b = worst.m3b.min(rec.m3b);
        worst.m4 = worst.m4.min(rec.m4);
        worst.m5 = worst.m5.min(rec.m5);
        worst.m6 = worst.m6.min(rec.m6);
        worst.mass = worst.mass.min(rec.mass_margin);
        if let Err(e) = series.row(&rec, info.dt, adm) {
            io_err = Some(e);
            return ObserverSignal::Halt;
        }
        if setup.snapshot_every > 0 && sample_idx % setup.snapshot_every == 0 {
            let path = snap_dir.join(format!("snap_{sample_idx:06}.csv"));
            if let Err(e) = output::write_snapshot(&path, state, &params) {
                io_err = Some(e);
                return ObserverSignal::Halt;
            }
        }
        sample_idx += 1;
        if setup.fatal_violations && !rec.violations.is_empty() {
            fatal_hit = Some(rec.violations.clone());
            return ObserverSignal::Halt;
        }
        ObserverSignal::Continue
    })
    .map_err(|e| anyhow!("{e}"))?;
    series.finish()?;
    if let Some(e) = io_err {
        return Err(e);
    }

    output::write_snapshot(&snap_dir.join("snap_final.csv"), &summary.final_state, &params)?;
    output::write_history(
        &setup.out_dir.join("history.csv"),
        &summary.history,
        setup.grid.nodes(),
    )?;

    let code = exit_code(&summary.termination, fatal_hit.is_some());
    let decay_line = |fit: &DecayFit| -> String {
        if fit.exact {
            "exact".into()
        } else {
            format!(
                "exponent {} (required <= {}): {}",
                fmt(fit.exponent),
                fmt(-fit.required * (1.0 - params.decay_slack)),
                if fit.satisfied { "ok" } else { "violated" }
            )
        }
    };
    let meta: Vec<(&str, String)> = vec![
        ("dimension", params.dimension.to_string()),
        ("coupling", fmt(params.coupling)),
        ("f_infinity", fmt(params.f_infinity)),
        ("r_max", fmt(setup.grid.r_max())),
        ("intervals", setup.grid.intervals().to_string()),
        ("t_end", fmt(params.t_end)),
        ("series_dt", fmt(setup.series_dt)),
        ("tolerance", fmt(tol)),
        ("blowup_c", fmt(setup.blowup_c)),
        ("seed", setup.seed.to_string()),
        ("termination", summary.termination.to_string()),
        ("exit_code", code.to_string()),
        ("steps", summary.steps.to_string()),
        ("t_final", fmt(summary.final_state.t)),
        ("dt_min", fmt(summary.dt_min)),
        ("dt_max", fmt(summary.dt_max)),
        ("c_z_plus", fmt(consts.c_z_plus)),
        ("c_s_minus", fmt(consts.c_s_minus)),
        ("c_f_minus", fmt(consts.c_f_minus)),
        ("c_f_plus", fmt(consts.c_f_plus)),
        ("p", fmt(consts.p)),
        ("c_lambda2_minus", fmt(consts.c_lambda2_minus)),
        ("c_zeta_plus", fmt(consts.c_zeta_plus)),
        ("s_initially_nonneg", consts.s_initially_nonneg.to_string()),
        ("mass_initially_nonneg", consts.mass_initially_nonneg.to_string()),
        ("decay_metric", decay_line(&decay.metric)),
        ("decay_field", decay_line(&decay.field)),
        ("min_m1", fmt(worst.m1)),
        ("min_m2", fmt(worst.m2)),
        ("min_m3a", fmt(worst.m3a)),
        ("min_m3b", fmt(worst.m3b)),
        ("min_m4", fmt(worst.m4)),
        ("min_m5", fmt(worst.m5)),
        ("min_m6", fmt(worst.m6)),
        ("min_mass_margin", fmt(worst.mass)),
        (
            "fatal_violations",
            fatal_hit
                .as_ref()
                .map(|v| v.join(";"))
                .unwrap_or_else(|| "none".into()),
        ),
    ];
    output::write_meta(&setup.out_dir.join("run.meta"), &meta)?;

    println!("termination: {}", summary.termination);
    println!("steps: {}  t_final: {}", summary.steps, summary.final_state.t);
    println!(
        "worst margins: m1 {:.3e}  m2 {:.3e}  m3a {:.3e}  m3b {:.3e}  m4 {:.3e}  m6 {:.3e}",
        worst.m1, worst.m2, worst.m3a, worst.m3b, worst.m4, worst.m6
    );
    if let Some(v) = &fatal_hit {
        println!("fatal monitor violations: {}", v.join(", "));
    }
    println!("output: {}", setup.out_dir.display());
    Ok(code)
}
