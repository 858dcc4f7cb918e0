//! `listflow converge`: the same physics at a nested sequence of resolutions,
//! with observed Richardson orders for `f`, `z` and the Bianchi residual.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use listflow_core::{
    bianchi_residual, evolve, EvolveOptions, FlowState, ObserverSignal, RadialGrid, Termination,
};

use crate::commands::{build_initial_state, exit_code};
use crate::output::fmt;

/// Differences below this count as "exact" (identically resolved fields).
const EXACT_FLOOR: f64 = 1e-14;
/// Observed orders outside this window are flagged as pre-asymptotic.
const ORDER_WINDOW: (f64, f64) = (1.5, 2.5);

pub fn converge(config: &Path, levels: &[usize]) -> Result<i32> {
    if levels.len() < 3 {
        bail!("need at least 3 levels, got {}", levels.len());
    }
    for w in levels.windows(2) {
        if w[1] != 2 * w[0] {
            bail!(
                "levels must double: {} does not follow {} (nested grids are required)",
                w[1],
                w[0]
            );
        }
    }

    let base = crate::config::load(config)?;
    std::fs::create_dir_all(&base.out_dir)
        .with_context(|| format!("create {}", base.out_dir.display()))?;

    let mut finals: Vec<FlowState> = Vec::new();
    let mut bianchi_max: Vec<f64> = Vec::new();
    for &n in levels {
        let mut setup = base.clone();
        setup.grid = Arc::new(
            RadialGrid::build(base.grid.r_max(), n, base.grid.spacing())
                .map_err(|e| anyhow!("level {n}: {e}"))?,
        );
        let state0 = build_initial_state(&setup)?;
        let opts = EvolveOptions {
            sample_dt: 0.0,
            record_history: false,
            max_steps: None,
        };
        let summary = evolve(state0, &setup.params, &opts, |_, _| ObserverSignal::Continue)
            .map_err(|e| anyhow!("{e}"))?;
        if summary.termination != Termination::Completed {
            eprintln!("level {n} terminated early: {}", summary.termination);
            return Ok(exit_code(&summary.termination, false));
        }
        let b = bianchi_residual(&summary.final_state)
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v.abs()));
        bianchi_max.push(b);
        finals.push(summary.final_state);
    }

    // Nested-grid differences: coarse node i aligns with fine node 2i.
    let diff = |coarse: &[f64], fine: &[f64]| -> f64 {
        let mut e = 0.0_f64;
        for i in 0..coarse.len() {
            e = e.max((coarse[i] - fine[2 * i]).abs());
        }
        e
    };
    let mut err_f = Vec::new();
    let mut err_z = Vec::new();
    for pair in finals.windows(2) {
        err_f.push(diff(&pair[0].f, &pair[1].f));
        err_z.push(diff(&pair[0].z, &pair[1].z));
    }

    let order_of = |errs: &[f64], i: usize| -> Option<f64> {
        (errs[i] > EXACT_FLOOR && errs[i + 1] > EXACT_FLOOR)
            .then(|| (errs[i] / errs[i + 1]).log2())
    };
    let describe = |o: Option<f64>| -> String {
        match o {
            None => "exact".into(),
            Some(o) if o >= ORDER_WINDOW.0 && o <= ORDER_WINDOW.1 => format!("{o:.3}"),
            Some(o) => format!("{o:.3} (pre-asymptotic)"),
        }
    };

    let csv_path = base.out_dir.join("convergence.csv");
    let mut csv = BufWriter::new(
        File::create(&csv_path).with_context(|| format!("create {}", csv_path.display()))?,
    );
    writeln!(csv, "quantity,n_coarse,n_fine,error,observed_order")?;

    println!("t_end = {}, r_max = {}", base.params.t_end, base.grid.r_max());
    println!("level pair   err(f)        err(z)");
    for (i, pair) in levels.windows(2).enumerate() {
        println!(
            "{:>5}/{:<5}  {:.6e}  {:.6e}",
            pair[0], pair[1], err_f[i], err_z[i]
        );
        let order_f = if i > 0 { describe(order_of(&err_f, i - 1)) } else { String::new() };
        let order_z = if i > 0 { describe(order_of(&err_z, i - 1)) } else { String::new() };
        writeln!(csv, "f,{},{},{},{order_f}", pair[0], pair[1], fmt(err_f[i]))?;
        writeln!(csv, "z,{},{},{},{order_z}", pair[0], pair[1], fmt(err_z[i]))?;
    }
    println!("bianchi residual max per level:");
    for (n, b) in levels.iter().zip(&bianchi_max) {
        println!("{n:>8}  {b:.6e}");
    }
    for i in 0..levels.len() - 1 {
        let o = (bianchi_max[i] > EXACT_FLOOR && bianchi_max[i + 1] > EXACT_FLOOR)
            .then(|| (bianchi_max[i] / bianchi_max[i + 1]).log2());
        writeln!(
            csv,
            "bianchi,{},{},{},{}",
            levels[i],
            levels[i + 1],
            fmt(bianchi_max[i + 1]),
            describe(o)
        )?;
        println!("  order {} -> {}: {}", levels[i], levels[i + 1], describe(o));
    }
    for i in 0..err_f.len().saturating_sub(1) {
        println!(
            "observed order (f): {}   (z): {}",
            describe(order_of(&err_f, i)),
            describe(order_of(&err_z, i))
        );
    }
    csv.flush()?;
    println!("wrote {}", csv_path.display());
    Ok(0)
}
