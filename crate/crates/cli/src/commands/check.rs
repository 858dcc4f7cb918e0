//! `listflow check`: build the initial data, print the a-priori bound
//! constants and the asymptotic-decay report. No evolution.

use std::path::Path;

use anyhow::{anyhow, Result};

use listflow_core::{compute_constants, validate_asymptotics, DecayFit};

use crate::commands::build_initial_state;
use crate::output::fmt;

pub fn check(config: &Path) -> Result<i32> {
    let setup = crate::config::load(config)?;
    let state = build_initial_state(&setup)?;
    let consts = compute_constants(&state, &setup.params).map_err(|e| anyhow!("{e}"))?;
    let decay = validate_asymptotics(&state, &setup.params).map_err(|e| anyhow!("{e}"))?;

    println!(
        "grid: r_max = {}, intervals = {}",
        setup.grid.r_max(),
        setup.grid.intervals()
    );
    println!(
        "physics: n = {}, k = {}, f_infinity = {}",
        setup.params.dimension, setup.params.coupling, setup.params.f_infinity
    );
    println!("monitor tolerance: {}", fmt(setup.monitor_tol()));
    println!();
    println!("bound constants:");
    println!("  C_z_plus        = {}", fmt(consts.c_z_plus));
    println!("  C_S_minus       = {}", fmt(consts.c_s_minus));
    println!("  C_f_minus       = {}", fmt(consts.c_f_minus));
    println!("  C_f_plus        = {}", fmt(consts.c_f_plus));
    println!("  p               = {}", fmt(consts.p));
    println!("  C_lambda2_minus = {}", fmt(consts.c_lambda2_minus));
    println!("  C_zeta_plus     = {}", fmt(consts.c_zeta_plus));
    println!("  S(0) >= 0 everywhere:     {}", consts.s_initially_nonneg);
    println!("  mu_BY(0) >= 0 everywhere: {}", consts.mass_initially_nonneg);
    println!();
    println!("asymptotic decay ({} tail nodes):", decay.tail_nodes);
    print_fit("  |f^2 - f_inf^2| ~ C/r  ", &decay.metric, setup.params.decay_slack);
    print_fit("  |z| ~ D/r^2            ", &decay.field, setup.params.decay_slack);
    Ok(0)
}

fn print_fit(label: &str, fit: &DecayFit, slack: f64) {
    if fit.exact {
        println!("{label}: exact (tail at round-off)");
    } else {
        println!(
            "{label}: fitted exponent {:.4}, required <= {:.4} -> {}",
            fit.exponent,
            -fit.required * (1.0 - slack),
            if fit.satisfied { "PASS" } else { "FAIL" }
        );
    }
}
