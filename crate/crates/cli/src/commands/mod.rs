pub mod check;
pub mod converge;
pub mod rescale;
pub mod run;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use listflow_core::{make_initial_data, FlowState, Termination};

use crate::config::RunSetup;

/// Builds the initial state, applying the seeded smooth perturbation to `z`
/// when one is configured. The perturbation is a sum of three odd modes
/// `eps/3 * r * exp(-(r/s)^2) * cos(w r)` with `s`, `w` drawn from the seed,
/// so it is deterministic and resolution independent.
pub fn build_initial_state(setup: &RunSetup) -> Result<FlowState> {
    let mut state = make_initial_data(&setup.spec, &setup.params, setup.grid.clone())?;
    if setup.perturbation != 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
        let eps = setup.perturbation / 3.0;
        for _ in 0..3 {
            let s: f64 = rng.random_range(0.5..3.0);
            let w: f64 = rng.random_range(0.0..3.0);
            for (zi, &r) in state.z.iter_mut().zip(setup.grid.nodes()) {
                *zi += eps * r * (-(r / s) * (r / s)).exp() * (w * r).cos();
            }
        }
        state.z[0] = 0.0;
        state.validate(setup.params.f_cap)?;
    }
    Ok(state)
}

/// Process exit code for a termination reason.
pub fn exit_code(term: &Termination, fatal_monitor_halt: bool) -> i32 {
    match term {
        Termination::Completed => 0,
        Termination::MinimalSphere { .. } => 10,
        Termination::NonFinite { .. } => 11,
        Termination::CflCollapse { .. } | Termination::MaxSteps => 12,
        Termination::HaltedByObserver => {
            if fatal_monitor_halt {
                13
            } else {
                0
            }
        }
    }
}
