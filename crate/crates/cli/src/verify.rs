use std::io::Write;

use anyhow::bail;
use sar_adapt::mdp::{decode_state, NUM_STATES};
use sar_adapt::qlearning::{greedy_policy, value_iteration};

use crate::{load_experiment, load_qtable, qtable_path, VerifyArgs, EXIT_OK, EXIT_THRESHOLD};

pub const VI_TOLERANCE: f64 = 1e-10;

pub fn run(args: &VerifyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    if !args.threshold.is_finite() || args.threshold < 0.0 {
        bail!("--threshold must be a non-negative percentage, got {}", args.threshold);
    }
    let exp = load_experiment(&args.common)?;
    let cfg = &exp.config;
    let path = qtable_path(&args.qtable, &exp);
    let q = load_qtable(&path)?;

    if let Some(name) = &q.meta.model_name {
        if *name != exp.model.name {
            bail!(
                "{} was trained on model '{name}' but the config selects '{}'",
                path.display(),
                exp.model.name
            );
        }
    }
    if let Some(t) = &q.meta.training {
        if t.gamma != cfg.training.gamma {
            bail!(
                "{} was trained with gamma {} but the config has {}",
                path.display(),
                t.gamma,
                cfg.training.gamma
            );
        }
    }
    if let Some(r) = &q.meta.reward {
        if *r != cfg.reward {
            bail!("{} was trained with different reward parameters", path.display());
        }
    }

    let vi = value_iteration(&exp.model, &cfg.reward, cfg.training.gamma, VI_TOLERANCE)?;
    let learned = greedy_policy(&q);
    let optimal = greedy_policy(&vi.qtable);

    writeln!(out, "state  gaze    smile            answer   engagement learned  optimal")?;
    let mut agree = 0usize;
    for s in 0..NUM_STATES {
        let obs = decode_state(s)?;
        let same = learned[s] == optimal[s];
        agree += usize::from(same);
        writeln!(
            out,
            "{s:>5}  {:<7} {:<16} {:<8} {:<10} {:<8} {}{}",
            obs.gaze.label(),
            obs.smile.label(),
            obs.answer.label(),
            obs.engagement().label(),
            learned[s].short_id(),
            optimal[s].short_id(),
            if same { "" } else { "  *" }
        )?;
    }
    let percent = 100.0 * agree as f64 / NUM_STATES as f64;
    writeln!(
        out,
        "value iteration: {} sweeps, residual {:.3e}",
        vi.sweeps, vi.residual
    )?;
    // Integer comparison avoids 27/30*100 landing a hair under 90.
    let pass = (agree * 100) as f64 >= args.threshold * NUM_STATES as f64;
    writeln!(
        out,
        "agreement: {agree}/{NUM_STATES} states ({percent:.1}%), threshold {}% -> {}",
        args.threshold,
        if pass { "PASS" } else { "FAIL" }
    )?;
    Ok(if pass { EXIT_OK } else { EXIT_THRESHOLD })
}
