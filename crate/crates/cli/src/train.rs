use std::io::Write;
use std::time::Instant;

use anyhow::Context;
use sar_adapt::qlearning::{train, write_metrics_csv, ConvergenceSummary};

use crate::{create_out_dir, load_experiment, CommonArgs, EXIT_OK};

/// Epochs at the end of training that the convergence summary looks at.
pub const CONVERGENCE_WINDOW: usize = 10;

pub fn run(args: &CommonArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let exp = load_experiment(args)?;
    let cfg = &exp.config;

    let started = Instant::now();
    let run = train(&exp.model, &cfg.reward, &cfg.training, cfg.seed)?;
    let elapsed = started.elapsed();

    let mut metrics = Vec::new();
    write_metrics_csv(&run.metrics, &mut metrics)?;
    create_out_dir(&cfg.out_dir)?;
    let qtable_path = cfg.out_dir.join("qtable.csv");
    let metrics_path = cfg.out_dir.join("metrics.csv");
    std::fs::write(&qtable_path, run.qtable.to_csv_string())
        .with_context(|| format!("writing {}", qtable_path.display()))?;
    std::fs::write(&metrics_path, metrics)
        .with_context(|| format!("writing {}", metrics_path.display()))?;

    let t = &cfg.training;
    writeln!(
        out,
        "trained model '{}' with seed {}: {} epochs x {} episodes x {} steps in {:.1} ms",
        exp.model.name,
        cfg.seed,
        t.epochs,
        t.episodes_per_epoch,
        t.steps_per_episode,
        elapsed.as_secs_f64() * 1e3
    )?;
    writeln!(out, "wrote {}", qtable_path.display())?;
    writeln!(out, "wrote {}", metrics_path.display())?;
    match ConvergenceSummary::from_metrics(&run.metrics, CONVERGENCE_WINDOW) {
        Some(c) => writeln!(
            out,
            "last {} epochs: update_sum ratio {:.4} (tail mean {:.4} / peak {:.4}), \
             max qtable_mean drift {:.5}",
            c.window, c.update_ratio, c.tail_mean_update_sum, c.peak_update_sum, c.max_mean_drift
        )?,
        None => writeln!(out, "too few epochs for a convergence summary")?,
    }
    Ok(EXIT_OK)
}
