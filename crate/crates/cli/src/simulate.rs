use std::io::{BufWriter, Write};

use anyhow::Context;
use sar_adapt::qlearning::{ConstantPolicy, Policy, TablePolicy};
use sar_adapt::session::{evaluate_policy, SessionContext};

use crate::{create_out_dir, load_experiment, load_qtable, qtable_path, SimulateArgs, EXIT_OK};

pub fn run(args: &SimulateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let exp = load_experiment(&args.common)?;
    let cfg = &exp.config;
    let policy: Box<dyn Policy> = match args.baseline {
        Some(action) => Box::new(ConstantPolicy(action)),
        None => Box::new(TablePolicy::greedy(&load_qtable(&qtable_path(&args.qtable, &exp))?)),
    };
    let ctx = SessionContext {
        recipe: &exp.recipe,
        catalog: &exp.catalog,
        personality: &exp.personality,
        reward: &cfg.reward,
    };
    let eval = evaluate_policy(policy.as_ref(), &exp.model, &ctx, args.episodes, cfg.seed)?;

    create_out_dir(&cfg.out_dir)?;
    let sessions_path = cfg.out_dir.join("sessions.jsonl");
    let file = std::fs::File::create(&sessions_path)
        .with_context(|| format!("writing {}", sessions_path.display()))?;
    let mut sessions = BufWriter::new(file);
    for (i, log) in eval.logs.iter().enumerate() {
        log.write_jsonl(i as u64, &mut sessions)?;
    }
    sessions.flush()?;
    let summary_path = cfg.out_dir.join("summary.json");
    let mut summary = serde_json::to_string_pretty(&eval.summary)?;
    summary.push('\n');
    std::fs::write(&summary_path, summary)
        .with_context(|| format!("writing {}", summary_path.display()))?;

    let s = &eval.summary;
    writeln!(out, "policy {} on model '{}', {} episodes, seed {}", s.policy, s.user, s.episodes, s.seed)?;
    match s.ci95_halfwidth {
        Some(h) => writeln!(out, "mean return: {:.4} +/- {h:.4} (95% CI)", s.mean_return)?,
        None => writeln!(out, "mean return: {:.4}", s.mean_return)?,
    }
    let [low, medium, high] = s.engagement_time_fractions;
    writeln!(out, "engagement time: low {low:.3}, medium {medium:.3}, high {high:.3}")?;
    writeln!(out, "medium-or-high: {:.3}", s.engaged_fraction())?;
    writeln!(out, "correct rate: {:.3}", s.correct_rate)?;
    writeln!(out, "wrote {}", sessions_path.display())?;
    writeln!(out, "wrote {}", summary_path.display())?;
    Ok(EXIT_OK)
}
