// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::sync::Arc;

use ecoprompt_core::farm::policy::{simulate, SimulationReport};

use crate::{load_config, CliError, SimulateArgs};

pub fn report(args: &SimulateArgs) -> Result<SimulationReport, CliError> {
    let config = load_config(args.config.as_deref())?;
    Ok(simulate(Arc::new(config.game), &config.model, args.seed, args.policy, args.max_ticks)?)
}

pub fn summary_line(r: &SimulationReport) -> String {
    let s = &r.score;
    let outcome = serde_json::to_value(s.outcome)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    format!(
        "final: seed={} policy={} outcome={} level={} lake_health={} coins={} xp={} ai_actions={} ticks={}",
        r.seed,
        r.policy,
        outcome,
        s.level,
        s.lake_health,
        s.coins,
        s.xp,
        s.ai_actions.total(),
        r.rows.last().map_or(0, |row| row.tick),
    )
}

/// CSV goes to `--out` or stdout; the final score line goes to stdout when
/// the CSV is in a file and to stderr otherwise.
pub fn run(args: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let r = report(&args)?;
    let csv = r.to_csv();
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
            writeln!(out, "{}", summary_line(&r))?;
        }
        None => {
            out.write_all(csv.as_bytes())?;
            writeln!(err, "{}", summary_line(&r))?;
        }
    }
    Ok(())
}
