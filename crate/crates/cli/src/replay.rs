// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use ecoprompt_server::transcript::{verify_file, TranscriptSummary};

use crate::{load_config, CliError, ReplayArgs};

pub fn run(args: ReplayArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let summary = verify_file(&args.transcript, (&config.model, &config.datacenter))
        .map_err(|e| CliError::Data(format!("{}: {e}", args.transcript.display())))?;
    print_table(&summary, out)?;
    Ok(())
}

pub fn print_table(s: &TranscriptSummary, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<8} {:>8} {:>8} {:>12} {:>12} {:>12}",
        "prompt", "input", "output", "energy_wh", "water_ml", "carbon_g"
    )?;
    for r in &s.rows {
        writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>12.6} {:>12.6} {:>12.6}",
            r.prompt_id, r.input_tokens, r.output_tokens, r.estimate.energy_wh, r.estimate.water_ml, r.estimate.carbon_g
        )?;
    }
    let t = &s.totals;
    writeln!(
        out,
        "{:<8} {:>8} {:>8} {:>12.6} {:>12.6} {:>12.6}",
        "totals",
        s.rows.iter().map(|r| r.input_tokens).sum::<u64>(),
        s.rows.iter().map(|r| r.output_tokens).sum::<u64>(),
        t.energy_wh,
        t.water_ml,
        t.carbon_g
    )?;
    writeln!(out, "{} prompts, totals match", s.rows.len())
}
