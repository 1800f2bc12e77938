// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::Path;

use ecoprompt_core::footprint::{
    estimate_footprint, DatacenterProfile, FootprintEstimate, ModelProfile, QueryUsage, ESTIMATE_LABEL,
};
use ecoprompt_core::relatable::{to_relatable, RelatableUnits};
use serde::{Deserialize, Serialize};

use crate::{load_config, CliError, EstimateArgs};

/// Contents of a `--profile` file. Either part may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverride {
    pub model: Option<ModelProfile>,
    pub datacenter: Option<DatacenterProfile>,
}

impl ProfileOverride {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read profile {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("malformed profile {}: {e}", path.display())))
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub label: &'static str,
    pub model: String,
    pub datacenter: String,
    pub usage: QueryUsage,
    pub footprint: FootprintEstimate,
    pub relatable: RelatableUnits,
}

pub fn compute(args: &EstimateArgs) -> Result<EstimateReport, CliError> {
    let config = load_config(args.config.as_deref())?;
    let overrides = match &args.profile {
        Some(p) => ProfileOverride::load(p)?,
        None => ProfileOverride::default(),
    };
    let model = overrides.model.unwrap_or(config.model);
    let datacenter = overrides.datacenter.unwrap_or(config.datacenter);
    model.validate()?;
    datacenter.validate()?;

    let mut usage = QueryUsage::new(args.input_tokens, args.output_tokens);
    if let Some(l) = args.latency {
        usage = usage.with_latency(l);
    }
    usage.validate()?;

    let footprint = estimate_footprint(&model, &datacenter, &usage);
    Ok(EstimateReport {
        label: ESTIMATE_LABEL,
        model: model.name,
        datacenter: datacenter.name,
        usage,
        relatable: to_relatable(&footprint, &config.relatable),
        footprint,
    })
}

pub fn run(args: EstimateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = compute(&args)?;
    if args.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
        writeln!(out, "{text}")?;
        return Ok(());
    }
    let f = &report.footprint;
    writeln!(out, "{} ({} in {})", report.label, report.model, report.datacenter)?;
    writeln!(out, "tokens: {} in, {} out", report.usage.input_tokens, report.usage.output_tokens)?;
    writeln!(out, "latency: {:.3} s", f.latency_s)?;
    writeln!(out, "energy: {:.3} Wh", f.energy_wh)?;
    writeln!(out, "water: {:.3} mL", f.water_ml)?;
    writeln!(out, "carbon: {:.3} gCO2e", f.carbon_g)?;
    writeln!(out, "relatable: {}", report.relatable.summary())?;
    Ok(())
}
