//! Rendering of scenario results: per-class impact tables, contribution
//! shares, Lorenz/Gini data files, and the CLI pipeline orchestration.
//!
//! Thousands separators are presentation-only; every emitted file carries
//! raw numerals so it can be parsed back.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::Serialize;

use crate::accounts::{self, Region};
use crate::error::{Error, Result};
use crate::fiscal::{self, ImpactResult, TaxScenario};
use crate::inequality::{self, GroupedDistribution, Scope};

/// Output precision, matching the published table: incomes as integer
/// million Rp, declines to 2 decimals, relative declines to 7 decimals.
#[derive(Debug, Clone)]
pub struct Precision {
    pub dy_decimals: usize,
    pub pct_dy_decimals: usize,
    pub pct_cy_decimals: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            dy_decimals: 2,
            pct_dy_decimals: 7,
            pct_cy_decimals: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sectors_file: PathBuf,
    pub households_file: PathBuf,
    pub scenario_file: PathBuf,
    pub output_dir: PathBuf,
    /// (urban, rural) population weights; required for the All-scope Gini.
    pub population_weights: Option<(f64, f64)>,
    pub open_model: bool,
    pub scope: Scope,
    pub precision: Precision,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some((u, r)) = self.population_weights {
            if (u + r - 1.0).abs() > 1e-12 || u <= 0.0 || r <= 0.0 {
                return Err(Error::Config(format!(
                    "population weights must be positive and sum to 1, got urban={u}, rural={r}"
                )));
            }
        }
        Ok(())
    }
}

struct ClassRow {
    label: String,
    y1: f64,
    dy: f64,
}

/// Per-class aggregation: scope All sums urban and rural groups decile by
/// decile, a regional scope keeps its 10 groups.
fn class_rows(result: &ImpactResult, scope: Scope) -> Vec<ClassRow> {
    (1..=10u8)
        .map(|decile| {
            let (mut y1, mut dy) = (0.0, 0.0);
            for (g, group) in result.groups.iter().enumerate() {
                if group.decile != decile {
                    continue;
                }
                let keep = match scope {
                    Scope::All => true,
                    Scope::Urban => group.region == Region::Urban,
                    Scope::Rural => group.region == Region::Rural,
                };
                if keep {
                    y1 += result.y1[g];
                    dy += result.dy[g];
                }
            }
            ClassRow {
                label: format!("Class - {decile}"),
                y1,
                dy,
            }
        })
        .collect()
}

/// Table-1-style CSV: `class,y1,dy,y2,pct_dy,pct_cy` plus a `Total` row.
pub fn emit_impact_table(result: &ImpactResult, scope: Scope, precision: &Precision) -> String {
    let rows = class_rows(result, scope);
    let total_dy: f64 = rows.iter().map(|r| r.dy).sum();
    let total_y1: f64 = rows.iter().map(|r| r.y1).sum();

    let mut out = String::from("class,y1,dy,y2,pct_dy,pct_cy\n");
    let mut push_row = |label: &str, y1: f64, dy: f64| {
        let y2 = y1 - dy;
        let pct_dy = if y1 != 0.0 { dy / y1 } else { 0.0 };
        let pct_cy = if total_dy > 0.0 {
            format!("{:.*}%", precision.pct_cy_decimals, 100.0 * dy / total_dy)
        } else {
            "NA".to_string()
        };
        out.push_str(&format!(
            "{label},{y1:.0},{dy:.dyp$},{y2:.0},{pct:.pdp$}%,{pct_cy}\n",
            dyp = precision.dy_decimals,
            pct = 100.0 * pct_dy,
            pdp = precision.pct_dy_decimals,
        ));
    };
    for row in &rows {
        push_row(&row.label, row.y1, row.dy);
    }
    push_row("Total", total_y1, total_dy);
    out
}

/// Figure-1-style CSV of contribution shares: `class,pct_cy`, All scope.
/// Shares are `NA` when the scenario produced no decline at all.
pub fn emit_contribution_shares(result: &ImpactResult, precision: &Precision) -> String {
    let rows = class_rows(result, Scope::All);
    let total_dy: f64 = rows.iter().map(|r| r.dy).sum();
    let mut out = String::from("class,pct_cy\n");
    for row in &rows {
        if total_dy > 0.0 {
            out.push_str(&format!(
                "{},{:.*}%\n",
                row.label,
                precision.pct_cy_decimals,
                100.0 * row.dy / total_dy
            ));
        } else {
            out.push_str(&format!("{},NA\n", row.label));
        }
    }
    out
}

#[derive(Serialize)]
struct LorenzReport {
    scope: Scope,
    gini_before: f64,
    gini_after: f64,
    delta: f64,
    knots_before: Vec<(f64, f64)>,
    knots_after: Vec<(f64, f64)>,
}

/// Figure-3-style JSON with both Lorenz curves and the Gini change at full
/// float precision (the deltas of interest are of order 1e-8).
pub fn emit_lorenz_gini(
    before: &GroupedDistribution,
    after: &GroupedDistribution,
    scope: Scope,
) -> Result<String> {
    let delta = inequality::gini_delta(before, after)?;
    let report = LorenzReport {
        scope,
        gini_before: delta.g_before,
        gini_after: delta.g_after,
        delta: delta.delta,
        knots_before: inequality::lorenz(before)?.knots,
        knots_after: inequality::lorenz(after)?.knots,
    };
    serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("serializing lorenz report: {e}")))
}

#[derive(Serialize)]
struct DiagnosticsReport<'a> {
    label: &'a str,
    leontief: &'a crate::leontief::Diagnostics,
    miyazawa: &'a crate::miyazawa::MiyazawaDiagnostics,
    tax_revenue: f64,
    total_decline: f64,
    zero_impact: bool,
}

fn regional_distribution(result: &ImpactResult, region: Region, post_tax: bool) -> Result<GroupedDistribution> {
    let mut incomes = vec![0.0; 10];
    for (g, group) in result.groups.iter().enumerate() {
        if group.region == region {
            incomes[group.decile as usize - 1] = if post_tax { result.y2[g] } else { result.y1[g] };
        }
    }
    let scope = match region {
        Region::Urban => Scope::Urban,
        Region::Rural => Scope::Rural,
    };
    GroupedDistribution::from_decile_incomes(&DVector::from_vec(incomes), scope)
}

/// Builds the before/after distributions for a scope. The All scope merges
/// the regions and needs population weights.
pub fn scoped_distributions(
    result: &ImpactResult,
    scope: Scope,
    population_weights: Option<(f64, f64)>,
) -> Result<Option<(GroupedDistribution, GroupedDistribution)>> {
    match scope {
        Scope::Urban => Ok(Some((
            regional_distribution(result, Region::Urban, false)?,
            regional_distribution(result, Region::Urban, true)?,
        ))),
        Scope::Rural => Ok(Some((
            regional_distribution(result, Region::Rural, false)?,
            regional_distribution(result, Region::Rural, true)?,
        ))),
        Scope::All => match population_weights {
            None => {
                log::warn!("no population weights supplied; skipping the combined Lorenz/Gini output");
                Ok(None)
            }
            Some((wu, wr)) => {
                let before = inequality::merge(
                    &regional_distribution(result, Region::Urban, false)?,
                    &regional_distribution(result, Region::Rural, false)?,
                    wu,
                    wr,
                )?;
                let after = inequality::merge(
                    &regional_distribution(result, Region::Urban, true)?,
                    &regional_distribution(result, Region::Rural, true)?,
                    wu,
                    wr,
                )?;
                Ok(Some((before, after)))
            }
        },
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| Error::Io { path, source })
}

/// Loads the inputs and runs the pipeline without touching the output
/// directory. Used by callers that consume the result programmatically.
pub fn run_in_memory(config: &RunConfig) -> Result<ImpactResult> {
    let sector_accounts = accounts::load_sector_accounts(&config.sectors_file)?;
    let hh = accounts::load_household_accounts(&config.households_file, &sector_accounts.sector_ids)?;
    let scenario = TaxScenario::from_json_file(&config.scenario_file, &sector_accounts.sector_ids)?;
    fiscal::run_scenario(&sector_accounts, &hh, &scenario, config.open_model)
}

/// Runs the whole pipeline and writes the output files:
/// `impact_all.csv`, `impact_urban.csv`, `impact_rural.csv`,
/// `contribution.csv`, `lorenz_<scope>.json`, `diagnostics.json`.
pub fn run(config: &RunConfig) -> Result<ImpactResult> {
    config.validate()?;
    let sector_accounts = accounts::load_sector_accounts(&config.sectors_file)?;
    let hh = accounts::load_household_accounts(&config.households_file, &sector_accounts.sector_ids)?;
    let scenario = TaxScenario::from_json_file(&config.scenario_file, &sector_accounts.sector_ids)?;
    let result = fiscal::run_scenario(&sector_accounts, &hh, &scenario, config.open_model)?;

    std::fs::create_dir_all(&config.output_dir).map_err(|source| Error::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    let dir = config.output_dir.as_path();
    let p = &config.precision;
    write_file(dir, "impact_all.csv", &emit_impact_table(&result, Scope::All, p))?;
    write_file(dir, "impact_urban.csv", &emit_impact_table(&result, Scope::Urban, p))?;
    write_file(dir, "impact_rural.csv", &emit_impact_table(&result, Scope::Rural, p))?;
    write_file(dir, "contribution.csv", &emit_contribution_shares(&result, p))?;

    if let Some((before, after)) =
        scoped_distributions(&result, config.scope, config.population_weights)?
    {
        let json = emit_lorenz_gini(&before, &after, config.scope)?;
        write_file(dir, &format!("lorenz_{}.json", config.scope), &json)?;
    }

    let diagnostics = DiagnosticsReport {
        label: &scenario.label,
        leontief: &result.diagnostics.as_ref().expect("pipeline run").leontief,
        miyazawa: &result.diagnostics.as_ref().expect("pipeline run").miyazawa,
        tax_revenue: result.tax_revenue,
        total_decline: result.total_decline(),
        zero_impact: result.zero_impact,
    };
    let diag_json = serde_json::to_string_pretty(&diagnostics)
        .map_err(|e| Error::Config(format!("serializing diagnostics: {e}")))?;
    write_file(dir, "diagnostics.json", &diag_json)?;

    Ok(result)
}
