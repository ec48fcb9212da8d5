//! Carbon-tax scenarios and the end-to-end shock pipeline:
//! tax rate -> sector unit-cost increase -> price changes -> final-demand
//! contraction -> household income impacts.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::accounts::{self, EmissionProfile, HouseholdAccounts, HouseholdGroup, SectorAccounts};
use crate::error::{Error, Result};
use crate::leontief::{self, Diagnostics};
use crate::miyazawa::{self, MiyazawaDiagnostics};

pub const DEFAULT_RATE_RP_PER_KG: f64 = 30.0;

/// A carbon-tax scenario: rate in Rp per kg CO2e applied to every sector's
/// output through its emission intensity, with a pass-through coefficient
/// governing how much of the cost reaches output prices.
#[derive(Debug, Clone)]
pub struct TaxScenario {
    pub label: String,
    pub rate: f64,
    pub pass_through: f64,
    pub emissions: EmissionProfile,
}

impl TaxScenario {
    pub fn new(label: String, rate: f64, pass_through: f64, emissions: EmissionProfile) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::Scenario(format!("rate must be >= 0, got {rate}")));
        }
        if !pass_through.is_finite() || !(0.0..=1.0).contains(&pass_through) {
            return Err(Error::Scenario(format!(
                "pass_through must lie in [0,1], got {pass_through}"
            )));
        }
        Ok(Self { label, rate, pass_through, emissions })
    }

    /// Loads `scenario.json`. Unknown keys are an error; `emissions_file`
    /// is resolved relative to the scenario file's directory.
    pub fn from_json_file(path: impl AsRef<Path>, sector_ids: &[String]) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        let emissions_path = match path.parent() {
            Some(dir) => dir.join(&raw.emissions_file),
            None => raw.emissions_file.clone(),
        };
        let emissions = accounts::load_emissions(emissions_path, sector_ids)?;
        Self::new(raw.label, raw.rate_rp_per_kg, raw.pass_through, emissions)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    label: String,
    #[serde(default = "default_rate")]
    rate_rp_per_kg: f64,
    #[serde(default = "default_pass_through")]
    pass_through: f64,
    emissions_file: std::path::PathBuf,
}

fn default_rate() -> f64 {
    DEFAULT_RATE_RP_PER_KG
}

fn default_pass_through() -> f64 {
    1.0
}

/// dv[j] = rate * e[j] / 1e6: Rp of tax per Rp of output, a dimensionless
/// cost share, since e is kg per MILLION Rp of output.
pub fn tax_cost_vector(scenario: &TaxScenario) -> DVector<f64> {
    scenario.emissions.e.map(|e| scenario.rate * e / 1e6)
}

/// df[i] = -pass_through * dp[i] * f[i]: fixed nominal budgets crowd out
/// real demand in proportion to the price rise.
pub fn demand_shock(dp: &DVector<f64>, f: &DVector<f64>, pass_through: f64) -> DVector<f64> {
    dp.zip_map(f, |dp_i, f_i| -pass_through * dp_i * f_i)
}

/// Numerical diagnostics carried through a scenario run, surfaced in the
/// CLI's `diagnostics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunDiagnostics {
    pub leontief: Diagnostics,
    pub miyazawa: MiyazawaDiagnostics,
}

/// Everything a scenario run produces, per household group. `dy` stores the
/// income DECLINE as a positive magnitude, the paper's sign convention.
#[derive(Debug, Clone)]
pub struct ImpactResult {
    pub groups: Vec<HouseholdGroup>,
    /// Unit-cost shock per sector (dimensionless share of output value).
    pub dv: DVector<f64>,
    /// Price change per sector (dimensionless).
    pub dp: DVector<f64>,
    /// Final-demand change per sector (million Rp, nonpositive for a tax).
    pub df: DVector<f64>,
    /// Baseline income per group (million Rp).
    pub y1: DVector<f64>,
    /// Income decline per group, stored positive (million Rp).
    pub dy: DVector<f64>,
    /// Post-tax income, y1 - dy (million Rp).
    pub y2: DVector<f64>,
    /// Relative decline dy/y1 (fraction).
    pub pct_dy: DVector<f64>,
    /// Share of the total decline (fraction); zeros when total decline is 0.
    pub pct_cy: DVector<f64>,
    /// Gross revenue of the tax, sum of dv[j]*x[j] (million Rp).
    pub tax_revenue: f64,
    /// True when the scenario produced no income decline at all.
    pub zero_impact: bool,
    pub diagnostics: Option<RunDiagnostics>,
}

impl ImpactResult {
    /// Builds a result from baseline incomes and given declines, deriving
    /// y2, relative declines, and contribution shares. Used for table
    /// reproduction fixtures where the pipeline vectors are not available.
    pub fn from_income_decline(
        groups: Vec<HouseholdGroup>,
        y1: DVector<f64>,
        dy: DVector<f64>,
    ) -> Result<Self> {
        if groups.len() != y1.len() || y1.len() != dy.len() {
            return Err(Error::Dimension("groups, y1 and dy must have equal length".into()));
        }
        let y2 = &y1 - &dy;
        let pct_dy = dy.zip_map(&y1, |d, y| if y != 0.0 { d / y } else { 0.0 });
        let total: f64 = dy.iter().sum();
        let zero_impact = total == 0.0;
        let pct_cy = if zero_impact {
            DVector::zeros(dy.len())
        } else {
            dy.map(|d| d / total)
        };
        Ok(Self {
            groups,
            dv: DVector::zeros(0),
            dp: DVector::zeros(0),
            df: DVector::zeros(0),
            y1,
            dy,
            y2,
            pct_dy,
            pct_cy,
            tax_revenue: 0.0,
            zero_impact,
            diagnostics: None,
        })
    }

    pub fn total_decline(&self) -> f64 {
        self.dy.iter().sum()
    }
}

/// Runs the full pipeline: technical coefficients, Leontief inverse, price
/// model, demand contraction, Miyazawa income propagation. With
/// `open_model` the induced-consumption closure (K) is skipped.
pub fn run_scenario(
    accounts: &SectorAccounts,
    hh: &HouseholdAccounts,
    scenario: &TaxScenario,
    open_model: bool,
) -> Result<ImpactResult> {
    if scenario.emissions.e.len() != accounts.n() {
        return Err(Error::Dimension(format!(
            "emission profile covers {} sectors, IO table has {}",
            scenario.emissions.e.len(),
            accounts.n()
        )));
    }

    let a = leontief::technical_coefficients(accounts)?;
    let leontief_sys = leontief::leontief_inverse(&a)?;
    let dv = tax_cost_vector(scenario);
    let dp = leontief::price_model(&a, &dv)?;
    let df = demand_shock(&dp, &accounts.f, scenario.pass_through);

    let v = miyazawa::income_coefficients(hh, accounts)?;
    let c = miyazawa::consumption_coefficients(hh)?;
    let miyazawa_sys = miyazawa::build_miyazawa(&v, &c, &leontief_sys)?;
    let dy_signed = if open_model {
        miyazawa::income_impact_open(&miyazawa_sys, &df)?
    } else {
        miyazawa::income_impact(&miyazawa_sys, &df)?
    };

    // declines reported positive
    let dy = -dy_signed;
    let y1 = hh.y0.clone();
    let y2 = &y1 - &dy;
    let pct_dy = dy.zip_map(&y1, |d, y| if y != 0.0 { d / y } else { 0.0 });
    let total: f64 = dy.iter().sum();
    let zero_impact = total == 0.0;
    if zero_impact {
        log::warn!("scenario '{}' produced no income change", scenario.label);
    }
    let pct_cy = if zero_impact {
        DVector::zeros(dy.len())
    } else {
        dy.map(|d| d / total)
    };
    let tax_revenue = dv.dot(&accounts.x);

    Ok(ImpactResult {
        groups: hh.groups.clone(),
        dv,
        dp,
        df,
        y1,
        dy,
        y2,
        pct_dy,
        pct_cy,
        tax_revenue,
        zero_impact,
        diagnostics: Some(RunDiagnostics {
            leontief: leontief_sys.diagnostics.clone(),
            miyazawa: miyazawa_sys.diagnostics.clone(),
        }),
    })
}

// test helper: small but fully valid economy
#[cfg(test)]
pub(crate) fn test_economy() -> (SectorAccounts, HouseholdAccounts) {
    use crate::accounts::Region;
    use nalgebra::{dmatrix, DMatrix};

    let x = DVector::from_vec(vec![1000.0, 800.0]);
    let z = dmatrix![200.0, 240.0; 300.0, 80.0];
    let f = DVector::from_vec(vec![560.0, 420.0]);
    let va = DVector::from_vec(vec![500.0, 480.0]);
    let acc = SectorAccounts::new(vec!["s1".into(), "s2".into()], z, f, x, va).unwrap();

    let r = 20;
    let mut w = DMatrix::zeros(r, 2);
    let mut h = DMatrix::zeros(2, r);
    let mut groups = Vec::new();
    for g in 0..r {
        let (region, decile) = if g < 10 {
            (Region::Urban, (g + 1) as u8)
        } else {
            (Region::Rural, (g - 9) as u8)
        };
        groups.push(HouseholdGroup {
            region,
            decile,
            group_id: format!("{region}-{decile}"),
        });
        // income rises with decile; urban above rural
        let scale = (decile as f64) * if g < 10 { 1.2 } else { 0.8 };
        w[(g, 0)] = 2.0 * scale;
        w[(g, 1)] = 1.5 * scale;
        let income = w[(g, 0)] + w[(g, 1)];
        h[(0, g)] = 0.4 * income;
        h[(1, g)] = 0.3 * income;
    }
    let y0 = DVector::from_iterator(r, (0..r).map(|g| w.row(g).iter().sum::<f64>()));
    let hh = HouseholdAccounts { groups, w, h, y0 };
    (acc, hh)
}
