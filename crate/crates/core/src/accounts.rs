//! Immutable in-memory accounts: the inter-industry table, the household
//! satellite (20 groups = 10 deciles x {urban, rural}), and per-sector
//! emission intensities.
//!
//! Loading is order-independent: rows may appear in any order in the CSV
//! files and are realigned to the canonical sector/group ordering.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for row/column balance checks. Published IO tables
/// carry rounding, so exact balance is required only of synthetic fixtures.
pub const BALANCE_TOL: f64 = 0.005;

/// The square inter-industry table plus its margins, all in million Rp.
#[derive(Debug, Clone)]
pub struct SectorAccounts {
    pub sector_ids: Vec<String>,
    /// n x n inter-industry flows, Z[i][j] = sales of sector i to sector j.
    pub z: DMatrix<f64>,
    /// Final demand per sector.
    pub f: DVector<f64>,
    /// Total output per sector.
    pub x: DVector<f64>,
    /// Value added per sector.
    pub va: DVector<f64>,
}

impl SectorAccounts {
    pub fn n(&self) -> usize {
        self.sector_ids.len()
    }

    /// Validates every invariant: nonnegativity, finiteness, row balance
    /// `sum_j Z[i,j] + f[i] = x[i]` and column balance
    /// `sum_i Z[i,j] + va[j] = x[j]`, both within [`BALANCE_TOL`].
    pub fn new(
        sector_ids: Vec<String>,
        z: DMatrix<f64>,
        f: DVector<f64>,
        x: DVector<f64>,
        va: DVector<f64>,
    ) -> Result<Self> {
        let n = sector_ids.len();
        if n == 0 {
            return Err(Error::Dimension("at least one sector required".into()));
        }
        if z.nrows() != n || z.ncols() != n || f.len() != n || x.len() != n || va.len() != n {
            return Err(Error::Dimension(format!(
                "expected n={n}, got Z {}x{}, f {}, x {}, va {}",
                z.nrows(),
                z.ncols(),
                f.len(),
                x.len(),
                va.len()
            )));
        }
        for v in z.iter().chain(f.iter()).chain(x.iter()).chain(va.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFinite("sector accounts contain NaN or Inf".into()));
            }
        }
        if z.iter().any(|&v| v < 0.0) {
            return Err(Error::Schema {
                path: "<memory>".into(),
                message: "negative inter-industry flow".into(),
            });
        }
        if x.iter().any(|&v| v < 0.0) {
            return Err(Error::Schema {
                path: "<memory>".into(),
                message: "negative total output".into(),
            });
        }
        let accounts = Self { sector_ids, z, f, x, va };
        accounts.check_balances()?;
        Ok(accounts)
    }

    fn check_balances(&self) -> Result<()> {
        let mut worst: Option<(String, f64)> = None;
        for i in 0..self.n() {
            let row_sum: f64 = self.z.row(i).iter().sum::<f64>() + self.f[i];
            let rel = rel_gap(row_sum, self.x[i]);
            if rel > BALANCE_TOL {
                let msg = format!(
                    "row '{}': intermediate + final demand = {row_sum}, total output = {}",
                    self.sector_ids[i], self.x[i]
                );
                worst = worse(worst, msg, rel);
            }
        }
        for j in 0..self.n() {
            let col_sum: f64 = self.z.column(j).iter().sum::<f64>() + self.va[j];
            let rel = rel_gap(col_sum, self.x[j]);
            if rel > BALANCE_TOL {
                let msg = format!(
                    "column '{}': intermediate + value added = {col_sum}, total output = {}",
                    self.sector_ids[j], self.x[j]
                );
                worst = worse(worst, msg, rel);
            }
        }
        match worst {
            Some((msg, _)) => Err(Error::Balance(msg)),
            None => Ok(()),
        }
    }
}

fn rel_gap(sum: f64, target: f64) -> f64 {
    (sum - target).abs() / target.abs().max(1.0)
}

fn worse(cur: Option<(String, f64)>, msg: String, rel: f64) -> Option<(String, f64)> {
    match cur {
        Some((_, r)) if r >= rel => cur,
        _ => Some((msg, rel)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Region {
    Urban,
    Rural,
}

impl Region {
    pub fn parse(s: &str) -> Option<Region> {
        match s.to_ascii_lowercase().as_str() {
            "urban" => Some(Region::Urban),
            "rural" => Some(Region::Rural),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Urban => write!(f, "urban"),
            Region::Rural => write!(f, "rural"),
        }
    }
}

/// One of the 20 household groups. Decile 1 is the lowest income class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HouseholdGroup {
    pub region: Region,
    pub decile: u8,
    pub group_id: String,
}

/// Household satellite accounts keyed to the sector ordering of a
/// [`SectorAccounts`]. Groups are canonically ordered urban 1..10 then
/// rural 1..10.
#[derive(Debug, Clone)]
pub struct HouseholdAccounts {
    pub groups: Vec<HouseholdGroup>,
    /// r x n income payments by sector (million Rp).
    pub w: DMatrix<f64>,
    /// n x r consumption by sector (million Rp).
    pub h: DMatrix<f64>,
    /// Baseline group income (million Rp); row sums of W when not supplied.
    pub y0: DVector<f64>,
}

impl HouseholdAccounts {
    pub fn r(&self) -> usize {
        self.groups.len()
    }

    pub fn n(&self) -> usize {
        self.w.ncols()
    }
}

/// Emission intensity per sector, kg CO2e per million Rp of output.
#[derive(Debug, Clone)]
pub struct EmissionProfile {
    pub e: DVector<f64>,
}

// ---------------------------------------------------------------------------
// CSV loading
// ---------------------------------------------------------------------------

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn schema_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn parse_number(path: &Path, field: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| schema_err(path, format!("field '{field}': cannot parse '{raw}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::NonFinite(format!(
            "{}: field '{field}' is {raw}",
            path.display()
        )));
    }
    Ok(v)
}

/// Loads `sectors.csv`: header `sector_id,<id_1>,...,<id_n>,final_demand,
/// value_added,total_output`, one row per sector giving its Z row. Rows may
/// appear in any order; they are aligned to the header's sector ordering.
pub fn load_sector_accounts(path: impl AsRef<Path>) -> Result<SectorAccounts> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| schema_err(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 5 || header[0] != "sector_id" {
        return Err(schema_err(path, "expected header sector_id,<sectors...>,final_demand,value_added,total_output"));
    }
    let tail = &header[header.len() - 3..];
    if tail != ["final_demand", "value_added", "total_output"] {
        return Err(schema_err(path, "last three columns must be final_demand,value_added,total_output"));
    }
    let sector_ids: Vec<String> = header[1..header.len() - 3].to_vec();
    let n = sector_ids.len();
    let index: HashMap<&str, usize> = sector_ids.iter().map(|s| s.as_str()).zip(0..).collect();
    if index.len() != n {
        return Err(schema_err(path, "duplicate sector id in header"));
    }

    let mut z = DMatrix::zeros(n, n);
    let mut f = DVector::zeros(n);
    let mut x = DVector::zeros(n);
    let mut va = DVector::zeros(n);
    let mut seen = vec![false; n];

    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        if record.len() != n + 4 {
            return Err(schema_err(path, format!("row has {} fields, expected {}", record.len(), n + 4)));
        }
        let id = record[0].trim();
        let &i = index
            .get(id)
            .ok_or_else(|| schema_err(path, format!("row sector '{id}' not in header")))?;
        if seen[i] {
            return Err(schema_err(path, format!("duplicate row for sector '{id}'")));
        }
        seen[i] = true;
        for j in 0..n {
            let v = parse_number(path, &sector_ids[j], &record[1 + j])?;
            if v < 0.0 {
                return Err(schema_err(path, format!("negative flow Z[{id},{}]", sector_ids[j])));
            }
            z[(i, j)] = v;
        }
        f[i] = parse_number(path, "final_demand", &record[n + 1])?;
        va[i] = parse_number(path, "value_added", &record[n + 2])?;
        x[i] = parse_number(path, "total_output", &record[n + 3])?;
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(schema_err(path, format!("no row for sector '{}'", sector_ids[i])));
    }

    SectorAccounts::new(sector_ids, z, f, x, va).map_err(|e| match e {
        // re-home in-memory schema errors to the offending file
        Error::Schema { message, .. } => Error::Schema {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Loads `households.csv`: header `group_id,region,decile,kind,
/// <id_1>,...,<id_n>,total`. Income rows populate W (and y0 via `total`,
/// when present); consumption rows populate a column of H. All 20
/// (region, decile) pairs must carry exactly one income row.
pub fn load_household_accounts(
    path: impl AsRef<Path>,
    sector_ids: &[String],
) -> Result<HouseholdAccounts> {
    let path = path.as_ref();
    let n = sector_ids.len();
    let mut reader = open_reader(path)?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| schema_err(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 6
        || header[..4] != ["group_id", "region", "decile", "kind"]
        || header[header.len() - 1] != "total"
    {
        return Err(schema_err(path, "expected header group_id,region,decile,kind,<sectors...>,total"));
    }
    let file_sectors = &header[4..header.len() - 1];
    if file_sectors.len() != n {
        return Err(Error::Dimension(format!(
            "{}: {} sector columns against n={n}",
            path.display(),
            file_sectors.len()
        )));
    }
    // Column alignment: the file may order sectors differently.
    let mut col_map = Vec::with_capacity(n);
    for id in file_sectors {
        let pos = sector_ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| schema_err(path, format!("sector column '{id}' not in sector accounts")))?;
        col_map.push(pos);
    }
    if col_map.len() != col_map.iter().collect::<std::collections::HashSet<_>>().len() {
        return Err(schema_err(path, "duplicate sector column"));
    }

    let r = 20;
    let mut w = DMatrix::zeros(r, n);
    let mut h = DMatrix::zeros(n, r);
    let mut y0_supplied: Vec<Option<f64>> = vec![None; r];
    let mut group_ids: Vec<Option<String>> = vec![None; r];
    let mut income_seen = vec![false; r];
    let mut consumption_seen = vec![false; r];

    // Canonical slot: urban deciles 1..10 then rural 1..10.
    let slot = |region: Region, decile: u8| -> usize {
        let base = match region {
            Region::Urban => 0,
            Region::Rural => 10,
        };
        base + decile as usize - 1
    };

    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        if record.len() != n + 5 {
            return Err(schema_err(path, format!("row has {} fields, expected {}", record.len(), n + 5)));
        }
        let group_id = record[0].trim().to_string();
        let region = Region::parse(record[1].trim())
            .ok_or_else(|| schema_err(path, format!("unknown region '{}'", &record[1])))?;
        let decile: u8 = record[2]
            .trim()
            .parse()
            .ok()
            .filter(|d| (1..=10).contains(d))
            .ok_or_else(|| schema_err(path, format!("decile '{}' out of 1..10", &record[2])))?;
        let kind = record[3].trim();
        let g = slot(region, decile);

        match &group_ids[g] {
            Some(existing) if *existing != group_id => {
                return Err(Error::GroupSet(format!(
                    "({region}, decile {decile}) appears as both '{existing}' and '{group_id}'"
                )));
            }
            None => group_ids[g] = Some(group_id.clone()),
            _ => {}
        }

        let mut values = vec![0.0; n];
        for (k, &j) in col_map.iter().enumerate() {
            let v = parse_number(path, &file_sectors[k], &record[4 + k])?;
            if v < 0.0 {
                return Err(schema_err(path, format!("negative entry for group '{group_id}'")));
            }
            values[j] = v;
        }
        let total_raw = record[n + 4].trim();

        match kind {
            "income" => {
                if income_seen[g] {
                    return Err(Error::GroupSet(format!(
                        "duplicate income row for ({region}, decile {decile})"
                    )));
                }
                income_seen[g] = true;
                for j in 0..n {
                    w[(g, j)] = values[j];
                }
                if !total_raw.is_empty() {
                    y0_supplied[g] = Some(parse_number(path, "total", total_raw)?);
                }
            }
            "consumption" => {
                if consumption_seen[g] {
                    return Err(Error::GroupSet(format!(
                        "duplicate consumption row for ({region}, decile {decile})"
                    )));
                }
                consumption_seen[g] = true;
                for j in 0..n {
                    h[(j, g)] = values[j];
                }
            }
            other => return Err(schema_err(path, format!("unknown kind '{other}'"))),
        }
    }

    if let Some(g) = income_seen.iter().position(|&s| !s) {
        let (region, decile) = if g < 10 {
            (Region::Urban, g + 1)
        } else {
            (Region::Rural, g - 9)
        };
        return Err(Error::GroupSet(format!(
            "missing income row for ({region}, decile {decile})"
        )));
    }

    let mut y0 = DVector::zeros(r);
    for g in 0..r {
        let row_sum: f64 = w.row(g).iter().sum();
        match y0_supplied[g] {
            Some(total) => {
                if rel_gap(row_sum, total) > BALANCE_TOL {
                    return Err(Error::Balance(format!(
                        "group '{}': supplied income total {total} vs row sum {row_sum}",
                        group_ids[g].as_deref().unwrap_or("?")
                    )));
                }
                y0[g] = total;
            }
            None => y0[g] = row_sum,
        }
    }

    // Consumption shares above 1 are rejected at load time.
    for g in 0..r {
        let spend: f64 = h.column(g).iter().sum();
        if y0[g] > 0.0 && spend / y0[g] > 1.0 + 1e-12 {
            return Err(Error::ConsumptionShare {
                group: group_ids[g].clone().unwrap_or_default(),
                share: spend / y0[g],
            });
        }
    }

    let groups = (0..r)
        .map(|g| {
            let (region, decile) = if g < 10 {
                (Region::Urban, (g + 1) as u8)
            } else {
                (Region::Rural, (g - 9) as u8)
            };
            HouseholdGroup {
                region,
                decile,
                group_id: group_ids[g].clone().expect("all income rows present"),
            }
        })
        .collect();

    Ok(HouseholdAccounts { groups, w, h, y0 })
}

/// Loads `emissions.csv` (header `sector_id,kg_co2e_per_million_rp`) and
/// aligns intensities to the given sector ordering. Every sector must be
/// listed exactly once.
pub fn load_emissions(path: impl AsRef<Path>, sector_ids: &[String]) -> Result<EmissionProfile> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;

    let header = reader.headers().map_err(|e| schema_err(path, e.to_string()))?;
    if header.len() != 2 || &header[0] != "sector_id" || &header[1] != "kg_co2e_per_million_rp" {
        return Err(schema_err(path, "expected header sector_id,kg_co2e_per_million_rp"));
    }

    let n = sector_ids.len();
    let mut e = DVector::zeros(n);
    let mut seen = vec![false; n];
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        if record.len() != 2 {
            return Err(schema_err(path, "row must have 2 fields"));
        }
        let id = record[0].trim();
        let j = sector_ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::UnknownSector(id.to_string()))?;
        if seen[j] {
            return Err(schema_err(path, format!("duplicate entry for sector '{id}'")));
        }
        seen[j] = true;
        let v = parse_number(path, "kg_co2e_per_million_rp", &record[1])?;
        if v < 0.0 {
            return Err(Error::NegativeIntensity(id.to_string()));
        }
        e[j] = v;
    }
    if let Some(j) = seen.iter().position(|&s| !s) {
        return Err(Error::MissingSector(sector_ids[j].clone()));
    }

    Ok(EmissionProfile { e })
}
