//! Household extension of the Leontief system: income coefficients V,
//! consumption coefficients C, the multi-sector income multiplier L = VB,
//! and the interrelational income multiplier K = (I - VBC)^-1 that closes
//! the model over induced consumption between household groups.
//!
//! K spans all 20 groups jointly (urban and rural in one matrix);
//! splitting by region would sever urban-rural consumption linkages.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::accounts::{HouseholdAccounts, SectorAccounts};
use crate::error::{Error, Result};
use crate::leontief::{self, LeontiefSystem};

#[derive(Debug, Clone, Serialize)]
pub struct MiyazawaDiagnostics {
    /// Power-iteration estimate of the spectral radius of M = VBC.
    pub m_spectral_bound: f64,
    /// max-norm of (I-M)K - I.
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct MiyazawaSystem {
    /// r x n income coefficients, income per unit output.
    pub v: DMatrix<f64>,
    /// n x r consumption coefficients, consumption per unit income.
    pub c: DMatrix<f64>,
    /// r x n multi-sector income multiplier VB.
    pub l: DMatrix<f64>,
    /// r x r internal matrix VBC.
    pub m: DMatrix<f64>,
    /// r x r interrelational income multiplier (I-M)^-1.
    pub k: DMatrix<f64>,
    pub diagnostics: MiyazawaDiagnostics,
}

/// V[g,j] = W[g,j] / x[j], with the same zero-output convention as the
/// technical coefficients.
pub fn income_coefficients(
    hh: &HouseholdAccounts,
    accounts: &SectorAccounts,
) -> Result<DMatrix<f64>> {
    if hh.n() != accounts.n() {
        return Err(Error::Dimension(format!(
            "household accounts cover {} sectors, IO table has {}",
            hh.n(),
            accounts.n()
        )));
    }
    leontief::coefficients_by_output(&hh.w, &accounts.x, &accounts.sector_ids)
}

/// C[i,g] = H[i,g] / y0[g]. A group with zero income must have a zero
/// consumption column.
pub fn consumption_coefficients(hh: &HouseholdAccounts) -> Result<DMatrix<f64>> {
    let mut c = hh.h.clone();
    for g in 0..hh.r() {
        if hh.y0[g] == 0.0 {
            if c.column(g).iter().any(|&v| v != 0.0) {
                return Err(Error::ZeroIncome(hh.groups[g].group_id.clone()));
            }
        } else {
            for i in 0..c.nrows() {
                c[(i, g)] /= hh.y0[g];
            }
        }
    }
    Ok(c)
}

/// Assembles L = VB, M = VBC and K = (I-M)^-1. The income loop must be
/// productive: the spectral bound of M has to stay below one.
pub fn build_miyazawa(
    v: &DMatrix<f64>,
    c: &DMatrix<f64>,
    leontief: &LeontiefSystem,
) -> Result<MiyazawaSystem> {
    let n = leontief.b.nrows();
    let r = v.nrows();
    if v.ncols() != n || c.nrows() != n || c.ncols() != r {
        return Err(Error::Dimension(format!(
            "V is {}x{}, C is {}x{}, B is {n}x{n}",
            v.nrows(),
            v.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    for val in v.iter().chain(c.iter()) {
        if !val.is_finite() {
            return Err(Error::NonFinite("V or C contains NaN or Inf".into()));
        }
    }

    let l = v * &leontief.b;
    let m = &l * c;
    let m_spectral_bound = leontief::spectral_bound(&m);
    if m_spectral_bound >= 1.0 - 1e-9 {
        return Err(Error::NonProductive(format!(
            "income loop spectral bound {m_spectral_bound} >= 1"
        )));
    }
    let i_minus_m = DMatrix::identity(r, r) - &m;
    if !leontief::hawkins_simon(&i_minus_m) {
        return Err(Error::NonProductive("Hawkins-Simon fails for (I-M)".into()));
    }
    let k = i_minus_m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("(I-M) is not invertible".into()))?;
    let residual_norm = leontief::max_residual(&i_minus_m, &k);
    if residual_norm > 1e-9 {
        return Err(Error::Singular(format!(
            "(I-M) too ill-conditioned: inverse residual {residual_norm}"
        )));
    }
    for i in 0..r {
        for j in 0..r {
            let floor = if i == j { 1.0 - 1e-10 } else { -1e-10 };
            if k[(i, j)] < floor {
                return Err(Error::NonProductive("K - I has negative entries".into()));
            }
        }
    }

    Ok(MiyazawaSystem {
        v: v.clone(),
        c: c.clone(),
        l,
        m,
        k,
        diagnostics: MiyazawaDiagnostics {
            m_spectral_bound,
            residual_norm,
        },
    })
}

/// Income change per household group for a final-demand change df:
/// dy = K V B df (closed over induced consumption).
pub fn income_impact(sys: &MiyazawaSystem, df: &DVector<f64>) -> Result<DVector<f64>> {
    if df.len() != sys.l.ncols() {
        return Err(Error::Dimension(format!(
            "df has length {}, expected {}",
            df.len(),
            sys.l.ncols()
        )));
    }
    Ok(&sys.k * (&sys.l * df))
}

/// Open-model income change, dy = V B df, without the induced-consumption
/// closure. Exposed for decomposition reporting.
pub fn income_impact_open(sys: &MiyazawaSystem, df: &DVector<f64>) -> Result<DVector<f64>> {
    if df.len() != sys.l.ncols() {
        return Err(Error::Dimension(format!(
            "df has length {}, expected {}",
            df.len(),
            sys.l.ncols()
        )));
    }
    Ok(&sys.l * df)
}
