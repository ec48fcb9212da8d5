//! Technical coefficients, the Leontief quantity inverse B = (I-A)^-1, and
//! the price dual (I-A')^-1 mapping unit-cost shocks to sector price changes.
//!
//! Productivity (Hawkins-Simon) is a hard error: nothing downstream means
//! anything without it. IO tables are small, so everything is dense and the
//! factorization order is fixed for determinism.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::accounts::SectorAccounts;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Power-iteration estimate of the spectral radius of A.
    pub spectral_radius_bound: f64,
    pub hawkins_simon_ok: bool,
    /// max-norm of (I-A)B - I.
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LeontiefSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub diagnostics: Diagnostics,
}

/// A[i,j] = Z[i,j] / x[j]. A sector with zero output must have a zero Z
/// column; its coefficient column is zero and a warning is logged.
pub fn technical_coefficients(accounts: &SectorAccounts) -> Result<DMatrix<f64>> {
    coefficients_by_output(&accounts.z, &accounts.x, &accounts.sector_ids)
}

/// Column-wise division by total output with the degenerate-sector
/// convention shared by A and the household income coefficients V.
pub(crate) fn coefficients_by_output(
    numerator: &DMatrix<f64>,
    x: &DVector<f64>,
    sector_ids: &[String],
) -> Result<DMatrix<f64>> {
    if numerator.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "{} columns against {} outputs",
            numerator.ncols(),
            x.len()
        )));
    }
    let mut out = numerator.clone();
    for j in 0..x.len() {
        if x[j] == 0.0 {
            if numerator.column(j).iter().any(|&v| v != 0.0) {
                return Err(Error::DegenerateSector(sector_ids[j].clone()));
            }
            log::warn!("sector '{}' has zero output; coefficient column set to zero", sector_ids[j]);
        } else {
            for i in 0..out.nrows() {
                out[(i, j)] /= x[j];
            }
        }
    }
    Ok(out)
}

/// Power-iteration upper estimate of the spectral radius of a nonnegative
/// matrix. 100 iterations with a fixed uniform start keep it deterministic.
pub(crate) fn spectral_bound(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    let mut lambda = 0.0;
    for _ in 0..100 {
        let w = m * &v;
        let norm = w.amax();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w / norm;
    }
    lambda
}

/// Hawkins-Simon check: Gaussian elimination without pivoting on (I-A);
/// the pivots are ratios of successive leading principal minors, so the
/// condition holds iff every pivot stays positive.
pub(crate) fn hawkins_simon(i_minus_a: &DMatrix<f64>) -> bool {
    let n = i_minus_a.nrows();
    let mut m = i_minus_a.clone();
    for k in 0..n {
        let pivot = m[(k, k)];
        if pivot <= 0.0 || !pivot.is_finite() {
            return false;
        }
        for i in (k + 1)..n {
            let factor = m[(i, k)] / pivot;
            for j in k..n {
                m[(i, j)] -= factor * m[(k, j)];
            }
        }
    }
    true
}

pub(crate) fn max_residual(i_minus_m: &DMatrix<f64>, inverse: &DMatrix<f64>) -> f64 {
    let n = i_minus_m.nrows();
    let mut residual = i_minus_m * inverse;
    for i in 0..n {
        residual[(i, i)] -= 1.0;
    }
    residual.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Inverts (I-A) by dense LU after verifying productivity.
pub fn leontief_inverse(a: &DMatrix<f64>) -> Result<LeontiefSystem> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("A is {}x{}", n, a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("technical coefficients contain NaN or Inf".into()));
    }
    if a.iter().any(|&v| v < 0.0) {
        return Err(Error::Schema {
            path: "<memory>".into(),
            message: "negative technical coefficient".into(),
        });
    }

    let spectral_radius_bound = spectral_bound(a);
    let i_minus_a = DMatrix::identity(n, n) - a;
    let hawkins_simon_ok = hawkins_simon(&i_minus_a);
    if !hawkins_simon_ok || spectral_radius_bound >= 1.0 {
        return Err(Error::NonProductive(format!(
            "Hawkins-Simon {}, spectral radius bound {spectral_radius_bound}",
            if hawkins_simon_ok { "holds" } else { "fails" }
        )));
    }

    let b = i_minus_a
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("(I-A) is not invertible".into()))?;
    let residual_norm = max_residual(&i_minus_a, &b);
    if residual_norm > 1e-9 {
        return Err(Error::Singular(format!(
            "(I-A) too ill-conditioned: inverse residual {residual_norm}"
        )));
    }
    if b.iter().any(|&v| v < -1e-10) {
        return Err(Error::NonProductive("Leontief inverse has negative entries".into()));
    }
    if (0..n).any(|i| b[(i, i)] < 1.0 - 1e-10) {
        return Err(Error::NonProductive("Leontief inverse diagonal below one".into()));
    }

    Ok(LeontiefSystem {
        a: a.clone(),
        b,
        diagnostics: Diagnostics {
            spectral_radius_bound,
            hawkins_simon_ok,
            residual_norm,
        },
    })
}

/// Leontief price model under full forward shifting: solves
/// (I-A') dp = dv for the sector price changes dp.
pub fn price_model(a: &DMatrix<f64>, dv: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    if dv.len() != n {
        return Err(Error::Dimension(format!("dv has length {}, expected {n}", dv.len())));
    }
    let i_minus_a = DMatrix::identity(n, n) - a;
    if !hawkins_simon(&i_minus_a) {
        return Err(Error::NonProductive("Hawkins-Simon fails in price model".into()));
    }
    i_minus_a
        .transpose()
        .lu()
        .solve(dv)
        .ok_or_else(|| Error::Singular("(I-A') solve failed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    fn fixture_a() -> DMatrix<f64> {
        dmatrix![0.2, 0.3; 0.4, 0.1]
    }

    #[test]
    fn coefficients_from_fixture() {
        let acc = SectorAccounts::new(
            vec!["s1".into(), "s2".into()],
            dmatrix![20.0, 30.0; 40.0, 10.0],
            dvector![50.0, 50.0],
            dvector![100.0, 100.0],
            dvector![40.0, 60.0],
        )
        .unwrap();
        let a = technical_coefficients(&acc).unwrap();
        assert_eq!(a, fixture_a());
    }

    #[test]
    fn zero_flow_single_sector() {
        let acc = SectorAccounts::new(
            vec!["s1".into()],
            dmatrix![0.0],
            dvector![5.0],
            dvector![5.0],
            dvector![5.0],
        )
        .unwrap();
        assert_eq!(technical_coefficients(&acc).unwrap(), dmatrix![0.0]);
    }

    #[test]
    fn degenerate_sector_convention() {
        // zero output with a zero Z column: column of A is zero
        let z = dmatrix![0.0, 30.0; 0.0, 10.0];
        let x = dvector![0.0, 100.0];
        let a = coefficients_by_output(&z, &x, &["s1".into(), "s2".into()]).unwrap();
        assert_eq!(a.column(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert_eq!(a[(0, 1)], 0.3);

        // zero output with a nonzero Z column is an error
        let z_bad = dmatrix![0.0, 30.0; 5.0, 10.0];
        assert!(matches!(
            coefficients_by_output(&z_bad, &x, &["s1".into(), "s2".into()]),
            Err(Error::DegenerateSector(id)) if id == "s1"
        ));
    }

    #[test]
    fn identity_for_zero_a() {
        let sys = leontief_inverse(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(sys.b, DMatrix::identity(3, 3));
    }

    #[test]
    fn scalar_geometric_series() {
        let sys = leontief_inverse(&dmatrix![0.5]).unwrap();
        assert_abs_diff_eq!(sys.b[(0, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn two_sector_inverse_matches_adjugate_oracle() {
        // det(I-A) = 0.8*0.9 - 0.3*0.4 = 0.6; adjugate/det gives B exactly
        let sys = leontief_inverse(&fixture_a()).unwrap();
        let expected = dmatrix![1.5, 0.5; 2.0 / 3.0, 4.0 / 3.0];
        for (got, want) in sys.b.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-6);
        }
        assert!(sys.diagnostics.hawkins_simon_ok);
        assert!(sys.diagnostics.residual_norm <= 1e-9);
        // cross-check with a truncated Neumann series
        let mut neumann = DMatrix::identity(2, 2);
        let mut power = DMatrix::identity(2, 2);
        for _ in 0..60 {
            power = &power * &fixture_a();
            neumann += &power;
        }
        assert!((&sys.b - neumann).amax() <= 1e-8);
    }

    #[test]
    fn nonproductive_rejected() {
        let a = dmatrix![0.9, 0.8; 0.8, 0.9];
        assert!(matches!(leontief_inverse(&a), Err(Error::NonProductive(_))));
    }

    #[test]
    fn price_model_zero_and_single_sector() {
        let a = fixture_a();
        let dp = price_model(&a, &dvector![0.0, 0.0]).unwrap();
        assert_eq!(dp, dvector![0.0, 0.0]);

        let dp = price_model(&dmatrix![0.0], &dvector![0.003]).unwrap();
        assert_abs_diff_eq!(dp[0], 0.003, epsilon = 1e-15);
    }

    #[test]
    fn price_model_matches_transposed_inverse_oracle() {
        let a = fixture_a();
        let dv = dvector![0.001, 0.002];
        let dp = price_model(&a, &dv).unwrap();
        // dp = B' dv with the adjugate B oracle
        assert_abs_diff_eq!(dp[0], 0.001 * 1.5 + 0.002 * (2.0 / 3.0), epsilon = 1e-6);
        assert_abs_diff_eq!(dp[1], 0.001 * 0.5 + 0.002 * (4.0 / 3.0), epsilon = 1e-6);
        // verify (I-A') dp = dv
        let back = (DMatrix::identity(2, 2) - a.transpose()) * &dp;
        assert_abs_diff_eq!(back[0], dv[0], epsilon = 1e-12);
        assert_abs_diff_eq!(back[1], dv[1], epsilon = 1e-12);
    }

    #[test]
    fn permutation_equivariance() {
        let a = dmatrix![0.1, 0.2, 0.05; 0.3, 0.1, 0.1; 0.0, 0.25, 0.2];
        let p = dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 1.0; 1.0, 0.0, 0.0];
        let b = leontief_inverse(&a).unwrap().b;
        let b_perm = leontief_inverse(&(&p * &a * p.transpose())).unwrap().b;
        assert!((&b_perm - &p * b * p.transpose()).amax() <= 1e-12);
    }
}
