//! Grouped-data Lorenz curves, trapezoidal Gini ratios, and a Kendall-tau
//! regressivity indicator over the 10 income classes.
//!
//! The grouped (trapezoidal) estimator lower-bounds a micro-data Gini:
//! within-group inequality is invisible at decile resolution.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Urban,
    Rural,
    All,
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::Urban => write!(f, "urban"),
            Scope::Rural => write!(f, "rural"),
            Scope::All => write!(f, "all"),
        }
    }
}

/// An income distribution over population groups: each point is
/// (population share, total group income in million Rp).
#[derive(Debug, Clone)]
pub struct GroupedDistribution {
    pub points: Vec<(f64, f64)>,
    pub region_scope: Scope,
}

impl GroupedDistribution {
    pub fn new(points: Vec<(f64, f64)>, region_scope: Scope) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Dimension("distribution needs at least one group".into()));
        }
        let share_sum: f64 = points.iter().map(|(s, _)| s).sum();
        if (share_sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "population shares sum to {share_sum}, expected 1"
            )));
        }
        for &(share, income) in &points {
            if share <= 0.0 || !share.is_finite() {
                return Err(Error::Config(format!("population share {share} must be > 0")));
            }
            if income < 0.0 || !income.is_finite() {
                return Err(Error::Config(format!("income {income} must be >= 0")));
            }
        }
        Ok(Self { points, region_scope })
    }

    /// Equal-population deciles within one region.
    pub fn from_decile_incomes(incomes: &DVector<f64>, scope: Scope) -> Result<Self> {
        let share = 1.0 / incomes.len() as f64;
        Self::new(incomes.iter().map(|&y| (share, y)).collect(), scope)
    }
}

/// Combines two regional distributions into one, weighting population
/// shares by the regions' population weights. Incomes are totals and carry
/// over unchanged.
pub fn merge(
    urban: &GroupedDistribution,
    rural: &GroupedDistribution,
    weight_urban: f64,
    weight_rural: f64,
) -> Result<GroupedDistribution> {
    if (weight_urban + weight_rural - 1.0).abs() > 1e-12 || weight_urban <= 0.0 || weight_rural <= 0.0 {
        return Err(Error::Config(format!(
            "population weights must be positive and sum to 1, got {weight_urban} + {weight_rural}"
        )));
    }
    let mut points = Vec::with_capacity(urban.points.len() + rural.points.len());
    points.extend(urban.points.iter().map(|&(s, y)| (s * weight_urban, y)));
    points.extend(rural.points.iter().map(|&(s, y)| (s * weight_rural, y)));
    GroupedDistribution::new(points, Scope::All)
}

/// Piecewise-linear Lorenz curve. First knot (0,0), last knot (1,1).
#[derive(Debug, Clone, Serialize)]
pub struct LorenzCurve {
    pub knots: Vec<(f64, f64)>,
}

/// Sorts groups by per-capita income and accumulates normalized population
/// and income shares into Lorenz knots.
pub fn lorenz(dist: &GroupedDistribution) -> Result<LorenzCurve> {
    let total_pop: f64 = dist.points.iter().map(|(s, _)| s).sum();
    let total_income: f64 = dist.points.iter().map(|(_, y)| y).sum();
    if total_income <= 0.0 {
        return Err(Error::ZeroTotalIncome);
    }

    let mut ordered = dist.points.clone();
    ordered.sort_by(|a, b| {
        let pa = a.1 / a.0;
        let pb = b.1 / b.0;
        pa.partial_cmp(&pb).expect("finite per-capita incomes")
    });

    let m = ordered.len();
    let mut knots = Vec::with_capacity(m + 1);
    knots.push((0.0, 0.0));
    let mut cum_pop = 0.0;
    let mut cum_income = 0.0;
    for (i, (share, income)) in ordered.iter().enumerate() {
        cum_pop += share;
        cum_income += income;
        if i + 1 == m {
            knots.push((1.0, 1.0));
        } else {
            knots.push((cum_pop / total_pop, cum_income / total_income));
        }
    }

    let curve = LorenzCurve { knots };
    assert_curve_invariants(&curve);
    Ok(curve)
}

// Convexity or endpoint violations here are construction bugs, not input
// errors, hence assertions.
fn assert_curve_invariants(curve: &LorenzCurve) {
    let knots = &curve.knots;
    assert_eq!(knots.first(), Some(&(0.0, 0.0)));
    assert_eq!(knots.last(), Some(&(1.0, 1.0)));
    let mut prev_slope = -1e-12;
    for w in knots.windows(2) {
        let (p0, l0) = w[0];
        let (p1, l1) = w[1];
        assert!(p1 > p0, "population knots must strictly increase");
        assert!(l1 >= l0 - 1e-12, "income shares must be nondecreasing");
        assert!(l1 <= p1 + 1e-9, "Lorenz curve must stay below the diagonal");
        let slope = (l1 - l0) / (p1 - p0);
        assert!(slope >= prev_slope - 1e-9, "Lorenz curve must be convex");
        prev_slope = slope;
    }
}

/// Trapezoidal Gini: G = 1 - sum_i (p_i - p_{i-1}) (L_i + L_{i-1}).
pub fn gini(curve: &LorenzCurve) -> f64 {
    let mut area2 = 0.0;
    for w in curve.knots.windows(2) {
        let (p0, l0) = w[0];
        let (p1, l1) = w[1];
        area2 += (p1 - p0) * (l1 + l0);
    }
    1.0 - area2
}

#[derive(Debug, Clone, Serialize)]
pub struct GiniDelta {
    pub g_before: f64,
    pub g_after: f64,
    pub delta: f64,
}

/// Ginis before and after a shock over the same groups. Reported at full
/// precision: the deltas of interest are of order 1e-8.
pub fn gini_delta(before: &GroupedDistribution, after: &GroupedDistribution) -> Result<GiniDelta> {
    if before.points.len() != after.points.len() {
        return Err(Error::GroupMismatch(format!(
            "{} groups before vs {} after",
            before.points.len(),
            after.points.len()
        )));
    }
    for (i, (b, a)) in before.points.iter().zip(after.points.iter()).enumerate() {
        if (b.0 - a.0).abs() > 1e-12 {
            return Err(Error::GroupMismatch(format!(
                "population share of group {i} changed: {} vs {}",
                b.0, a.0
            )));
        }
    }
    let g_before = gini(&lorenz(before)?);
    let g_after = gini(&lorenz(after)?);
    Ok(GiniDelta {
        g_before,
        g_after,
        delta: g_after - g_before,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Regressive,
    Proportional,
    Progressive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Regressivity {
    pub kendall_tau: f64,
    pub verdict: Verdict,
}

/// Kendall rank correlation between class index (1..10, ascending income)
/// and relative burden. Ties contribute zero; the denominator is the full
/// pair count, so an all-tied burden vector gives tau = 0.
pub fn regressivity(pct_dy: &[f64]) -> Regressivity {
    let n = pct_dy.len();
    let mut signed = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            signed += match pct_dy[j].partial_cmp(&pct_dy[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let kendall_tau = if pairs > 0.0 { signed as f64 / pairs } else { 0.0 };
    let verdict = if kendall_tau <= -0.5 {
        Verdict::Regressive
    } else if kendall_tau >= 0.5 {
        Verdict::Progressive
    } else {
        Verdict::Proportional
    };
    Regressivity { kendall_tau, verdict }
}
