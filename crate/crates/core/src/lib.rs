//! Deterministic input-output engine for carbon-tax incidence analysis.
//!
//! Builds Leontief and interrelational (Miyazawa-style) income multiplier
//! systems from an inter-industry table plus household satellite accounts,
//! propagates a carbon-tax cost shock to per-group income changes, and
//! reports distributional impacts: class tables, Lorenz curves, Gini
//! ratios, and a regressivity indicator.
//!
//! The pipeline is `accounts` -> `leontief` -> `miyazawa` -> `fiscal`,
//! with `inequality` and `report` consuming the results. Everything is
//! pure and immutable after construction; a built system is safe to share
//! across threads.

pub mod accounts;
pub mod error;
pub mod fiscal;
pub mod inequality;
pub mod leontief;
pub mod miyazawa;
pub mod report;

pub use error::{Error, Result};
