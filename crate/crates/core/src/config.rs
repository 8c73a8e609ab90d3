//! Numerical tolerances and enumeration caps shared by every analysis.

use crate::error::{Error, Result};

/// Tolerance for validating states, channels and measurements.
pub const TOL_VALIDATION: f64 = 1e-9;
/// Tolerance for comparing computed quantities against each other.
pub const TOL_COMPARE: f64 = 1e-12;
/// Trace-distance radius under which two enumerated states are merged.
pub const TOL_DEDUP: f64 = 1e-9;
/// Slack used when asserting certified upper bounds against measured values.
pub const TOL_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub validation: f64,
    pub compare: f64,
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            validation: TOL_VALIDATION,
            compare: TOL_COMPARE,
            dedup: TOL_DEDUP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Largest Hilbert-space dimension accepted by analyses.
    pub max_dim: usize,
    /// Largest enumeration depth.
    pub max_depth: usize,
    /// Largest action alphabet |A|·|C|.
    pub max_actions: usize,
    /// Largest number of locations for subset-quantified audits.
    pub max_locations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_dim: 64,
            max_depth: 8,
            max_actions: 12,
            max_locations: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub tol: Tolerances,
    pub limits: Limits,
}

impl Config {
    /// Caps suitable for the randomized harnesses, which compose systems
    /// and therefore exceed the default action-alphabet cap.
    pub fn relaxed() -> Self {
        Self {
            tol: Tolerances::default(),
            limits: Limits {
                max_dim: 64,
                max_depth: 8,
                max_actions: 64,
                max_locations: 8,
            },
        }
    }

    pub(crate) fn check_enumeration(&self, dim: usize, actions: usize, depth: usize) -> Result<()> {
        let l = &self.limits;
        if dim > l.max_dim {
            return Err(Error::Limit(format!("dimension {dim} exceeds cap {}", l.max_dim)));
        }
        if depth > l.max_depth {
            return Err(Error::Limit(format!("depth {depth} exceeds cap {}", l.max_depth)));
        }
        if actions > l.max_actions {
            return Err(Error::Limit(format!(
                "action alphabet |A|*|C| = {actions} exceeds cap {}",
                l.max_actions
            )));
        }
        Ok(())
    }
}
