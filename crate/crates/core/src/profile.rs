//! Tabulated solution profiles `(η, f, f′, θ)`.

use serde::{Deserialize, Serialize};

use crate::dtm::DtmSolution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub eta: f64,
    pub f: f64,
    pub fprime: f64,
    /// Absent for Blasius.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Profile {
    pub rows: Vec<ProfileRow>,
}

/// `start, start + step, ...` up to `end`, inclusive. The final point is
/// snapped to `end` when it falls within half a step of it.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 || end < start {
        return Err(Error::InvalidParameter(format!(
            "grid {start}:{end}:{step} must satisfy start <= end and step > 0"
        )));
    }
    let intervals = ((end - start) / step + 0.5).floor() as usize;
    let mut grid: Vec<f64> = (0..=intervals).map(|i| start + i as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (end - *last).abs() <= 0.5 * step {
            *last = end;
        }
    }
    Ok(grid)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid is empty".into()));
    }
    if grid[0] < 0.0 || grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter(
            "grid points must be finite and non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evaluates the DTM partial sums of f, f′ and θ on a grid.
pub fn series_profile(solution: &DtmSolution, grid: &[f64]) -> Result<Profile> {
    check_grid(grid)?;
    let fprime = solution.f_series.differentiate(1)?;
    let rows = grid
        .iter()
        .map(|&eta| ProfileRow {
            eta,
            f: solution.f_series.evaluate(eta),
            fprime: fprime.evaluate(eta),
            theta: solution.theta_series.as_ref().map(|t| t.evaluate(eta)),
        })
        .collect();
    Ok(Profile { rows })
}
