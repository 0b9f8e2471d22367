//! Padé rational approximants.
//!
//! `[L/M]` always means numerator degree `L` over denominator degree `M`,
//! with the denominator normalized to `b_0 = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{horner, TruncatedSeries};

/// Equilibrated 1-norm condition number above which the coefficient
/// system is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `|b_M|` below this fraction of `max |b_j|` means the denominator has
/// effectively lost a degree.
pub const LEADING_FLOOR: f64 = 1e-10;

const POLE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalApproximant {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl RationalApproximant {
    /// Builds `P/Q` from explicit coefficients. `denominator[0]` must be 1.
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self> {
        if numerator.is_empty() || denominator.is_empty() {
            return Err(Error::InvalidParameter(
                "numerator and denominator need at least one coefficient".into(),
            ));
        }
        if denominator[0] != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "denominator must be normalized to b0 = 1, got {}",
                denominator[0]
            )));
        }
        if numerator.iter().chain(&denominator).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "approximant coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// `(L, M)`.
    pub fn degrees(&self) -> (usize, usize) {
        (self.numerator.len() - 1, self.denominator.len() - 1)
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let den = horner(&self.denominator, x);
        if den.is_nan() || den.abs() <= POLE_FLOOR {
            return Err(Error::Pole { x });
        }
        Ok(horner(&self.numerator, x) / den)
    }

    /// Limit as `x → +∞` of a diagonal approximant: `a_L / b_M`.
    ///
    /// If `b_M` is below the floor the limit is only defined when the whole
    /// approximant has collapsed to a constant, in which case that constant
    /// is returned.
    pub fn limit_at_infinity(&self) -> Result<f64> {
        let (l, m) = self.degrees();
        if l != m {
            return Err(Error::UnsupportedDegree { l, m });
        }
        let scale = self
            .denominator
            .iter()
            .fold(0.0f64, |acc, b| acc.max(b.abs()));
        let leading = self.denominator[m];
        if leading.abs() > LEADING_FLOOR * scale {
            return Ok(self.numerator[l] / leading);
        }
        let num_scale = self
            .numerator
            .iter()
            .fold(0.0f64, |acc, a| acc.max(a.abs()));
        let is_constant = self.denominator[1..]
            .iter()
            .all(|b| b.abs() <= LEADING_FLOOR * scale)
            && self.numerator[1..]
                .iter()
                .all(|a| a.abs() <= LEADING_FLOOR * num_scale);
        if is_constant {
            Ok(self.numerator[0])
        } else {
            Err(Error::DegenerateLimit { leading })
        }
    }

    /// Taylor coefficients of `P/Q` about 0 through `order`, by series
    /// division.
    pub fn expand(&self, order: usize) -> TruncatedSeries {
        let mut out = vec![0.0; order + 1];
        for k in 0..=order {
            let mut acc = self.numerator.get(k).copied().unwrap_or(0.0);
            for j in 1..=k.min(self.denominator.len() - 1) {
                acc -= self.denominator[j] * out[k - j];
            }
            out[k] = acc;
        }
        TruncatedSeries::from_raw(out)
    }
}

/// Builds the `[l/m]` approximant matching `series` through degree `l + m`.
pub fn build(series: &TruncatedSeries, l: usize, m: usize) -> Result<RationalApproximant> {
    let c = series.coeffs();
    if series.order() < l + m {
        return Err(Error::InvalidParameter(format!(
            "[{l}/{m}] approximant needs a series of order {}, got {}",
            l + m,
            series.order()
        )));
    }
    // c_j for j < 0 is zero
    let coeff = |j: isize| if j < 0 { 0.0 } else { c[j as usize] };

    let mut denominator = vec![0.0; m + 1];
    denominator[0] = 1.0;

    let rhs = DVector::from_fn(m, |i, _| -c[l + i + 1]);
    // A polynomial of degree <= l is its own approximant.
    if rhs.iter().any(|&v| v != 0.0) {
        // Σ_{j=1..m} b_j c_{l+i−j} = −c_{l+i},  i = 1..m
        let system = DMatrix::from_fn(m, m, |i, j| coeff(l as isize + i as isize - j as isize));
        let cond = equilibrated_condition(&system);
        if cond.is_nan() || cond > CONDITION_LIMIT {
            return Err(Error::DegenerateApproximant {
                l,
                m,
                detail: format!("coefficient system condition number {cond:e}"),
            });
        }
        let b = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::DegenerateApproximant {
                l,
                m,
                detail: "singular coefficient system".into(),
            })?;
        denominator[1..].copy_from_slice(b.as_slice());
    }

    let numerator: Vec<f64> = (0..=l)
        .map(|i| (0..=i.min(m)).map(|j| denominator[j] * c[i - j]).sum())
        .collect();

    if numerator.iter().chain(&denominator).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateApproximant {
            l,
            m,
            detail: "non-finite coefficients".into(),
        });
    }
    Ok(RationalApproximant {
        numerator,
        denominator,
    })
}

/// 1-norm condition number after alternating row/column max-scaling.
/// Scaling removes the geometric decay of Taylor coefficients, which says
/// nothing about how well-posed the system is.
fn equilibrated_condition(system: &DMatrix<f64>) -> f64 {
    let mut a = system.clone();
    for _ in 0..3 {
        for mut row in a.row_iter_mut() {
            let s = row.amax();
            if s > 0.0 {
                row /= s;
            }
        }
        for mut col in a.column_iter_mut() {
            let s = col.amax();
            if s > 0.0 {
                col /= s;
            }
        }
    }
    match a.clone().try_inverse() {
        Some(inv) => norm1(&a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec()).unwrap()
    }

    #[test]
    fn geometric_series_is_recovered_exactly() {
        let r = build(&s(&[1.0, 1.0, 1.0, 1.0]), 1, 1).unwrap();
        assert_eq!(r.numerator(), &[1.0, 0.0]);
        assert_eq!(r.denominator(), &[1.0, -1.0]);
        assert_eq!(r.evaluate(0.5).unwrap(), 2.0);
        assert_eq!(r.limit_at_infinity().unwrap(), 0.0);
    }

    #[test]
    fn exponential_one_one() {
        let r = build(&s(&[1.0, 1.0, 0.5]), 1, 1).unwrap();
        assert!((r.numerator()[0] - 1.0).abs() < 1e-15);
        assert!((r.numerator()[1] - 0.5).abs() < 1e-15);
        assert!((r.denominator()[1] + 0.5).abs() < 1e-15);
        assert!((r.evaluate(1.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((r.limit_at_infinity().unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_denominator_degree_is_taylor_polynomial() {
        let c = s(&[0.3, -1.0, 2.0, 5.0]);
        let r = build(&c, 2, 0).unwrap();
        assert_eq!(r.numerator(), &[0.3, -1.0, 2.0]);
        assert_eq!(r.denominator(), &[1.0]);
    }

    #[test]
    fn evaluate_at_zero_is_a0() {
        let r = RationalApproximant::new(vec![0.7, 3.0], vec![1.0, 9.0]).unwrap();
        assert_eq!(r.evaluate(0.0).unwrap(), 0.7);
    }

    #[test]
    fn balanced_quadratic_limit() {
        // (3x² + 1)/(x² + 2) = (0.5 + 1.5x²)/(1 + 0.5x²)
        let r = RationalApproximant::new(vec![0.5, 0.0, 1.5], vec![1.0, 0.0, 0.5]).unwrap();
        assert_eq!(r.limit_at_infinity().unwrap(), 3.0);
    }

    #[test]
    fn pole_is_reported() {
        let r = RationalApproximant::new(vec![1.0, 0.0], vec![1.0, -1.0]).unwrap();
        assert!(matches!(r.evaluate(1.0), Err(Error::Pole { x }) if x == 1.0));
    }

    #[test]
    fn limit_rejects_off_diagonal_and_degenerate() {
        let r = RationalApproximant::new(vec![1.0], vec![1.0, -1.0]).unwrap();
        assert!(matches!(
            r.limit_at_infinity(),
            Err(Error::UnsupportedDegree { l: 0, m: 1 })
        ));
        let r = RationalApproximant::new(vec![1.0, 2.0], vec![1.0, 1e-14]).unwrap();
        assert!(matches!(
            r.limit_at_infinity(),
            Err(Error::DegenerateLimit { .. })
        ));
    }

    #[test]
    fn polynomial_input_gives_constant_limit() {
        let r = build(&s(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 3, 3).unwrap();
        assert_eq!(r.denominator(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.limit_at_infinity().unwrap(), 1.0);
    }

    #[test]
    fn singular_system_is_degenerate() {
        // θ = 1 + Bη: the [2/2] system [[c2, c1], [c3, c2]] = [[0, B], [0, 0]] is singular.
        let r = build(&s(&[1.0, -0.5, 0.0, 0.0, 0.3]), 2, 2);
        assert!(matches!(
            r,
            Err(Error::DegenerateApproximant { l: 2, m: 2, .. })
        ));
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(build(&s(&[1.0, 2.0, 3.0]), 2, 1).is_err());
    }
}
