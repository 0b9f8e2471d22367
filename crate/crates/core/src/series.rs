//! Truncated power series about η = 0.
//!
//! A [`TruncatedSeries`] of order `m` holds the coefficients `c_0..c_m` of
//! `Σ c_k x^k`. Binary operations on series of different orders truncate to
//! the shorter one; nothing beyond a series' order is ever assumed to be zero
//! unless [`TruncatedSeries::zero_extended`] is called explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Builds a series from its coefficients. Rejects an empty list and any
    /// non-finite coefficient.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "a series needs at least one coefficient".into(),
            ));
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoefficient { series: "c", index });
        }
        Ok(Self { coeffs })
    }

    pub(crate) fn from_raw(coeffs: Vec<f64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<f64> {
        self.coeffs.get(k).copied()
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Keeps coefficients `0..=order`. A no-op when `order` is not smaller.
    pub fn truncated(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Self::from_raw(self.coeffs[..keep].to_vec())
    }

    /// Treats the series as an exact polynomial and pads it with zeros up to
    /// `order`.
    pub fn zero_extended(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < order + 1 {
            coeffs.resize(order + 1, 0.0);
        }
        Self::from_raw(coeffs)
    }

    /// Coefficients `c_0, c_s, c_2s, ...`: re-expresses a series in `x^s`
    /// as a series in `ξ = x^s`.
    pub fn every_nth(&self, stride: usize) -> Self {
        assert!(stride > 0, "stride must be positive");
        Self::from_raw(self.coeffs.iter().step_by(stride).copied().collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_raw(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.coeffs.iter().map(|a| c * a).collect())
    }

    /// Truncated Cauchy product, `y_k = Σ_{r=0..k} s_r t_{k−r}`.
    pub fn cauchy_product(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|r| self.coeffs[r] * other.coeffs[k - r]).sum())
            .collect();
        Self::from_raw(coeffs)
    }

    /// `n`-th derivative: `y_k = (k+n)!/k! · c_{k+n}`.
    pub fn differentiate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(self.clone());
        }
        if self.order() < n {
            return Err(Error::SeriesTooShort {
                order: self.order(),
                times: n,
            });
        }
        let coeffs = (0..=self.order() - n)
            .map(|k| {
                let falling: f64 = ((k + 1)..=(k + n)).map(|j| j as f64).product();
                falling * self.coeffs[k + n]
            })
            .collect();
        Ok(Self::from_raw(coeffs))
    }

    /// Horner evaluation of the partial sum.
    pub fn evaluate(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec()).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(s(&[1.0, 2.0]).add(&s(&[3.0, 4.0])), s(&[4.0, 6.0]));
        assert_eq!(
            s(&[1.0, 1.0, 1.0]).add(&s(&[0.0, -1.0, 0.0])),
            s(&[1.0, 0.0, 1.0])
        );
        let x = s(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(x.add(&TruncatedSeries::zero(2)), s(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn scale_examples() {
        let x = s(&[1.0, -3.0, 0.25]);
        assert_eq!(x.scale(0.0), TruncatedSeries::zero(2));
        assert_eq!(x.scale(1.0), x);
        assert_eq!(s(&[1.0, 3.0]).scale(2.0), s(&[2.0, 6.0]));
    }

    #[test]
    fn cauchy_product_examples() {
        let p = s(&[1.0, 1.0]).cauchy_product(&s(&[1.0, 1.0]));
        assert_eq!(p, s(&[1.0, 2.0]));
        let geo = s(&[1.0, 1.0, 1.0, 1.0]);
        let one_minus_x = s(&[1.0, -1.0, 0.0, 0.0]);
        assert_eq!(geo.cauchy_product(&one_minus_x), s(&[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(
            s(&[1.0, 1.0, 1.0]).differentiate(1).unwrap(),
            s(&[1.0, 2.0])
        );
        assert_eq!(s(&[0.0, 0.0, 0.5]).differentiate(2).unwrap(), s(&[1.0]));
        assert!(matches!(
            s(&[1.0, 2.0]).differentiate(2),
            Err(Error::SeriesTooShort { order: 1, times: 2 })
        ));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(s(&[1.0, 2.0, 3.0]).evaluate(0.0), 1.0);
        assert_eq!(s(&[0.0, 1.0]).evaluate(5.0), 5.0);
        let e3 = s(&[1.0, 1.0, 0.5, 1.0 / 6.0]).evaluate(1.0);
        assert!((e3 - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(TruncatedSeries::new(vec![]).is_err());
        assert!(matches!(
            TruncatedSeries::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteCoefficient { index: 1, .. })
        ));
    }

    #[test]
    fn every_nth_picks_multiples() {
        let x = s(&[1.0, 9.0, 9.0, 2.0, 9.0, 9.0, 3.0]);
        assert_eq!(x.every_nth(3), s(&[1.0, 2.0, 3.0]));
    }

    fn series_strategy() -> impl Strategy<Value = TruncatedSeries> {
        prop::collection::vec(-1.0f64..1.0, 1..12).prop_map(TruncatedSeries::from_raw)
    }

    proptest! {
        #[test]
        fn length_follows_min_order(a in series_strategy(), b in series_strategy(), c in -2.0f64..2.0) {
            let m = a.order().min(b.order());
            prop_assert_eq!(a.add(&b).order(), m);
            prop_assert_eq!(a.cauchy_product(&b).order(), m);
            prop_assert_eq!(a.scale(c).order(), a.order());
        }

        #[test]
        fn product_commutes_and_distributes(
            a in series_strategy(), b in series_strategy(), c in series_strategy()
        ) {
            let ab = a.cauchy_product(&b);
            let ba = b.cauchy_product(&a);
            for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
            let lhs = a.cauchy_product(&b.add(&c));
            let rhs = a.cauchy_product(&b).add(&a.cauchy_product(&c));
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }

        #[test]
        fn derivative_matches_central_difference(
            c in prop::collection::vec(-1.0f64..1.0, 2..10), x in 0.05f64..0.95
        ) {
            let a = TruncatedSeries::from_raw(c);
            let h = 1e-4;
            let fd = (a.evaluate(x + h) - a.evaluate(x - h)) / (2.0 * h);
            let exact = a.differentiate(1).unwrap().evaluate(x);
            // third derivative of a degree-9 polynomial with |c| <= 1 is bounded well below 1e3
            prop_assert!((fd - exact).abs() <= 1e3 * h * h);
        }

        #[test]
        fn repeated_differentiation_composes(a in prop::collection::vec(-1.0f64..1.0, 3..10)) {
            let a = TruncatedSeries::from_raw(a);
            let twice = a.differentiate(1).unwrap().differentiate(1).unwrap();
            let direct = a.differentiate(2).unwrap();
            prop_assert_eq!(twice.order(), direct.order());
            for (x, y) in twice.coeffs().iter().zip(direct.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0));
            }
        }
    }
}
