//! Differential-transform recurrences.
//!
//! For the free-convection system
//!
//! ```text
//! f‴ + 3 f f″ − 2 (f′)² + θ = 0
//! θ″ + 3 Pr f θ′ = 0
//! f(0) = f′(0) = 0, θ(0) = 1, f″(0) = A, θ′(0) = B
//! ```
//!
//! the transformed coefficients `F(k)`, `Θ(k)` are the Taylor coefficients of
//! `f` and `θ` about η = 0. The Blasius extension solves `f‴ + ½ f f″ = 0`
//! with `f(0) = f′(0) = 0`, `f″(0) = A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Product rule used for the `f f″` term of the momentum recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceMode {
    /// `Σ (k−r+1)(k−r+2) F(r) F(k−r+2)`, the plain transform of `u·v″`.
    #[default]
    Corrected,
    /// Same sum with every summand divided by `r!`. Reproduces the
    /// published closed-form series and root values.
    PaperFidelity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    #[default]
    FreeConvection,
    Blasius,
}

impl Problem {
    /// Number of unknown initial derivatives.
    pub fn unknowns(self) -> usize {
        match self {
            Problem::FreeConvection => 2,
            Problem::Blasius => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub problem: Problem,
    /// Prandtl number; ignored by Blasius.
    pub pr: f64,
    /// f″(0).
    pub a: f64,
    /// θ′(0); ignored by Blasius.
    pub b: f64,
    /// Truncation order of the generated series.
    pub order: usize,
    pub mode: RecurrenceMode,
}

impl ProblemParams {
    pub fn free_convection(pr: f64, a: f64, b: f64, order: usize, mode: RecurrenceMode) -> Self {
        Self {
            problem: Problem::FreeConvection,
            pr,
            a,
            b,
            order,
            mode,
        }
    }

    pub fn blasius(a: f64, order: usize) -> Self {
        Self {
            problem: Problem::Blasius,
            pr: 1.0,
            a,
            b: 0.0,
            order,
            mode: RecurrenceMode::Corrected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 3 {
            return Err(Error::InvalidParameter(format!(
                "series order must be at least 3, got {}",
                self.order
            )));
        }
        if !(self.pr.is_finite() && self.pr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Prandtl number must be finite and positive, got {}",
                self.pr
            )));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "initial derivatives must be finite, got A = {}, B = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtmSolution {
    pub f_series: TruncatedSeries,
    /// `None` for Blasius.
    pub theta_series: Option<TruncatedSeries>,
    pub params: ProblemParams,
}

/// Known leading transforms: `(F(0), F(1), F(2))` and, for free convection,
/// `(Θ(0), Θ(1))`.
pub fn init_transforms(params: &ProblemParams) -> ([f64; 3], Option<[f64; 2]>) {
    let f = [0.0, 0.0, params.a / 2.0];
    match params.problem {
        Problem::FreeConvection => (f, Some([1.0, params.b])),
        Problem::Blasius => (f, None),
    }
}

/// One step of the free-convection recurrence. Needs `f[0..=k+2]` and
/// `theta[0..=k+1]`; returns `(F(k+3), Θ(k+2))`.
pub fn advance_free_convection(
    f: &[f64],
    theta: &[f64],
    k: usize,
    pr: f64,
    mode: RecurrenceMode,
) -> (f64, f64) {
    let kf = k as f64;

    let mut slope_sq = 0.0;
    let mut f_fpp = 0.0;
    let mut f_thetap = 0.0;
    let mut inv_fact = 1.0;
    for r in 0..=k {
        let rf = r as f64;
        if r > 0 {
            inv_fact /= rf;
        }
        slope_sq += (rf + 1.0) * (kf - rf + 1.0) * f[r + 1] * f[k - r + 1];
        let term = (kf - rf + 1.0) * (kf - rf + 2.0) * f[r] * f[k - r + 2];
        f_fpp += match mode {
            RecurrenceMode::Corrected => term,
            RecurrenceMode::PaperFidelity => term * inv_fact,
        };
        f_thetap += (kf - rf + 1.0) * f[r] * theta[k - r + 1];
    }

    let f_next = (2.0 * slope_sq - theta[k] - 3.0 * f_fpp) / ((kf + 1.0) * (kf + 2.0) * (kf + 3.0));
    let theta_next = -3.0 * pr * f_thetap / ((kf + 1.0) * (kf + 2.0));
    (f_next, theta_next)
}

/// One step of the Blasius recurrence `f‴ = −½ f f″`; needs `f[0..=k+2]`.
pub fn advance_blasius(f: &[f64], k: usize) -> f64 {
    let kf = k as f64;
    let f_fpp: f64 = (0..=k)
        .map(|r| {
            let rf = r as f64;
            (kf - rf + 1.0) * (kf - rf + 2.0) * f[r] * f[k - r + 2]
        })
        .sum();
    -0.5 * f_fpp / ((kf + 1.0) * (kf + 2.0) * (kf + 3.0))
}

/// Generates `F(0..=order)` (and `Θ(0..=order)`) for the given parameters.
pub fn generate(params: &ProblemParams) -> Result<DtmSolution> {
    params.validate()?;
    let m = params.order;
    let (f_init, theta_init) = init_transforms(params);

    let mut f = vec![0.0; m + 1];
    f[..3].copy_from_slice(&f_init);

    let theta = match theta_init {
        Some(theta_init) => {
            let mut theta = vec![0.0; m + 1];
            theta[..2].copy_from_slice(&theta_init);
            for k in 0..=m - 2 {
                let (f_next, theta_next) =
                    advance_free_convection(&f, &theta, k, params.pr, params.mode);
                check_finite("theta", k + 2, theta_next)?;
                theta[k + 2] = theta_next;
                if k + 3 <= m {
                    check_finite("f", k + 3, f_next)?;
                    f[k + 3] = f_next;
                }
            }
            Some(TruncatedSeries::from_raw(theta))
        }
        None => {
            for k in 0..=m - 3 {
                let f_next = advance_blasius(&f, k);
                check_finite("f", k + 3, f_next)?;
                f[k + 3] = f_next;
            }
            None
        }
    };

    Ok(DtmSolution {
        f_series: TruncatedSeries::from_raw(f),
        theta_series: theta,
        params: *params,
    })
}

fn check_finite(series: &'static str, index: usize, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteCoefficient { series, index })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fc(a: f64, b: f64, order: usize, mode: RecurrenceMode) -> DtmSolution {
        generate(&ProblemParams::free_convection(1.0, a, b, order, mode)).unwrap()
    }

    #[test]
    fn initial_transforms() {
        let p = ProblemParams::free_convection(1.0, 1.0, -0.5671, 6, RecurrenceMode::Corrected);
        let (f, t) = init_transforms(&p);
        assert_eq!(f, [0.0, 0.0, 0.5]);
        assert_eq!(t, Some([1.0, -0.5671]));
        let p0 = ProblemParams { a: 0.0, ..p };
        assert_eq!(init_transforms(&p0).0, [0.0, 0.0, 0.0]);
        assert_eq!(init_transforms(&ProblemParams::blasius(1.0, 6)).1, None);
    }

    #[test]
    fn leading_recurrence_steps() {
        let (a, b) = (0.7, -0.3);
        for mode in [RecurrenceMode::Corrected, RecurrenceMode::PaperFidelity] {
            let s = fc(a, b, 6, mode);
            let f = s.f_series.coeffs();
            assert!((f[3] + 1.0 / 6.0).abs() < 1e-16);
            assert!((f[4] + b / 24.0).abs() < 1e-16);
            let t = s.theta_series.unwrap();
            assert!((t.coeffs()[4] + a * b / 8.0).abs() < 1e-16);
        }
        let paper = fc(a, b, 6, RecurrenceMode::PaperFidelity);
        let corrected = fc(a, b, 6, RecurrenceMode::Corrected);
        assert!((paper.f_series.coeffs()[5] - a * a / 48.0).abs() < 1e-16);
        assert!((paper.f_series.coeffs()[6] + 7.0 * a / 720.0).abs() < 1e-16);
        assert!((corrected.f_series.coeffs()[5] - a * a / 120.0).abs() < 1e-16);
        assert!(corrected.f_series.coeffs()[6].abs() < 1e-16);
    }

    #[test]
    fn blasius_steps() {
        let a = 0.9;
        let s = generate(&ProblemParams::blasius(a, 8)).unwrap();
        let f = s.f_series.coeffs();
        assert_eq!(f[3], 0.0);
        assert!((f[5] + a * a / 240.0).abs() < 1e-16);
        let zero = generate(&ProblemParams::blasius(0.0, 10)).unwrap();
        assert!(zero.f_series.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn theta_stays_constant_when_a_and_b_vanish() {
        for mode in [RecurrenceMode::Corrected, RecurrenceMode::PaperFidelity] {
            let t = fc(0.0, 0.0, 15, mode).theta_series.unwrap();
            assert_eq!(t.coeffs()[0], 1.0);
            assert!(t.coeffs()[1..].iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn rejects_short_order_and_bad_prandtl() {
        let mut p = ProblemParams::free_convection(1.0, 0.5, -0.5, 2, RecurrenceMode::Corrected);
        assert!(matches!(generate(&p), Err(Error::InvalidParameter(_))));
        p.order = 6;
        p.pr = 0.0;
        assert!(generate(&p).is_err());
        p.pr = f64::NAN;
        assert!(generate(&p).is_err());
    }

    #[test]
    fn overflow_names_offending_index() {
        let p = ProblemParams::free_convection(1.0, 1e200, -1e200, 12, RecurrenceMode::Corrected);
        match generate(&p) {
            Err(Error::NonFiniteCoefficient { index, .. }) => assert!(index >= 4),
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn modes_agree_on_shared_terms(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let c = fc(a, b, 14, RecurrenceMode::Corrected);
            let p = fc(a, b, 14, RecurrenceMode::PaperFidelity);
            prop_assert_eq!(&c.f_series.coeffs()[..5], &p.f_series.coeffs()[..5]);
            // Θ(k+2) only sees F(0..=k), so the modes part ways at Θ(7) via F(5).
            prop_assert_eq!(
                &c.theta_series.as_ref().unwrap().coeffs()[..7],
                &p.theta_series.as_ref().unwrap().coeffs()[..7]
            );
        }

        #[test]
        fn theta_on_a_zero_slice(b in -1.0f64..1.0) {
            // Θ(k) is linear in B through k = 5; F(4) = −B/24 feeds a B² term into Θ(6).
            for mode in [RecurrenceMode::Corrected, RecurrenceMode::PaperFidelity] {
                let t = fc(0.0, b, 8, mode).theta_series.unwrap();
                let t = t.coeffs();
                prop_assert_eq!(&t[..5], &[1.0, b, 0.0, 0.0, 0.0][..]);
                prop_assert!((t[5] - b / 40.0).abs() <= 1e-16);
                prop_assert!((t[6] - b * b / 240.0).abs() <= 1e-16);
            }
        }
    }
}
