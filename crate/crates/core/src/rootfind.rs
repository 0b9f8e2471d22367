//! Closure of the boundary conditions at infinity.
//!
//! The far-field conditions are imposed on diagonal Padé approximants built
//! from the DTM series, giving a small nonlinear system in the unknown
//! initial derivatives that is solved by damped Newton iteration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dtm::{generate, Problem, ProblemParams, RecurrenceMode};
use crate::error::{Approximant, Error, Result, StopReason};
use crate::pade;
use crate::series::TruncatedSeries;

/// Maximum number of step shrinks per Newton iteration.
pub const MAX_STEP_SHRINKS: usize = 8;

/// Scaled Jacobian determinants below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

pub const DEFAULT_GUESS_FREE_CONVECTION: [f64; 2] = [0.6, -0.6];
pub const DEFAULT_GUESS_BLASIUS: [f64; 1] = [0.3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    /// Stop when the residual ∞-norm is at or below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Forward-difference step for the Jacobian.
    pub fd_step: f64,
    /// Step shrink factor applied when the residual norm does not decrease.
    pub damping: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            fd_step: 1e-7,
            damping: 0.5,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference step must be positive, got {}",
                self.fd_step
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureConfig {
    /// `n` of the diagonal `[n/n]` approximants.
    pub pade_degree: usize,
    /// Requested series order. Raised automatically when the closure needs
    /// more coefficients; see [`ClosureConfig::effective_order`].
    pub series_order: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub damping: f64,
}

impl ClosureConfig {
    /// Defaults for degree `n`, with the smallest series order the problem
    /// and mode accept.
    pub fn new(pade_degree: usize, problem: Problem, mode: RecurrenceMode) -> Self {
        let newton = NewtonSettings::default();
        let mut cfg = Self {
            pade_degree,
            series_order: 0,
            tol: newton.tol,
            max_iter: newton.max_iter,
            fd_step: newton.fd_step,
            damping: newton.damping,
        };
        cfg.series_order = cfg.minimum_order(problem, mode);
        cfg
    }

    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            damping: self.damping,
        }
    }

    /// Smallest order the closure can work with.
    ///
    /// * free convection, corrected: `2n + 1`, so that f′ is known through
    ///   degree `2n`.
    /// * free convection, paper fidelity: `2n`. The truncated f is treated as
    ///   an exact polynomial, so f′ of degree `2n − 1` is zero-extended,
    ///   exactly as a symbolic Padé routine handles polynomial input.
    /// * Blasius: `6n + 1`, for (f′)³ through η^{6n}.
    pub fn minimum_order(&self, problem: Problem, mode: RecurrenceMode) -> usize {
        let n = self.pade_degree;
        match (problem, mode) {
            (Problem::FreeConvection, RecurrenceMode::Corrected) => 2 * n + 1,
            (Problem::FreeConvection, RecurrenceMode::PaperFidelity) => 2 * n,
            (Problem::Blasius, _) => 6 * n + 1,
        }
        .max(3)
    }

    pub fn effective_order(&self, problem: Problem, mode: RecurrenceMode) -> usize {
        self.series_order.max(self.minimum_order(problem, mode))
    }

    pub fn validate(&self) -> Result<()> {
        if self.pade_degree == 0 {
            return Err(Error::InvalidParameter(
                "Padé degree must be at least 1".into(),
            ));
        }
        self.newton().validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Provenance {
    DtmPade {
        problem: Problem,
        pr: f64,
        mode: RecurrenceMode,
        closure: ClosureConfig,
        series_order: usize,
        guess: Vec<f64>,
    },
    Shooting {
        problem: Problem,
        pr: f64,
        shoot: crate::shooting::ShootConfig,
        guess: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// f″(0).
    pub a: f64,
    /// θ′(0); `None` for Blasius.
    pub b: Option<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
    pub settings: Provenance,
}

/// Converged Newton iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| {
        if x.is_nan() {
            f64::NAN
        } else {
            acc.max(x.abs())
        }
    })
}

/// Forward-difference Jacobian of `residual` at `x`, given `r = residual(x)`.
pub fn forward_jacobian<F>(
    residual: &mut F,
    x: &[f64],
    r: &[f64],
    step: f64,
) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let d = x.len();
    let mut jac = DMatrix::zeros(r.len(), d);
    let mut probe = x.to_vec();
    for j in 0..d {
        probe[j] = x[j] + step;
        // the step actually taken after rounding x + step
        let h = probe[j] - x[j];
        let rp = residual(&probe).map_err(|e| Error::JacobianProbe {
            coordinate: j,
            source: Box::new(e),
        })?;
        probe[j] = x[j];
        for i in 0..r.len() {
            jac[(i, j)] = (rp[i] - r[i]) / h;
        }
    }
    Ok(jac)
}

/// Damped Newton iteration with a forward-difference Jacobian.
///
/// Trial points whose residual cannot be evaluated count as non-decreasing
/// and trigger a step shrink.
pub fn newton_solve<F>(
    mut residual: F,
    x0: &[f64],
    settings: &NewtonSettings,
) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    settings.validate()?;
    if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial guess must be non-empty and finite, got {x0:?}"
        )));
    }
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    if r.len() != d {
        return Err(Error::InvalidParameter(format!(
            "residual has {} components for {} unknowns",
            r.len(),
            d
        )));
    }
    let mut norm = inf_norm(&r);

    for iter in 0..settings.max_iter {
        if norm <= settings.tol {
            return Ok(NewtonOutcome {
                x,
                residual: r,
                residual_norm: norm,
                iterations: iter,
            });
        }

        let jac = forward_jacobian(&mut residual, &x, &r, settings.fd_step)?;
        let mut scaled = jac.clone();
        for mut row in scaled.row_iter_mut() {
            let s = row.amax();
            if s > 0.0 {
                row /= s;
            }
        }
        let det = scaled.determinant();
        if det.is_nan() || det.abs() < SINGULAR_DET {
            return Err(Error::SingularJacobian { x, det });
        }
        let step = jac
            .lu()
            .solve(&DVector::from_iterator(d, r.iter().map(|v| -v)))
            .ok_or_else(|| Error::SingularJacobian { x: x.clone(), det })?;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_STEP_SHRINKS {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, si)| xi + lambda * si)
                .collect();
            if let Ok(rt) = residual(&trial) {
                let nt = inf_norm(&rt);
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            lambda *= settings.damping;
        }
        match accepted {
            Some((xn, rn, nn)) => {
                x = xn;
                r = rn;
                norm = nn;
            }
            None => {
                return Err(Error::NonConvergence {
                    x,
                    norm,
                    iterations: iter + 1,
                    reason: StopReason::Stagnation,
                })
            }
        }
    }

    if norm <= settings.tol {
        return Ok(NewtonOutcome {
            x,
            residual: r,
            residual_norm: norm,
            iterations: settings.max_iter,
        });
    }
    Err(Error::NonConvergence {
        x,
        norm,
        iterations: settings.max_iter,
        reason: StopReason::MaxIterations,
    })
}

fn diagonal_limit(series: &TruncatedSeries, n: usize, which: Approximant) -> Result<f64> {
    let wrap = |e| Error::Closure {
        which,
        source: Box::new(e),
    };
    pade::build(series, n, n)
        .and_then(|r| r.limit_at_infinity())
        .map_err(wrap)
}

/// `(lim f′, lim θ)` of the `[n/n]` approximants for free convection.
pub fn closure_residual(
    a: f64,
    b: f64,
    pr: f64,
    cfg: &ClosureConfig,
    mode: RecurrenceMode,
) -> Result<[f64; 2]> {
    let n = cfg.pade_degree;
    let order = cfg.effective_order(Problem::FreeConvection, mode);
    let sol = generate(&ProblemParams::free_convection(pr, a, b, order, mode))?;
    let fprime = sol.f_series.differentiate(1)?.zero_extended(2 * n);
    let theta = sol
        .theta_series
        .expect("free convection carries a theta series");
    let r1 = diagonal_limit(&fprime, n, Approximant::FPrime)?;
    let r2 = diagonal_limit(&theta, n, Approximant::Theta)?;
    Ok([r1, r2])
}

/// Blasius closure residual `lim (f′)³ − 1`.
///
/// The Blasius series is `f = η² Σ d_j η^{3j}`, so `f′ = η g(η³)` and any
/// diagonal approximant of f′ in η either diverges or tends to a constant
/// fixed by the symmetry alone. `(f′)³ = ξ g(ξ)³` with `ξ = η³` is a plain
/// power series in ξ, so the `[n/n]` approximant is taken there.
pub fn blasius_closure_residual(a: f64, cfg: &ClosureConfig) -> Result<f64> {
    let n = cfg.pade_degree;
    let order = cfg.effective_order(Problem::Blasius, RecurrenceMode::Corrected);
    let sol = generate(&ProblemParams::blasius(a, order))?;
    let fprime = sol.f_series.differentiate(1)?;
    let cubed = fprime.cauchy_product(&fprime).cauchy_product(&fprime);
    let in_xi = cubed.every_nth(3).truncated(2 * n);
    Ok(diagonal_limit(&in_xi, n, Approximant::FPrimeCubed)? - 1.0)
}

/// Solves the closure system for the unknown initial derivatives.
pub fn solve_problem(
    problem: Problem,
    pr: f64,
    mode: RecurrenceMode,
    cfg: &ClosureConfig,
    x0: &[f64],
) -> Result<SolveResult> {
    cfg.validate()?;
    if x0.len() != problem.unknowns() {
        return Err(Error::InvalidParameter(format!(
            "{:?} needs {} initial values, got {}",
            problem,
            problem.unknowns(),
            x0.len()
        )));
    }
    if !(pr.is_finite() && pr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Prandtl number must be finite and positive, got {pr}"
        )));
    }
    let newton = cfg.newton();
    let outcome = match problem {
        Problem::FreeConvection => newton_solve(
            |x: &[f64]| closure_residual(x[0], x[1], pr, cfg, mode).map(|r| r.to_vec()),
            x0,
            &newton,
        )?,
        Problem::Blasius => newton_solve(
            |x: &[f64]| blasius_closure_residual(x[0], cfg).map(|r| vec![r]),
            x0,
            &newton,
        )?,
    };

    let a = outcome.x[0];
    let b = outcome.x.get(1).copied();
    let mut warnings = Vec::new();
    if a <= 0.0 {
        warnings.push(format!("f''(0) = {a} is not positive"));
    }
    if let Some(b) = b {
        if b >= 0.0 {
            warnings.push(format!("theta'(0) = {b} is not negative"));
        }
    }
    Ok(SolveResult {
        a,
        b,
        residual_norm: outcome.residual_norm,
        iterations: outcome.iterations,
        warnings,
        settings: Provenance::DtmPade {
            problem,
            pr,
            mode,
            closure: *cfg,
            series_order: cfg.effective_order(problem, mode),
            guess: x0.to_vec(),
        },
    })
}

/// Default initial guess for each problem.
pub fn default_guess(problem: Problem) -> Vec<f64> {
    match problem {
        Problem::FreeConvection => DEFAULT_GUESS_FREE_CONVECTION.to_vec(),
        Problem::Blasius => DEFAULT_GUESS_BLASIUS.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_A: f64 = 0.5506447081;
    const PAPER_B: f64 = -0.8654409691;

    fn paper_cfg() -> ClosureConfig {
        ClosureConfig::new(3, Problem::FreeConvection, RecurrenceMode::PaperFidelity)
    }

    #[test]
    fn decoupled_scalar_roots() {
        let out = newton_solve(
            |x: &[f64]| Ok(vec![x[0] * x[0] - 2.0, x[1] - 1.0]),
            &[1.0, 1.0],
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-9);
        assert!((out.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_map_in_one_step() {
        let out = newton_solve(
            |x: &[f64]| Ok(vec![x[0]]),
            &[5.0],
            &NewtonSettings::default(),
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.x[0].abs() < 1e-10);
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let err = newton_solve(
            |x: &[f64]| Ok(vec![x[0] + x[1] - 1.0, 2.0 * x[0] + 2.0 * x[1] - 3.0]),
            &[0.0, 0.0],
            &NewtonSettings::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularJacobian { .. }));
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        // x² + 1 has no real root
        let err = newton_solve(
            |x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]),
            &[0.5],
            &NewtonSettings::default(),
        )
        .unwrap_err();
        match err {
            Error::NonConvergence { x, norm, .. } => {
                assert_eq!(x.len(), 1);
                assert!(norm >= 1.0);
            }
            Error::SingularJacobian { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn max_iter_is_enforced() {
        let settings = NewtonSettings {
            max_iter: 2,
            ..Default::default()
        };
        let err = newton_solve(
            |x: &[f64]| Ok(vec![x[0].powi(3) - 1000.0]),
            &[1.0],
            &settings,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonConvergence {
                reason: StopReason::MaxIterations,
                iterations: 2,
                ..
            }
        ));
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = NewtonSettings {
            damping: 0.0,
            ..Default::default()
        };
        assert!(newton_solve(|x: &[f64]| Ok(x.to_vec()), &[1.0], &bad).is_err());
        assert!(newton_solve(
            |x: &[f64]| Ok(x.to_vec()),
            &[f64::NAN],
            &NewtonSettings::default()
        )
        .is_err());
    }

    #[test]
    fn paper_root_zeroes_the_closure() {
        let r = closure_residual(
            PAPER_A,
            PAPER_B,
            1.0,
            &paper_cfg(),
            RecurrenceMode::PaperFidelity,
        )
        .unwrap();
        assert!(r[0].abs() < 1e-6 && r[1].abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn constant_theta_has_unit_limit() {
        for mode in [RecurrenceMode::PaperFidelity, RecurrenceMode::Corrected] {
            // f' = −η²/2 + ... has no finite limit here, so only the θ half is checked
            let sol = generate(&ProblemParams::free_convection(1.0, 0.0, 0.0, 7, mode)).unwrap();
            let theta = sol.theta_series.unwrap();
            assert_eq!(diagonal_limit(&theta, 3, Approximant::Theta).unwrap(), 1.0);
            let cfg = ClosureConfig::new(3, Problem::FreeConvection, mode);
            let err = closure_residual(0.0, 0.0, 1.0, &cfg, mode).unwrap_err();
            assert!(matches!(
                err,
                Error::Closure {
                    which: Approximant::FPrime,
                    ..
                }
            ));
        }
    }

    #[test]
    fn paper_solve_from_default_guess() {
        let res = solve_problem(
            Problem::FreeConvection,
            1.0,
            RecurrenceMode::PaperFidelity,
            &paper_cfg(),
            &DEFAULT_GUESS_FREE_CONVECTION,
        )
        .unwrap();
        assert!((res.a - PAPER_A).abs() < 1e-6);
        assert!((res.b.unwrap() - PAPER_B).abs() < 1e-6);
        assert!(res.residual_norm <= 1e-10);
        assert!(res.warnings.is_empty());
    }

    #[test]
    fn returned_root_re_verifies() {
        let mode = RecurrenceMode::Corrected;
        let cfg = ClosureConfig::new(3, Problem::FreeConvection, mode);
        let res = solve_problem(Problem::FreeConvection, 1.0, mode, &cfg, &[0.6, -0.6]).unwrap();
        let r = closure_residual(res.a, res.b.unwrap(), 1.0, &cfg, mode).unwrap();
        assert!(inf_norm(&r) <= cfg.tol);
    }

    #[test]
    fn paper_basin_converges_or_fails_loudly() {
        let mut roots = Vec::new();
        for a in [0.4, 0.6, 0.8] {
            for b in [-0.4, -0.6, -0.8] {
                match solve_problem(
                    Problem::FreeConvection,
                    1.0,
                    RecurrenceMode::PaperFidelity,
                    &paper_cfg(),
                    &[a, b],
                ) {
                    Ok(res) => roots.push((res.a, res.b.unwrap())),
                    Err(e) => assert!(matches!(
                        e,
                        Error::NonConvergence { .. } | Error::SingularJacobian { .. }
                    )),
                }
            }
        }
        assert!(!roots.is_empty());
        for (a, b) in &roots {
            assert!((a - PAPER_A).hypot(b - PAPER_B) < 1e-5, "({a}, {b})");
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let cfg = paper_cfg();
        let mode = RecurrenceMode::PaperFidelity;
        let mut f = |x: &[f64]| closure_residual(x[0], x[1], 1.0, &cfg, mode).map(|r| r.to_vec());
        let x = [0.57, -0.81];
        let r = f(&x).unwrap();
        let h = cfg.fd_step;
        let jac = forward_jacobian(&mut f, &x, &r, h).unwrap();
        let hc = 1e-5;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += hc;
            xm[j] -= hc;
            let (rp, rm) = (f(&xp).unwrap(), f(&xm).unwrap());
            for i in 0..2 {
                let central = (rp[i] - rm[i]) / (2.0 * hc);
                let scale = central.abs().max(1.0);
                assert!(
                    (jac[(i, j)] - central).abs() <= 10.0 * h * scale,
                    "J[{i},{j}] = {} vs {central}",
                    jac[(i, j)]
                );
            }
        }
    }

    #[test]
    fn orders_are_derived_from_degree() {
        let cfg = ClosureConfig::new(4, Problem::FreeConvection, RecurrenceMode::Corrected);
        assert_eq!(cfg.series_order, 9);
        let cfg = ClosureConfig {
            series_order: 3,
            ..cfg
        };
        assert_eq!(
            cfg.effective_order(Problem::FreeConvection, RecurrenceMode::Corrected),
            9
        );
        assert_eq!(
            cfg.effective_order(Problem::Blasius, RecurrenceMode::Corrected),
            25
        );
    }

    #[test]
    fn wrong_guess_dimension_is_rejected() {
        let cfg = paper_cfg();
        assert!(matches!(
            solve_problem(
                Problem::Blasius,
                1.0,
                RecurrenceMode::Corrected,
                &cfg,
                &[0.3, 0.1]
            ),
            Err(Error::InvalidParameter(_))
        ));
    }
}
