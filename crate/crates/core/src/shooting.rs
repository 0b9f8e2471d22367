//! Shooting oracle: classical RK4 on the similarity equations with Newton
//! on the far-boundary mismatch.

use serde::{Deserialize, Serialize};

use crate::dtm::Problem;
use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileRow};
use crate::rootfind::{newton_solve, NewtonSettings, Provenance, SolveResult};

/// Smallest admissible truncation point for the far boundary.
pub const MIN_ETA_MAX: f64 = 5.0;

/// First truncation point of the continuation in `eta_max`.
const CONTINUATION_START: f64 = 6.0;
const CONTINUATION_STRIDE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootConfig {
    /// Truncation point standing in for η = ∞.
    pub eta_max: f64,
    /// RK4 step; the last step is shortened to land on `eta_max`.
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            eta_max: 8.0,
            step: 0.01,
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

impl ShootConfig {
    fn check_domain(&self) -> Result<()> {
        if !(self.eta_max > 0.0 && self.eta_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta_max must be positive, got {}",
                self.eta_max
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        Ok(())
    }

    /// Full check for oracle runs; the far field needs `eta_max ≥ 5`.
    pub fn validate(&self) -> Result<()> {
        self.check_domain()?;
        if self.eta_max < MIN_ETA_MAX {
            return Err(Error::InvalidParameter(format!(
                "eta_max must be at least {MIN_ETA_MAX}, got {}",
                self.eta_max
            )));
        }
        self.newton().validate()
    }

    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            ..NewtonSettings::default()
        }
    }
}

/// One classical RK4 step of `y′ = rhs(t, y)`.
pub fn rk4_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let shifted = |base: &[f64; N], k: &[f64; N], c: f64| {
        let mut out = *base;
        for i in 0..N {
            out[i] += c * k[i];
        }
        out
    };
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &shifted(y, &k1, 0.5 * h));
    let k3 = rhs(t + 0.5 * h, &shifted(y, &k2, 0.5 * h));
    let k4 = rhs(t + h, &shifted(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates from `t0` to `t1` with steps no longer than `step`, calling
/// `visit` after every step. Fails on the first non-finite state.
pub fn rk4_integrate_system<const N: usize, F, V>(
    rhs: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    step: f64,
    mut visit: V,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    V: FnMut(f64, &[f64; N]),
{
    let span = t1 - t0;
    // a trailing sliver below 1e-9 of a step is absorbed into the previous step
    let full = (span / step - 1e-9).floor().max(0.0) as usize;
    let mut t = t0;
    let mut y = y0;
    for i in 0..=full {
        let next = if i == full {
            t1
        } else {
            t0 + (i + 1) as f64 * step
        };
        let h = next - t;
        if h <= 0.0 {
            break;
        }
        y = rk4_step(rhs, t, &y, h);
        t = next;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { eta: t });
        }
        visit(t, &y);
    }
    Ok(y)
}

/// State `(f, f′, f″, θ, θ′)`; Blasius leaves the θ slots at `(1, 0)`.
pub type State = [f64; 5];

pub fn initial_state(problem: Problem, a: f64, b: f64) -> State {
    match problem {
        Problem::FreeConvection => [0.0, 0.0, a, 1.0, b],
        Problem::Blasius => [0.0, 0.0, a, 1.0, 0.0],
    }
}

pub fn rhs(problem: Problem, pr: f64) -> impl Fn(f64, &State) -> State {
    move |_eta, y| {
        let [f, fp, fpp, theta, thetap] = *y;
        match problem {
            Problem::FreeConvection => [
                fp,
                fpp,
                2.0 * fp * fp - theta - 3.0 * f * fpp,
                thetap,
                -3.0 * pr * f * thetap,
            ],
            Problem::Blasius => [fp, fpp, -0.5 * f * fpp, 0.0, 0.0],
        }
    }
}

/// Full trajectory on `[0, eta_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub eta: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn to_profile(&self, problem: Problem) -> Profile {
        Profile {
            rows: self
                .eta
                .iter()
                .zip(&self.states)
                .map(|(&eta, y)| row(problem, eta, y))
                .collect(),
        }
    }
}

fn row(problem: Problem, eta: f64, y: &State) -> ProfileRow {
    ProfileRow {
        eta,
        f: y[0],
        fprime: y[1],
        theta: (problem == Problem::FreeConvection).then_some(y[3]),
    }
}

pub fn rk4_integrate(
    problem: Problem,
    a: f64,
    b: f64,
    pr: f64,
    cfg: &ShootConfig,
) -> Result<Trajectory> {
    cfg.check_domain()?;
    let y0 = initial_state(problem, a, b);
    let mut eta = vec![0.0];
    let mut states = vec![y0];
    rk4_integrate_system(&rhs(problem, pr), 0.0, y0, cfg.eta_max, cfg.step, |t, y| {
        eta.push(t);
        states.push(*y);
    })?;
    Ok(Trajectory { eta, states })
}

/// Far-boundary mismatch: `(f′, θ)` at `eta_max` for free convection,
/// `f′ − 1` for Blasius.
pub fn boundary_residual(
    problem: Problem,
    a: f64,
    b: f64,
    pr: f64,
    cfg: &ShootConfig,
) -> Result<Vec<f64>> {
    cfg.check_domain()?;
    let y = rk4_integrate_system(
        &rhs(problem, pr),
        0.0,
        initial_state(problem, a, b),
        cfg.eta_max,
        cfg.step,
        |_, _| {},
    )?;
    Ok(match problem {
        Problem::FreeConvection => vec![y[1], y[3]],
        Problem::Blasius => vec![y[1] - 1.0],
    })
}

/// Truncation points visited on the way out to `eta_max`.
fn continuation_stages(eta_max: f64) -> Vec<f64> {
    let mut stages = Vec::new();
    let mut eta = CONTINUATION_START;
    while eta < eta_max - 1e-12 {
        stages.push(eta);
        eta += CONTINUATION_STRIDE;
    }
    stages.push(eta_max);
    stages
}

/// Newton on the boundary mismatch.
///
/// The truncation point is moved outwards in stages from η = 6, each solve
/// warm-started from the previous root. Starting far out with a crude guess
/// lets Newton land on spurious roots whose f′ changes sign before `eta_max`.
pub fn shoot_solve(
    problem: Problem,
    pr: f64,
    cfg: &ShootConfig,
    x0: &[f64],
) -> Result<SolveResult> {
    cfg.validate()?;
    if !(pr.is_finite() && pr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Prandtl number must be finite and positive, got {pr}"
        )));
    }
    if x0.len() != problem.unknowns() {
        return Err(Error::InvalidParameter(format!(
            "{:?} needs {} initial values, got {}",
            problem,
            problem.unknowns(),
            x0.len()
        )));
    }
    let newton = cfg.newton();
    let mut x = x0.to_vec();
    let mut outcome = None;
    for eta_max in continuation_stages(cfg.eta_max) {
        let stage = ShootConfig { eta_max, ..*cfg };
        let out = newton_solve(
            |x: &[f64]| {
                let b = x.get(1).copied().unwrap_or(0.0);
                boundary_residual(problem, x[0], b, pr, &stage)
            },
            &x,
            &newton,
        )?;
        x = out.x.clone();
        outcome = Some(out);
    }
    let outcome = outcome.expect("at least one continuation stage");

    Ok(SolveResult {
        a: outcome.x[0],
        b: outcome.x.get(1).copied(),
        residual_norm: outcome.residual_norm,
        iterations: outcome.iterations,
        warnings: Vec::new(),
        settings: Provenance::Shooting {
            problem,
            pr,
            shoot: *cfg,
            guess: x0.to_vec(),
        },
    })
}

/// Profile at exactly the grid points. Each gap between grid points is
/// split into equal RK4 steps no longer than `cfg.step`.
pub fn tabulate_profile(
    problem: Problem,
    a: f64,
    b: f64,
    pr: f64,
    grid: &[f64],
    cfg: &ShootConfig,
) -> Result<Profile> {
    cfg.check_domain()?;
    crate::profile::check_grid(grid)?;
    if let Some(&beyond) = grid.iter().find(|&&g| g > cfg.eta_max) {
        return Err(Error::InvalidParameter(format!(
            "grid point {beyond} lies beyond eta_max = {}",
            cfg.eta_max
        )));
    }
    let f = rhs(problem, pr);
    let mut y = initial_state(problem, a, b);
    let mut t = 0.0;
    let mut rows = Vec::with_capacity(grid.len());
    for &g in grid {
        let gap = g - t;
        if gap > 0.0 {
            let steps = (gap / cfg.step - 1e-9).ceil().max(1.0) as usize;
            let h = gap / steps as f64;
            for i in 0..steps {
                y = rk4_step(&f, t + i as f64 * h, &y, h);
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { eta: g });
            }
            t = g;
        }
        rows.push(row(problem, g, &y));
    }
    Ok(Profile { rows })
}
