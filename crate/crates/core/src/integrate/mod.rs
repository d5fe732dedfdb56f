//! ODE integration and orbit-level analysis.
//!
//! The driver [`solve`] advances a [`VectorField`] with either fixed-step RK4
//! or the adaptive Dormand–Prince 5(4) pair and hands every accepted step,
//! together with its continuous extension, to an observer. Everything else in
//! this module (trajectory storage, x̄ estimation, section returns and the
//! attractor census) is built on that callback.
//!
//! States whose components leave `[-1e6, 1e6]` or turn non-finite abort the
//! run with [`Error::NonFiniteState`].

mod census;
mod cycle;
mod orbit;
mod stepper;
mod xbar;

pub use census::{census_attractors, CensusConfig, CycleSummary, IcGrid, PortraitSummary};
pub use cycle::{estimate_cycle, estimate_cycle_model, CycleConfig, CycleEstimate, CycleStability, Direction};
pub use orbit::{integrate_model, random_initial_state, OrbitRecord};
pub use stepper::Dense;
pub use xbar::{xbar, xbar_model, XbarConfig, XbarEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::VectorField;
use stepper::{dopri_step, rk4_step};

/// Components beyond this magnitude count as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Rk4 { step: f64 },
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45 {
                abs_tol: 1e-9,
                rel_tol: 1e-9,
            },
            t_end: 100.0,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk45(abs_tol: f64, rel_tol: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk45 { abs_tol, rel_tol },
            t_end,
            ..Default::default()
        }
    }

    pub fn rk4(step: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk4 { step },
            t_end,
            ..Default::default()
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidConfig("t_end must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        match self.method {
            Method::Rk4 { step } if !(step.is_finite() && step > 0.0) => {
                Err(Error::InvalidConfig("step must be positive".into()))
            }
            Method::Rk45 { abs_tol, rel_tol }
                if !(abs_tol.is_finite() && abs_tol > 0.0 && rel_tol.is_finite() && rel_tol > 0.0) =>
            {
                Err(Error::InvalidConfig("tolerances must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// One accepted step handed to an observer.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub x0: [f64; N],
    pub x1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
    pub dense: Dense<N>,
}

impl<const N: usize> Step<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// State at absolute time `t ∈ [t0, t1]` from the continuous extension.
    pub fn at(&self, t: f64) -> [f64; N] {
        let h = self.h();
        if h == 0.0 {
            return self.x0;
        }
        self.dense.eval(((t - self.t0) / h).clamp(0.0, 1.0))
    }
}

/// What an observer wants after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveSummary<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    pub steps: usize,
    pub stopped: bool,
}

fn finite_and_bounded<const N: usize>(x: &[f64; N]) -> bool {
    x.iter().all(|c| c.is_finite() && c.abs() <= DIVERGENCE_BOUND)
}

fn rms<const N: usize>(x: &[f64; N], scale: &[f64; N]) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let e = x[i] / scale[i];
        acc += e * e;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F: VectorField<N>>(
    field: &F,
    x0: &[f64; N],
    f0: &[f64; N],
    abs_tol: f64,
    rel_tol: f64,
    t_span: f64,
) -> f64 {
    let mut sc = [0.0; N];
    for i in 0..N {
        sc[i] = abs_tol + rel_tol * x0[i].abs();
    }
    let d0 = rms(x0, &sc);
    let d1 = rms(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let x1 = stepper::axpy(x0, h0, f0);
    let f1 = field.eval(&x1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms(&diff, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_span)
}

/// Integrates `field` from `(t0, x0)` to `t0 + config.t_end`, calling
/// `observer` after every accepted step.
pub fn solve<const N: usize, F, O>(
    field: &F,
    t0: f64,
    x0: &[f64; N],
    config: &IntegratorConfig,
    mut observer: O,
) -> Result<SolveSummary<N>>
where
    F: VectorField<N>,
    O: FnMut(&Step<N>) -> Flow,
{
    config.validate()?;
    if !finite_and_bounded(x0) {
        return Err(Error::NonFiniteState { last_good_t: t0 });
    }
    let t_final = t0 + config.t_end;
    let mut t = t0;
    let mut x = *x0;
    let mut f = field.eval(&x);
    let mut steps = 0usize;

    match config.method {
        Method::Rk4 { step } => {
            while t < t_final {
                if steps >= config.max_steps {
                    return Err(Error::StepLimitExceeded {
                        t,
                        max_steps: config.max_steps,
                    });
                }
                let remaining = t_final - t;
                // avoid a sliver step from accumulated round-off
                let h = if remaining < step * (1.0 + 1e-9) { remaining } else { step };
                let x1 = rk4_step(field, &x, &f, h);
                if !finite_and_bounded(&x1) {
                    return Err(Error::NonFiniteState { last_good_t: t });
                }
                let f1 = field.eval(&x1);
                let t1 = if h == remaining { t_final } else { t + h };
                let s = Step {
                    t0: t,
                    t1,
                    x0: x,
                    x1,
                    f0: f,
                    f1,
                    dense: Dense::Hermite {
                        h,
                        x0: x,
                        x1,
                        f0: f,
                        f1,
                    },
                };
                steps += 1;
                t = t1;
                x = x1;
                f = f1;
                if observer(&s) == Flow::Stop {
                    return Ok(SolveSummary {
                        t,
                        state: x,
                        steps,
                        stopped: true,
                    });
                }
            }
        }
        Method::Rk45 { abs_tol, rel_tol } => {
            let mut h = initial_step(field, &x, &f, abs_tol, rel_tol, config.t_end);
            let mut last_rejected = false;
            while t < t_final {
                if steps >= config.max_steps {
                    return Err(Error::StepLimitExceeded {
                        t,
                        max_steps: config.max_steps,
                    });
                }
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t });
                }
                let remaining = t_final - t;
                let last = h >= remaining;
                let h_try = if last { remaining } else { h };
                let trial = dopri_step(field, &x, &f, h_try);
                let err = trial.error_norm(&x, abs_tol, rel_tol);
                if !err.is_finite() || !finite_and_bounded(&trial.x1) {
                    if h_try < 1e-10 * t.abs().max(1.0) {
                        return Err(Error::NonFiniteState { last_good_t: t });
                    }
                    h = 0.25 * h_try;
                    last_rejected = true;
                    continue;
                }
                if err <= 1.0 {
                    let t1 = if last { t_final } else { t + h_try };
                    let s = Step {
                        t0: t,
                        t1,
                        x0: x,
                        x1: trial.x1,
                        f0: f,
                        f1: trial.f1,
                        dense: trial.dense(&x, h_try),
                    };
                    steps += 1;
                    t = t1;
                    x = trial.x1;
                    f = trial.f1;
                    let mut fac = if err == 0.0 { 10.0 } else { 0.9 * err.powf(-0.2) };
                    fac = fac.clamp(0.2, 10.0);
                    if last_rejected {
                        fac = fac.min(1.0);
                    }
                    last_rejected = false;
                    h = h_try * fac;
                    if observer(&s) == Flow::Stop {
                        return Ok(SolveSummary {
                            t,
                            state: x,
                            steps,
                            stopped: true,
                        });
                    }
                } else {
                    let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    h = h_try * fac;
                    last_rejected = true;
                }
            }
        }
    }
    Ok(SolveSummary {
        t,
        state: x,
        steps,
        stopped: false,
    })
}

/// Step end-points of a single integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> [f64; N] {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

/// Integrates and keeps every accepted step end-point.
pub fn integrate<const N: usize, F: VectorField<N>>(
    field: &F,
    x0: &[f64; N],
    config: &IntegratorConfig,
) -> Result<Trajectory<N>> {
    let mut times = vec![0.0];
    let mut states = vec![*x0];
    solve(field, 0.0, x0, config, |s| {
        times.push(s.t1);
        states.push(s.x1);
        Flow::Continue
    })?;
    Ok(Trajectory { times, states })
}

/// States at the requested (sorted, nonnegative) output times, read from the
/// continuous extension.
pub fn integrate_at<const N: usize, F: VectorField<N>>(
    field: &F,
    x0: &[f64; N],
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<[f64; N]>> {
    let Some(&t_max) = times.last() else {
        return Ok(Vec::new());
    };
    if times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return Err(Error::InvalidConfig("output times must be sorted and >= 0".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut idx = 0;
    while idx < times.len() && times[idx] == 0.0 {
        out.push(*x0);
        idx += 1;
    }
    if idx == times.len() {
        return Ok(out);
    }
    let cfg = config.with_t_end(t_max);
    solve(field, 0.0, x0, &cfg, |s| {
        while idx < times.len() && times[idx] <= s.t1 {
            out.push(s.at(times[idx]));
            idx += 1;
        }
        if idx == times.len() {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    Ok(out)
}
