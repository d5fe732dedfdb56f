//! Finite-horizon estimate of `lim sup x(t)`.
//!
//! After discarding the first `transient_fraction` of `t_end`, the rest of the
//! horizon is cut into two equal blocks and the supremum of `x` is taken over
//! each. The estimate is accepted once two consecutive blocks agree within
//! `tol`; otherwise further blocks of the same length are integrated, up to
//! `max_extra_blocks`. Suprema inside a step are located on the continuous
//! extension where the first component of the field changes sign.

use serde::{Deserialize, Serialize};

use super::{solve, Flow, IntegratorConfig, Step};
use crate::error::{Error, Result};
use crate::models::{HamiltonianField, ModelSpec, RotatedField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XbarConfig {
    pub integrator: IntegratorConfig,
    pub transient_fraction: f64,
    pub tol: f64,
    pub max_extra_blocks: usize,
}

impl Default for XbarConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::rk45(1e-8, 1e-8, 500.0),
            transient_fraction: 0.5,
            tol: 1e-4,
            max_extra_blocks: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XbarEstimate {
    pub value: f64,
    pub previous_block: f64,
    pub t_used: f64,
}

/// Largest value of component `i` over `[a, b] ∩ [t0, t1]` of one step.
pub(crate) fn step_component_max<const N: usize, F: VectorField<N>>(
    field: &F,
    step: &Step<N>,
    i: usize,
    a: f64,
    b: f64,
) -> Option<f64> {
    let lo = a.max(step.t0);
    let hi = b.min(step.t1);
    if lo > hi {
        return None;
    }
    let xa = step.at(lo)[i];
    let xb = step.at(hi)[i];
    let mut best = xa.max(xb);
    let slope = |t: f64| field.eval(&step.at(t))[i];
    let (mut l, mut r) = (lo, hi);
    let (sl, sr) = (slope(l), slope(r));
    if sl > 0.0 && sr < 0.0 {
        for _ in 0..60 {
            let m = 0.5 * (l + r);
            if slope(m) > 0.0 {
                l = m;
            } else {
                r = m;
            }
            if r - l <= 1e-13 * r.abs().max(1.0) {
                break;
            }
        }
        best = best.max(step.at(0.5 * (l + r))[i]);
    }
    Some(best)
}

pub fn xbar<const N: usize, F: VectorField<N>>(
    field: &F,
    x0: &[f64; N],
    config: &XbarConfig,
) -> Result<XbarEstimate> {
    if !(0.0..1.0).contains(&config.transient_fraction) {
        return Err(Error::InvalidConfig("transient_fraction must lie in [0, 1)".into()));
    }
    let t_end = config.integrator.t_end;
    let t_transient = config.transient_fraction * t_end;
    let block = 0.5 * (t_end - t_transient);
    let total_blocks = 2 + config.max_extra_blocks;
    let horizon = t_transient + block * total_blocks as f64;
    let cfg = config.integrator.with_t_end(horizon);

    let mut sups = vec![f64::NEG_INFINITY; total_blocks];
    let mut outcome: Option<XbarEstimate> = None;
    solve(field, 0.0, x0, &cfg, |s| {
        if s.t1 <= t_transient {
            return Flow::Continue;
        }
        let first = (((s.t0 - t_transient) / block).floor().max(0.0)) as usize;
        let last = ((((s.t1 - t_transient) / block).ceil() as usize).max(1) - 1).min(total_blocks - 1);
        for k in first..=last {
            let a = t_transient + k as f64 * block;
            if let Some(m) = step_component_max(field, s, 0, a, a + block) {
                sups[k] = sups[k].max(m);
            }
        }
        // a block is complete once the step reaches its right edge
        let done = (((s.t1 - t_transient) / block) + 1e-12).floor() as usize;
        if done >= 2 {
            let k = done.min(total_blocks) - 1;
            let (prev, cur) = (sups[k - 1], sups[k]);
            if (cur - prev).abs() <= config.tol {
                outcome = Some(XbarEstimate {
                    value: cur,
                    previous_block: prev,
                    t_used: s.t1,
                });
                return Flow::Stop;
            }
        }
        Flow::Continue
    })?;
    outcome.ok_or(Error::NotConverged {
        first: sups[total_blocks - 2],
        second: sups[total_blocks - 1],
    })
}

/// [`xbar`] on any model variant.
pub fn xbar_model(model: &ModelSpec, x0: &[f64], config: &XbarConfig) -> Result<XbarEstimate> {
    model.validate()?;
    let dim_err = || Error::InvalidParams(format!("state needs {} components", model.dim()));
    match model {
        ModelSpec::Ms(m) => xbar(m, &x0.try_into().map_err(|_| dim_err())?, config),
        ModelSpec::Sym(m) => xbar(m, &x0.try_into().map_err(|_| dim_err())?, config),
        ModelSpec::Asym(m) => xbar(m, &x0.try_into().map_err(|_| dim_err())?, config),
        ModelSpec::Rotated(m) => xbar(&RotatedField(*m), &x0.try_into().map_err(|_| dim_err())?, config),
        ModelSpec::Unfolded(m) => xbar(m, &x0.try_into().map_err(|_| dim_err())?, config),
        ModelSpec::Hamiltonian { mu } => xbar(
            &HamiltonianField { mu: *mu },
            &x0.try_into().map_err(|_| dim_err())?,
            config,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HamiltonianField, SymParams};

    #[test]
    fn sup_of_a_harmonic_orbit_is_its_amplitude() {
        // μ = −1 Hamiltonian: closed orbits around the origin
        let f = HamiltonianField { mu: -1.0 };
        let est = xbar(&f, &[0.7, 0.0], &XbarConfig::default()).unwrap();
        assert!((est.value - 0.7).abs() < 1e-5, "{est:?}");
    }

    #[test]
    fn trivial_attractor() {
        let m = SymParams::new(2.0, 0.5).unwrap();
        let est = xbar(&m, &[1.3, -2.0], &XbarConfig::default()).unwrap();
        assert!(est.value.abs() < 1e-4);
    }

    #[test]
    fn nontrivial_equilibria() {
        let m = SymParams::new(0.5, 0.8).unwrap();
        let est = xbar(&m, &[1.0, -0.5], &XbarConfig::default()).unwrap();
        assert!((est.value.abs() - 0.3f64.sqrt()).abs() < 1e-3, "{est:?}");
    }

    #[test]
    fn bad_fraction_rejected() {
        let m = SymParams::new(2.0, 0.5).unwrap();
        let cfg = XbarConfig {
            transient_fraction: 1.0,
            ..Default::default()
        };
        assert!(xbar(&m, &[1.0, 0.0], &cfg).is_err());
    }
}
