//! Limit-cycle detection from section returns.
//!
//! After a transient, the trajectory is cut by the hyperplane through the
//! current point `a` with normal `F(a)`: the field vanishes at an equilibrium,
//! so the section is anchored on the orbit itself rather than at the
//! equilibrium the cycle surrounds. Only crossings in the direction of the
//! flow and lying within half the excursion of the previous loop count as
//! returns. Crossing times are refined on the continuous extension.
//!
//! Returns `c_k` are accepted as a cycle once the distance to their limit,
//! extrapolated geometrically from `|c_k − c_{k−1}| / |c_{k−1} − c_{k−2}|`,
//! falls below `return_tol` times the loop size. The loop size shrinks with
//! the returns when the orbit spirals into a focus, so spirals never pass.
//!
//! Reverse-time detection integrates the negated field; a cycle found that
//! way repels in forward time and is tagged unstable.

use serde::{Deserialize, Serialize};

use super::xbar::step_component_max;
use super::{solve, Flow, IntegratorConfig, Step};
use crate::error::{Error, Result};
use crate::models::{HamiltonianField, ModelSpec, Reversed, RotatedField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    /// Tolerances of the integration; `t_end` is ignored.
    pub integrator: IntegratorConfig,
    /// Time integrated before the section is placed.
    pub transient: f64,
    /// Time budget after the transient.
    pub max_time: f64,
    /// Relative acceptance threshold on the extrapolated return error.
    pub return_tol: f64,
    /// Field norm below which the orbit counts as having reached a point.
    pub equilibrium_tol: f64,
    /// Loops smaller than this are treated as a point.
    pub min_extent: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::rk45(1e-10, 1e-10, 1.0),
            transient: 100.0,
            max_time: 2.0e5,
            return_tol: 1e-7,
            equilibrium_tol: 1e-10,
            min_extent: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEstimate {
    pub period: f64,
    /// Largest first component on the cycle.
    pub amplitude_x: f64,
    pub stability: CycleStability,
    /// Accepted section returns, oldest first.
    pub section_points: Vec<Vec<f64>>,
    /// One period of the cycle as a closed polyline.
    pub orbit: Vec<Vec<f64>>,
    /// Ratio of successive return displacements at acceptance.
    pub return_ratio: f64,
}

impl CycleEstimate {
    /// Largest distance between two polyline points.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.orbit {
            for b in self.orbit.iter().step_by(4) {
                d = d.max(dist(a, b));
            }
        }
        d
    }

    /// Winding number of the planar cycle around `point`.
    pub fn winding_number(&self, point: &[f64]) -> i64 {
        let mut total = 0.0;
        let n = self.orbit.len();
        for k in 0..n {
            let a = &self.orbit[k];
            let b = &self.orbit[(k + 1) % n];
            let a0 = (a[1] - point[1]).atan2(a[0] - point[0]);
            let b0 = (b[1] - point[1]).atan2(b[0] - point[0]);
            let mut d = b0 - a0;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i64
    }

    /// Smallest distance from the polyline to `point`.
    pub fn min_distance_to(&self, point: &[f64]) -> f64 {
        let n = self.orbit.len();
        (0..n)
            .map(|k| segment_distance(&self.orbit[k], &self.orbit[(k + 1) % n], point))
            .fold(f64::INFINITY, f64::min)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn segment_distance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (ab.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    ab.iter()
        .zip(&ap)
        .map(|(u, v)| (v - t * u) * (v - t * u))
        .sum::<f64>()
        .sqrt()
}

fn norm<const N: usize>(x: &[f64; N]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

struct Section<const N: usize> {
    anchor: [f64; N],
    normal: [f64; N],
}

impl<const N: usize> Section<N> {
    fn new<F: VectorField<N>>(field: &F, anchor: [f64; N]) -> Option<Self> {
        let f = field.eval(&anchor);
        let n = norm(&f);
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let mut normal = f;
        for v in normal.iter_mut() {
            *v /= n;
        }
        Some(Self { anchor, normal })
    }

    fn g(&self, x: &[f64; N]) -> f64 {
        (0..N).map(|i| (x[i] - self.anchor[i]) * self.normal[i]).sum()
    }

    /// Time of an upward crossing inside the step, refined on the dense output.
    fn crossing(&self, step: &Step<N>) -> Option<f64> {
        let g0 = self.g(&step.x0);
        let g1 = self.g(&step.x1);
        if !(g0 < 0.0 && g1 >= 0.0) {
            return None;
        }
        let (mut lo, mut hi) = (step.t0, step.t1);
        let (mut glo, mut ghi) = (g0, g1);
        for _ in 0..100 {
            if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                break;
            }
            // secant guess, safeguarded by bisection
            let mut t = lo - glo * (hi - lo) / (ghi - glo);
            if !(t > lo && t < hi) || (t - lo).min(hi - t) < 0.01 * (hi - lo) {
                t = 0.5 * (lo + hi);
            }
            let gt = self.g(&step.at(t));
            if gt < 0.0 {
                lo = t;
                glo = gt;
            } else {
                hi = t;
                ghi = gt;
            }
        }
        Some(if ghi.abs() < glo.abs() { hi } else { lo })
    }
}

/// Loop diameters shrinking geometrically towards zero.
fn spirals_into_point(diams: &[f64]) -> bool {
    let n = diams.len();
    if n < 6 {
        return false;
    }
    let w = &diams[n - 5..];
    if !w.windows(2).all(|p| p[1] < p[0]) {
        return false;
    }
    (0..3).all(|k| {
        let (a, b, c) = (w[k], w[k + 1], w[k + 2]);
        let m = (c - b) / (b - a);
        if !(m > 0.0 && m < 1.0) {
            return false;
        }
        let limit = c + (c - b) * m / (1.0 - m);
        limit < 0.05 * c
    })
}

struct Recording<const N: usize> {
    start: f64,
    points: Vec<Vec<f64>>,
    xmax: f64,
}

fn run<const N: usize, F: VectorField<N>>(
    field: &F,
    near: &[f64; N],
    stability: CycleStability,
    cfg: &CycleConfig,
) -> Result<CycleEstimate> {
    let diverged = |e: Error| match e {
        Error::NonFiniteState { .. } => Error::NoCycleFound("orbit diverged".into()),
        other => other,
    };

    // transient
    let transient_cfg = cfg.integrator.with_t_end(cfg.transient);
    let mut settled = false;
    let summary = solve(field, 0.0, near, &transient_cfg, |s| {
        if norm(&s.f1) < cfg.equilibrium_tol {
            settled = true;
            return Flow::Stop;
        }
        Flow::Continue
    })
    .map_err(diverged)?;
    if settled {
        return Err(Error::NoCycleFound(format!(
            "orbit converged to the point {:?}",
            summary.state
        )));
    }
    let start = summary.state;

    let mut section = Section::new(field, start)
        .ok_or_else(|| Error::NoCycleFound("started on an equilibrium".into()))?;
    let mut dmax: f64 = 0.0;
    let mut prev_loop: f64 = 0.0;
    let mut returns: Vec<(f64, [f64; N])> = Vec::new();
    let mut misses = 0usize;
    let mut recording: Option<Recording<N>> = None;
    let mut result: Option<Result<CycleEstimate>> = None;
    let mut last_ratio = f64::NAN;
    let mut lo = start;
    let mut hi = start;
    let mut loop_diams: Vec<f64> = Vec::new();
    let mut last_cross = 0.0;
    let mut cross_gap = cfg.transient;

    macro_rules! reanchor {
        ($x:expr) => {
            match Section::new(field, $x) {
                Some(sec) => section = sec,
                None => {
                    result = Some(Err(Error::NoCycleFound("reached an equilibrium".into())));
                    return Flow::Stop;
                }
            }
            returns.clear();
            loop_diams.clear();
            lo = $x;
            hi = $x;
            recording = None;
            misses = 0;
            dmax = 0.0;
        };
    }

    let main_cfg = cfg.integrator.with_t_end(cfg.max_time);
    solve(field, 0.0, &start, &main_cfg, |s| {
        if norm(&s.f1) < cfg.equilibrium_tol {
            result = Some(Err(Error::NoCycleFound(format!(
                "orbit converged to the point {:?}",
                s.x1
            ))));
            return Flow::Stop;
        }
        let crossing = section.crossing(s);
        let t_cross = crossing.unwrap_or(s.t1);

        if let Some(rec) = recording.as_mut() {
            let hi = if crossing.is_some() { t_cross } else { s.t1 };
            if let Some(m) = step_component_max(field, s, 0, rec.start, hi) {
                rec.xmax = rec.xmax.max(m);
            }
            for q in 1..=4 {
                let t = s.t0 + 0.25 * q as f64 * s.h();
                if t > rec.start && t < hi {
                    rec.points.push(s.at(t).to_vec());
                }
            }
        }

        for i in 0..N {
            lo[i] = lo[i].min(s.x1[i]);
            hi[i] = hi[i].max(s.x1[i]);
        }
        for x in [s.x0, s.x1] {
            dmax = dmax.max(
                (0..N)
                    .map(|i| (x[i] - section.anchor[i]).powi(2))
                    .sum::<f64>()
                    .sqrt(),
            );
        }

        let Some(tc) = crossing else {
            // the section line can miss an attractor that lies off the transient
            if s.t1 - last_cross > 10.0 * cross_gap {
                reanchor!(s.x1);
                last_cross = s.t1;
            }
            return Flow::Continue;
        };
        if tc > last_cross {
            cross_gap = tc - last_cross;
        }
        last_cross = tc;
        let c = s.at(tc);
        let dc = (0..N)
            .map(|i| (c[i] - section.anchor[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        if dmax == 0.0 || dc > 0.5 * dmax {
            misses += 1;
            if misses >= 4 {
                // the anchor sits off the attractor; restart the section here
                reanchor!(s.x1);
            }
            return Flow::Continue;
        }
        misses = 0;
        let loop_size = dmax;
        dmax = 0.0;
        loop_diams.push((0..N).map(|i| (hi[i] - lo[i]).powi(2)).sum::<f64>().sqrt());
        lo = c;
        hi = c;
        if loop_size < cfg.min_extent || spirals_into_point(&loop_diams) {
            result = Some(Err(Error::NoCycleFound(format!(
                "orbit collapsed onto the point {c:?}"
            ))));
            return Flow::Stop;
        }

        if let Some(rec) = recording.take() {
            let period = tc - rec.start;
            let mut points = rec.points;
            points.insert(0, returns.last().map(|r| r.1.to_vec()).unwrap_or_default());
            returns.push((tc, c));
            result = Some(Ok(CycleEstimate {
                period,
                amplitude_x: rec.xmax,
                stability,
                section_points: returns.iter().map(|r| r.1.to_vec()).collect(),
                orbit: points,
                return_ratio: last_ratio,
            }));
            return Flow::Stop;
        }

        returns.push((tc, c));
        let n = returns.len();
        if n >= 4 {
            let d1 = dist(&returns[n - 1].1, &returns[n - 2].1);
            let d0 = dist(&returns[n - 2].1, &returns[n - 3].1);
            let scale = loop_size.max(prev_loop);
            let floor = cfg.return_tol * scale;
            let ratio = if d0 > 0.0 { d1 / d0 } else { 0.0 };
            last_ratio = ratio;
            let extrapolated = if ratio < 1.0 {
                d1 * ratio / (1.0 - ratio)
            } else {
                f64::INFINITY
            };
            if d1 <= floor * 1e-2 || extrapolated <= floor {
                recording = Some(Recording {
                    start: tc,
                    points: Vec::new(),
                    xmax: c[0],
                });
            }
        }
        prev_loop = loop_size;
        Flow::Continue
    })
    .map_err(diverged)?;

    match result {
        Some(r) => r,
        None if returns.len() < 3 => Err(Error::NoCycleFound(
            "no section returns within the time budget".into(),
        )),
        None => Err(Error::NonConvergentReturns {
            returns: returns.len(),
        }),
    }
}

/// Locates the limit cycle reached from `near_state` in the given time
/// direction.
pub fn estimate_cycle<const N: usize, F: VectorField<N>>(
    field: &F,
    near_state: &[f64; N],
    direction: Direction,
    config: &CycleConfig,
) -> Result<CycleEstimate> {
    config.integrator.validate()?;
    match direction {
        Direction::Forward => run(field, near_state, CycleStability::Stable, config),
        Direction::Reverse => run(&Reversed(field), near_state, CycleStability::Unstable, config),
    }
}

/// [`estimate_cycle`] on any model variant.
pub fn estimate_cycle_model(
    model: &ModelSpec,
    near_state: &[f64],
    direction: Direction,
    config: &CycleConfig,
) -> Result<CycleEstimate> {
    model.validate()?;
    let dim_err = || Error::InvalidParams(format!("state needs {} components", model.dim()));
    match model {
        ModelSpec::Ms(m) => estimate_cycle(m, &near_state.try_into().map_err(|_| dim_err())?, direction, config),
        ModelSpec::Sym(m) => estimate_cycle(m, &near_state.try_into().map_err(|_| dim_err())?, direction, config),
        ModelSpec::Asym(m) => estimate_cycle(m, &near_state.try_into().map_err(|_| dim_err())?, direction, config),
        ModelSpec::Rotated(m) => estimate_cycle(
            &RotatedField(*m),
            &near_state.try_into().map_err(|_| dim_err())?,
            direction,
            config,
        ),
        ModelSpec::Unfolded(m) => estimate_cycle(m, &near_state.try_into().map_err(|_| dim_err())?, direction, config),
        ModelSpec::Hamiltonian { mu } => estimate_cycle(
            &HamiltonianField { mu: *mu },
            &near_state.try_into().map_err(|_| dim_err())?,
            direction,
            config,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FnField, SymParams};

    fn van_der_pol(mu: f64) -> impl VectorField<2> {
        FnField(move |x: &[f64; 2]| [x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]])
    }

    #[test]
    fn van_der_pol_cycle() {
        // weakly nonlinear: amplitude 2, period 2π(1 + μ²/16 + ...)
        let f = van_der_pol(0.1);
        let c = estimate_cycle(&f, &[0.5, 0.0], Direction::Forward, &CycleConfig::default()).unwrap();
        assert_eq!(c.stability, CycleStability::Stable);
        assert!((c.amplitude_x - 2.0).abs() < 2e-3, "{}", c.amplitude_x);
        assert!((c.period - 2.0 * std::f64::consts::PI * (1.0 + 0.01 / 16.0)).abs() < 1e-3, "{}", c.period);
        assert_eq!(c.winding_number(&[0.0, 0.0]), -1);
        assert_eq!(c.winding_number(&[5.0, 0.0]), 0);
    }

    #[test]
    fn reverse_time_of_reversed_van_der_pol() {
        // negating the field makes the cycle repelling; reverse time recovers it
        let f = Reversed(van_der_pol(1.0));
        let c = estimate_cycle(&f, &[0.5, 0.0], Direction::Reverse, &CycleConfig::default()).unwrap();
        assert_eq!(c.stability, CycleStability::Unstable);
        assert!((c.period - 6.6632868593231).abs() < 1e-6, "{}", c.period);
    }

    #[test]
    fn stable_focus_has_no_cycle() {
        let m = SymParams::new(2.0, 0.9).unwrap();
        let err = estimate_cycle(&m, &[0.5, 0.0], Direction::Forward, &CycleConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoCycleFound(_)), "{err:?}");
    }

    #[test]
    fn divergence_is_no_cycle() {
        let m = SymParams::new(2.0, 1.5).unwrap();
        // outside the stable cycle, reverse time runs off to infinity
        let err = estimate_cycle(&m, &[4.0, 0.0], Direction::Reverse, &CycleConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoCycleFound(_)), "{err:?}");
    }
}
