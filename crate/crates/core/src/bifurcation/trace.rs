//! Homoclinic and cycle-fold curves traced by bisection in `r` on a grid of
//! `p` values.
//!
//! Both tracers reduce a curve to a boolean detector on the `(p, r)` plane:
//!
//! * homoclinic: a small unstable cycle around a chosen focus exists, found by
//!   reverse-time integration from next to the focus, and keeps a distance of
//!   at least `eps_hc·|focus − saddle|` from the saddle;
//! * cycle fold: forward integration from far outside reaches a stable cycle
//!   winding around every equilibrium.
//!
//! The first column is bracketed by a scan over `r`; later columns start from
//! a linear extrapolation of the two previous points and widen the bracket
//! geometrically until the detector flips.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{Association, BifurcationCurve, CurveKind, Provenance};
use crate::equilibria::{find_equilibria, EquilibriumLabel, Kind, RegionLabel, Variant};
use crate::error::{Error, Result};
use crate::integrate::{estimate_cycle, CycleConfig, Direction};
use crate::models::{AsymParams, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub cycle: CycleConfig,
    /// Half-width of the final bisection bracket in `r`.
    pub r_tol: f64,
    /// Collision threshold relative to the focus–saddle distance.
    pub eps_hc: f64,
    /// Reverse-time seed offset from the focus, relative to the same distance.
    pub seed_fraction: f64,
    /// Upper end of the scan that brackets the first column.
    pub r_max: f64,
    pub scan_points: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            cycle: CycleConfig {
                max_time: 5.0e4,
                ..CycleConfig::default()
            },
            r_tol: 1e-5,
            eps_hc: 1e-3,
            seed_fraction: 1e-2,
            r_max: 4.0,
            scan_points: 24,
        }
    }
}

/// Outcome of one homoclinic detector evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomoclinicProbe {
    /// Fewer than three equilibria, or the focus is itself the saddle.
    NoSaddle,
    /// The focus repels, so no small unstable cycle surrounds it.
    FocusUnstable,
    Inner { min_distance: f64, period: f64 },
    /// No cycle around the focus alone, or one touching the saddle.
    Absorbed,
}

impl HomoclinicProbe {
    /// Detector value: true on the side of the curve where the small cycle
    /// lives (the Hopf side).
    pub fn is_inner_side(&self) -> bool {
        matches!(self, HomoclinicProbe::Inner { .. } | HomoclinicProbe::FocusUnstable)
    }
}

fn params_for(variant: Variant, p: f64, r: f64, s: f64) -> Result<AsymParams> {
    let s = match variant {
        Variant::Sym => 0.0,
        Variant::Asym => s,
    };
    AsymParams::new(p, r, s)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn soft_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoCycleFound(_) | Error::NonConvergentReturns { .. } | Error::StepLimitExceeded { .. }
    )
}

pub fn homoclinic_probe(params: &AsymParams, focus: EquilibriumLabel, cfg: &TraceConfig) -> Result<HomoclinicProbe> {
    let eqs = find_equilibria(&ModelSpec::Asym(*params))?;
    if eqs.len() < 3 {
        return Ok(HomoclinicProbe::NoSaddle);
    }
    let Some(saddle) = eqs.iter().find(|e| e.kind == Kind::Saddle) else {
        return Ok(HomoclinicProbe::NoSaddle);
    };
    let f = eqs
        .iter()
        .find(|e| e.label == focus)
        .expect("three equilibria carry all labels");
    if f.label == saddle.label {
        return Ok(HomoclinicProbe::NoSaddle);
    }
    if !f.kind.is_stable() {
        return Ok(HomoclinicProbe::FocusUnstable);
    }
    let d_fs = dist(&f.location, &saddle.location);
    let start = [
        f.location[0] + cfg.seed_fraction * (saddle.location[0] - f.location[0]),
        f.location[1] + cfg.seed_fraction * (saddle.location[1] - f.location[1]),
    ];
    match estimate_cycle(params, &start, Direction::Reverse, &cfg.cycle) {
        Ok(c) => {
            let min_distance = c.min_distance_to(&saddle.location);
            let around_focus = c.winding_number(&f.location) != 0;
            let around_saddle = c.winding_number(&saddle.location) != 0;
            if around_focus && !around_saddle && min_distance > cfg.eps_hc * d_fs {
                Ok(HomoclinicProbe::Inner {
                    min_distance,
                    period: c.period,
                })
            } else {
                Ok(HomoclinicProbe::Absorbed)
            }
        }
        Err(e) if soft_failure(&e) => Ok(HomoclinicProbe::Absorbed),
        Err(e) => Err(e),
    }
}

/// Saddle of the configuration at `(p, r)`, if there are three equilibria.
pub fn saddle_label(params: &AsymParams) -> Result<Option<EquilibriumLabel>> {
    let eqs = find_equilibria(&ModelSpec::Asym(*params))?;
    if eqs.len() < 3 {
        return Ok(None);
    }
    Ok(eqs.iter().find(|e| e.kind == Kind::Saddle).map(|e| e.label))
}

/// True iff forward integration from far outside settles on a stable cycle
/// that winds around every equilibrium.
pub fn fold_detector(params: &AsymParams, cfg: &TraceConfig) -> Result<bool> {
    let eqs = find_equilibria(&ModelSpec::Asym(*params))?;
    let scale = eqs
        .iter()
        .map(|e| e.location[0].abs().max(e.location[1].abs()))
        .fold(1.0, f64::max);
    match estimate_cycle(params, &[3.0 * scale, 0.0], Direction::Forward, &cfg.cycle) {
        Ok(c) => Ok(eqs.iter().all(|e| c.winding_number(&e.location) != 0)),
        Err(e) if soft_failure(&e) => Ok(false),
        Err(e) => Err(e),
    }
}

fn p_grid(p_range: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let (a, b) = p_range;
    if !(step > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParams("trace needs a finite p range and step > 0".into()));
    }
    let n = ((b - a).abs() / step + 1e-9).floor() as usize;
    let dir = if b >= a { 1.0 } else { -1.0 };
    let mut ps: Vec<f64> = (0..=n).map(|i| ((a + dir * step * i as f64) * 1e12).round() / 1e12).collect();
    if (ps[n] - b).abs() > 1e-12 {
        ps.push(b);
    }
    Ok(ps)
}

struct Column {
    r: f64,
    half_width: f64,
}

/// Shrinks `[r_a, r_b]` (detector `a_val` at `r_a`, the opposite at `r_b`)
/// to width `2·r_tol`.
fn bisect<D: Fn(f64) -> Result<bool>>(detect: &D, mut r_a: f64, a_val: bool, mut r_b: f64, r_tol: f64) -> Result<Column> {
    while (r_b - r_a).abs() > 2.0 * r_tol {
        let m = 0.5 * (r_a + r_b);
        if detect(m)? == a_val {
            r_a = m;
        } else {
            r_b = m;
        }
    }
    Ok(Column {
        r: 0.5 * (r_a + r_b),
        half_width: 0.5 * (r_b - r_a).abs(),
    })
}

/// First column: scan `(r_lo, r_hi]` and bisect the lowest transition.
/// Returns the column and the detector value above the curve.
fn scan_column<D: Fn(f64) -> Result<bool> + Sync>(
    p: f64,
    detect: &D,
    r_lo: f64,
    r_hi: f64,
    cfg: &TraceConfig,
) -> Result<(Column, bool)> {
    let n = cfg.scan_points.max(3);
    // log spacing in r − r_lo, so curves hugging the lower edge are bracketed
    let span = r_hi - r_lo;
    let rs: Vec<f64> = (0..n)
        .map(|i| r_lo + span * 1e-4f64.powf(1.0 - i as f64 / (n - 1) as f64))
        .collect();
    let vals: Vec<bool> = rs.par_iter().map(|&r| detect(r)).collect::<Result<_>>()?;
    let k = (1..n).find(|&k| vals[k] != vals[k - 1]).ok_or_else(|| Error::DetectorFailed {
        p,
        reason: format!("detector does not change on r in ({r_lo}, {r_hi}]"),
    })?;
    let col = bisect(detect, rs[k - 1], vals[k - 1], rs[k], cfg.r_tol)?;
    Ok((col, vals[k]))
}

/// Later columns: widen a bracket around `guess` until the detector flips.
fn follow_column<D: Fn(f64) -> Result<bool>>(
    p: f64,
    detect: &D,
    guess: f64,
    first_step: f64,
    above: bool,
    r_lo: f64,
    r_hi: f64,
    cfg: &TraceConfig,
) -> Result<Column> {
    let g = guess.clamp(r_lo, r_hi);
    let vg = detect(g)?;
    // the curve lies below g when g is already on the upper side
    let dir = if vg == above { -1.0 } else { 1.0 };
    let mut h = first_step;
    let mut prev = g;
    for _ in 0..40 {
        let r = (prev + dir * h).clamp(r_lo, r_hi);
        let v = detect(r)?;
        if v != vg {
            return bisect(detect, prev, vg, r, cfg.r_tol);
        }
        if r == r_lo || r == r_hi {
            break;
        }
        prev = r;
        h *= 2.0;
    }
    Err(Error::DetectorFailed {
        p,
        reason: format!("no bracket found around r = {guess}"),
    })
}

fn trace<D: Fn(f64, f64) -> Result<bool> + Sync>(
    detect: D,
    ps: &[f64],
    domain: impl Fn(f64) -> (f64, f64),
    cfg: &TraceConfig,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(ps.len());
    let mut worst: f64 = 0.0;
    let mut above = true;
    for (i, &p) in ps.iter().enumerate() {
        let (r_lo, r_hi) = domain(p);
        let column_detect = |r: f64| detect(p, r);
        let col = if i == 0 {
            let (col, a) = scan_column(p, &column_detect, r_lo, r_hi, cfg)?;
            above = a;
            col
        } else {
            let (guess, step) = match pts.len() {
                1 => (pts[0].1, 0.01),
                n => {
                    let (p1, r1) = pts[n - 1];
                    let (p0, r0) = pts[n - 2];
                    let slope = (r1 - r0) / (p1 - p0);
                    (r1 + slope * (p - p1), (0.25 * (r1 - r0).abs()).max(8.0 * cfg.r_tol))
                }
            };
            if guess > r_hi {
                break;
            }
            follow_column(p, &column_detect, guess, step, above, r_lo, r_hi, cfg)?
        };
        worst = worst.max(col.half_width);
        pts.push((p, col.r));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((pts, worst))
}

fn existence_floor(p: f64, s: f64) -> f64 {
    (p - 0.25 * s * s).max(0.0) + 1e-9
}

/// Homoclinic curve of the small unstable cycle around `focus`.
pub fn trace_homoclinic(
    variant: Variant,
    s: f64,
    p_range: (f64, f64),
    step: f64,
    focus: EquilibriumLabel,
    cfg: &TraceConfig,
) -> Result<BifurcationCurve> {
    let s = if variant == Variant::Sym { 0.0 } else { s };
    let ps = p_grid(p_range, step)?;
    let detect = |p: f64, r: f64| -> Result<bool> {
        let params = params_for(variant, p, r, s)?;
        Ok(homoclinic_probe(&params, focus, cfg)?.is_inner_side())
    };
    let (points, worst) = trace(detect, &ps, |p| (existence_floor(p, s), cfg.r_max), cfg)?;
    let (p_mid, r_mid) = points[points.len() / 2];
    let saddle = saddle_label(&params_for(variant, p_mid, r_mid, s)?)?;
    let association = match focus {
        EquilibriumLabel::P0 => Association::P0,
        EquilibriumLabel::P1 if variant == Variant::Sym => Association::P1P2,
        EquilibriumLabel::P1 => Association::P1,
        EquilibriumLabel::P2 => Association::P2,
    };
    Ok(BifurcationCurve {
        name: format!("homoclinic-{focus}"),
        kind: CurveKind::Homoclinic,
        association,
        provenance: Provenance::Traced,
        points,
        tolerance: Some(worst),
        saddle,
    })
}

/// Saddle-node curve of the outer cycles.
pub fn trace_cycle_fold(
    variant: Variant,
    s: f64,
    p_range: (f64, f64),
    step: f64,
    cfg: &TraceConfig,
) -> Result<BifurcationCurve> {
    let s = if variant == Variant::Sym { 0.0 } else { s };
    let ps = p_grid(p_range, step)?;
    let detect = |p: f64, r: f64| -> Result<bool> { fold_detector(&params_for(variant, p, r, s)?, cfg) };
    // for p ≥ 1 the outer cycles are born at r = 1 in the Hopf bifurcation of P0
    let floor = |p: f64| if p >= 1.0 { 1.0 } else { 1e-6 };
    let (points, worst) = trace(detect, &ps, |p| (floor(p), cfg.r_max), cfg)?;
    Ok(BifurcationCurve {
        name: "cycle-fold".into(),
        kind: CurveKind::CycleFold,
        association: Association::Cycles,
        provenance: Provenance::Traced,
        points,
        tolerance: Some(worst),
        saddle: None,
    })
}

/// Traced boundaries inside the symmetric region III.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region3Partition {
    /// IIIa above, IIIb below.
    pub homoclinic: BifurcationCurve,
    /// IIIb above, IIIc below.
    pub fold: BifurcationCurve,
}

impl Region3Partition {
    /// Sub-label of a region III point; `None` outside region III or outside
    /// the traced `p` range when `r > 1`.
    pub fn label(&self, p: f64, r: f64) -> Option<RegionLabel> {
        if !(p < r.min(1.0)) {
            return None;
        }
        if r <= 1.0 {
            return Some(RegionLabel::IIIc);
        }
        let (rh, rf) = (self.homoclinic.r_at(p)?, self.fold.r_at(p)?);
        Some(if r > rh {
            RegionLabel::IIIa
        } else if r > rf {
            RegionLabel::IIIb
        } else {
            RegionLabel::IIIc
        })
    }
}

/// Homoclinic and cycle-fold curves of the symmetric model over `p_range`
/// (which should stay below 1).
pub fn region3_subpartition(p_range: (f64, f64), step: f64, cfg: &TraceConfig) -> Result<Region3Partition> {
    let (h, f) = rayon::join(
        || trace_homoclinic(Variant::Sym, 0.0, p_range, step, EquilibriumLabel::P1, cfg),
        || trace_cycle_fold(Variant::Sym, 0.0, p_range, step, cfg),
    );
    let (mut homoclinic, mut fold) = (h?, f?);
    homoclinic.name = "IIIa|IIIb".into();
    fold.name = "IIIb|IIIc".into();
    Ok(Region3Partition { homoclinic, fold })
}
