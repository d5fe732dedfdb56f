//! Partition of the `(p, r)` quadrant by the stability of the equilibria.
//!
//! Symmetric model:
//!
//! | region | condition          | attracting equilibria |
//! |--------|--------------------|-----------------------|
//! | O      | r < min(p, 1)      | P0                    |
//! | I      | 1 < r < p          | none                  |
//! | II     | 1 < p < r          | none                  |
//! | III    | p < min(r, 1)      | P1, P2                |
//!
//! Asymmetric model, with the shifted diagonal `sd: r = p − s²/4` below
//! which only `P0` exists and the trace condition `r − 1 = x*²` on each
//! nontrivial branch:
//!
//! | region | condition                                              |
//! |--------|--------------------------------------------------------|
//! | Ob     | below sd, r < 1                                        |
//! | I      | below sd, r > 1                                        |
//! | Oa     | above sd, r < min(p, 1)                                |
//! | III    | above sd, P1 and P2 stable                             |
//! | IIIo   | above sd, r > 1, P2 stable, P1 not                     |
//! | IIa    | above sd, r > 1, neither P1 nor P2 stable              |
//!
//! With `r > 1`, `P1` is stable iff `r > p` and `p < 1 − s√(r−1)`, and `P2`
//! iff `r ≤ 1 + s²/4` or `p < 1 + s√(r−1)`. Both Hopf conditions lie on the
//! parabola `r = 1 + (p−1)²/s²` with vertex `(1, 1)`: its left half is the
//! `P1` branch and its right half beyond `Q2 = (1 + s²/2, 1 + s²/4)`, where it
//! touches sd, the `P2` branch.
//!
//! The symmetric region III is split near `(1, 1)` by the lines through the
//! organizing center on which `(r − 1)/(r − p)` equals the homoclinic and
//! cycle-fold thresholds of the unfolded system.

use serde::{Deserialize, Serialize};

use super::nontrivial_roots;
use crate::bifurcation::{Association, BifurcationCurve, CurveKind};
use crate::error::{Error, Result};
use crate::models::AsymParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Sym,
    Asym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    O,
    Oa,
    Ob,
    I,
    II,
    IIa,
    III,
    IIIa,
    IIIb,
    IIIc,
    IIIo,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "O" => RegionLabel::O,
            "Oa" => RegionLabel::Oa,
            "Ob" => RegionLabel::Ob,
            "I" => RegionLabel::I,
            "II" => RegionLabel::II,
            "IIa" => RegionLabel::IIa,
            "III" => RegionLabel::III,
            "IIIa" => RegionLabel::IIIa,
            "IIIb" => RegionLabel::IIIb,
            "IIIc" => RegionLabel::IIIc,
            "IIIo" => RegionLabel::IIIo,
            other => return Err(Error::InvalidParams(format!("unknown region {other}"))),
        })
    }
}

/// Threshold values of `(r − 1)/(r − p)` separating IIIa | IIIb | IIIc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region3Thresholds {
    /// Homoclinic threshold (4/5).
    pub homoclinic: f64,
    /// Cycle-fold threshold λ*.
    pub fold: f64,
}

/// Distance below which a point counts as lying on a region boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

fn sym_label(p: f64, r: f64) -> RegionLabel {
    if r < p.min(1.0) {
        RegionLabel::O
    } else if p < r.min(1.0) {
        RegionLabel::III
    } else if r < p {
        RegionLabel::I
    } else {
        RegionLabel::II
    }
}

fn asym_label(p: f64, r: f64, s: f64) -> RegionLabel {
    if r < p - 0.25 * s * s {
        return if r < 1.0 { RegionLabel::Ob } else { RegionLabel::I };
    }
    if r < 1.0 {
        return if r < p { RegionLabel::Oa } else { RegionLabel::III };
    }
    let w = s * (r - 1.0).sqrt();
    let p1_stable = r > p && p < 1.0 - w;
    let p2_stable = r < 1.0 + 0.25 * s * s || p < 1.0 + w;
    if p1_stable {
        RegionLabel::III
    } else if p2_stable {
        RegionLabel::IIIo
    } else {
        RegionLabel::IIa
    }
}

fn sub_label(p: f64, r: f64, t: &Region3Thresholds) -> RegionLabel {
    if r <= 1.0 {
        return RegionLabel::IIIc;
    }
    let ratio = (r - 1.0) / (r - p);
    if ratio > t.homoclinic {
        RegionLabel::IIIa
    } else if ratio > t.fold {
        RegionLabel::IIIb
    } else {
        RegionLabel::IIIc
    }
}

/// Label without the boundary check; points on a boundary get the label of
/// one of the adjacent regions.
pub fn region_classify_exact(
    params: &AsymParams,
    variant: Variant,
    thresholds: Option<&Region3Thresholds>,
) -> RegionLabel {
    let (p, r) = (params.p, params.r);
    match variant {
        Variant::Sym => {
            let base = sym_label(p, r);
            match (base, thresholds) {
                (RegionLabel::III, Some(t)) => sub_label(p, r, t),
                _ => base,
            }
        }
        Variant::Asym => asym_label(p, r, params.s),
    }
}

/// Region of `(p, r)`. Points within [`BOUNDARY_TOL`] of a curve across which
/// the label changes give [`Error::BoundaryPoint`]. `s` is ignored for the
/// symmetric variant; sub-labels IIIa–c need `thresholds`.
pub fn region_classify(
    params: &AsymParams,
    variant: Variant,
    thresholds: Option<&Region3Thresholds>,
) -> Result<RegionLabel> {
    params.validate()?;
    let center = region_classify_exact(params, variant, thresholds);
    for k in 0..16 {
        let a = k as f64 * std::f64::consts::PI / 8.0;
        let probe = AsymParams {
            p: params.p + BOUNDARY_TOL * a.cos(),
            r: params.r + BOUNDARY_TOL * a.sin(),
            s: params.s,
        };
        if region_classify_exact(&probe, variant, thresholds) != center {
            return Err(Error::BoundaryPoint {
                p: params.p,
                r: params.r,
                curve: boundary_name(params, variant, thresholds),
            });
        }
    }
    Ok(center)
}

fn boundary_name(params: &AsymParams, variant: Variant, thresholds: Option<&Region3Thresholds>) -> &'static str {
    let (p, r, s) = (params.p, params.r, params.s);
    let near = |v: f64| v.abs() < 1e-6;
    match variant {
        Variant::Sym => {
            if near(r - p) {
                "pitchfork r = p"
            } else if near(r - 1.0) {
                "hopf r = 1"
            } else if near(p - 1.0) {
                "hopf p = 1"
            } else if thresholds.is_some() {
                "region III subdivision"
            } else {
                "region boundary"
            }
        }
        Variant::Asym => {
            if near(r - (p - 0.25 * s * s)) {
                "saddle-node sd"
            } else if near(r - 1.0) {
                "hopf e0"
            } else if near(r - p) {
                "transcritical d0"
            } else if r > 1.0 && near(p - (1.0 - s * (r - 1.0).sqrt())) {
                "hopf e1"
            } else if r > 1.0 && near(p - (1.0 + s * (r - 1.0).sqrt())) {
                "hopf e2"
            } else {
                "region boundary"
            }
        }
    }
}

/// Node/spiral boundaries of the symmetric model on `p ∈ [p_lo, p_hi]`:
/// `C1: p = ¼(r+1)²` for `P0` and `C2: r = p + (p−1)²/8` for `P1`/`P2`.
pub fn node_spiral_curves(p_lo: f64, p_hi: f64, n: usize) -> Vec<BifurcationCurve> {
    let n = n.max(2);
    let ps: Vec<f64> = (0..n)
        .map(|i| p_lo + (p_hi - p_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let c1: Vec<(f64, f64)> = ps
        .iter()
        .filter(|&&p| p >= 0.25)
        .map(|&p| (p, 2.0 * p.sqrt() - 1.0))
        .filter(|&(_, r)| r > 0.0)
        .collect();
    let c2: Vec<(f64, f64)> = ps
        .iter()
        .map(|&p| (p, p + (p - 1.0).powi(2) / 8.0))
        .collect();
    vec![
        BifurcationCurve::closed_form("C1", CurveKind::NodeSpiral, Association::P0, c1),
        BifurcationCurve::closed_form("C2", CurveKind::NodeSpiral, Association::P1P2, c2),
    ]
}

/// `x` of the nontrivial equilibrium on the given branch, if it exists.
pub(crate) fn branch_x(p: f64, r: f64, s: f64, branch: usize) -> Option<f64> {
    nontrivial_roots(p, r, s).get(branch).copied()
}
