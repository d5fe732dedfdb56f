//! Hopf criticality, organizing centers and the closed-form codimension-one
//! loci of equilibria.
//!
//! In the rotated frame the planar model is the Liénard system
//! `x'' + g(x)x' + f(x) = 0` with
//!
//! ```text
//! g(x) = x² − (r − 1),    f(x) = x³ + s x² − (r − p) x.
//! ```
//!
//! At an equilibrium `x*` with `g(x*) = 0` and `f'(x*) > 0` the eigenvalues
//! are `±iω`, `ω = √f'(x*)`, and the first Lyapunov coefficient is
//!
//! ```text
//! ℓ* = (ω / 8) (f''g' − f'g'') / f'²
//! ```
//!
//! evaluated at `x*`. Negative `ℓ*` is supercritical.

use serde::{Deserialize, Serialize};

use super::regions::{branch_x, Variant};
use super::{rotated_jacobian, EquilibriumLabel};
use crate::bifurcation::{Association, BifurcationCurve, CurveKind};
use crate::error::{Error, Result};
use crate::models::AsymParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub label: EquilibriumLabel,
    pub criticality: Criticality,
    /// First Lyapunov coefficient ℓ*.
    pub lyapunov: f64,
    /// Natural frequency ω*.
    pub omega: f64,
}

/// Trace and determinant tolerance for "on the Hopf curve".
pub const HOPF_TOL: f64 = 1e-9;

fn equilibrium_x(params: &AsymParams, label: EquilibriumLabel) -> Option<f64> {
    match label {
        EquilibriumLabel::P0 => Some(0.0),
        EquilibriumLabel::P1 => branch_x(params.p, params.r, params.s, 0),
        EquilibriumLabel::P2 => branch_x(params.p, params.r, params.s, 1),
    }
}

/// Criticality of the Hopf bifurcation of `label` at `params`, which must lie
/// on that equilibrium's Hopf curve. The symmetric variant uses `s = 0`.
pub fn hopf_analysis(params: &AsymParams, variant: Variant, label: EquilibriumLabel) -> Result<HopfReport> {
    params.validate()?;
    let m = AsymParams {
        s: if variant == Variant::Sym { 0.0 } else { params.s },
        ..*params
    };
    let x = equilibrium_x(&m, label).ok_or(Error::NotOnHopfCurve {
        trace: f64::NAN,
        det: f64::NAN,
    })?;
    let j = rotated_jacobian(&m, &[x, 0.0]);
    let trace = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if trace.abs() > HOPF_TOL || det <= HOPF_TOL {
        return Err(Error::NotOnHopfCurve { trace, det });
    }
    let (r, p, s) = (m.r, m.p, m.s);
    let f1 = 3.0 * x * x + 2.0 * s * x - (r - p);
    let f2 = 6.0 * x + 2.0 * s;
    let g1 = 2.0 * x;
    let g2 = 2.0;
    let omega = f1.sqrt();
    let lyapunov = omega / 8.0 * (f2 * g1 - f1 * g2) / (f1 * f1);
    Ok(HopfReport {
        label,
        criticality: if lyapunov < 0.0 {
            Criticality::Supercritical
        } else {
            Criticality::Subcritical
        },
        lyapunov,
        omega,
    })
}

/// Closed-form natural frequencies on the three Hopf curves of the
/// asymmetric model.
pub fn hopf_frequency(label: EquilibriumLabel, p: f64, r: f64, s: f64) -> f64 {
    match label {
        EquilibriumLabel::P0 => (p - 1.0).sqrt(),
        EquilibriumLabel::P1 => (2.0 * (r - 1.0) + s * (r - 1.0).sqrt()).sqrt(),
        EquilibriumLabel::P2 => (2.0 * (r - 1.0) - s * (r - 1.0).sqrt()).sqrt(),
    }
}

/// A point with a double-zero eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtPoint {
    pub name: &'static str,
    pub p: f64,
    pub r: f64,
    /// Equilibrium carrying the double zero.
    pub label: EquilibriumLabel,
    pub trace: f64,
    pub det: f64,
}

/// Organizing centers: `(1, 1)` for the symmetric model; `Q1 = (1, 1)` and
/// `Q2 = (1 + s²/2, 1 + s²/4)` for the asymmetric one.
pub fn bt_points(variant: Variant, s: f64) -> Vec<BtPoint> {
    let s = if variant == Variant::Sym { 0.0 } else { s };
    let diag = |name, p: f64, r: f64, x: f64, label| {
        let j = rotated_jacobian(&AsymParams { p, r, s }, &[x, 0.0]);
        BtPoint {
            name,
            p,
            r,
            label,
            trace: j[0][0] + j[1][1],
            det: j[0][0] * j[1][1] - j[0][1] * j[1][0],
        }
    };
    let mut out = vec![diag("Q1", 1.0, 1.0, 0.0, EquilibriumLabel::P0)];
    if variant == Variant::Asym {
        // at Q2 the two nontrivial roots merge at x = −s/2
        out.push(diag("Q2", 1.0 + 0.5 * s * s, 1.0 + 0.25 * s * s, -0.5 * s, EquilibriumLabel::P2));
    }
    out
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Codimension-one loci of equilibria as polylines over `p ∈ [p_lo, p_hi]`:
/// the pitchfork diagonal for the symmetric model; the transcritical
/// diagonal `r = p < 1` and the saddle-node line `r = p − s²/4` for the
/// asymmetric model.
pub fn codim1_loci(variant: Variant, s: f64, p_lo: f64, p_hi: f64, n: usize) -> Vec<BifurcationCurve> {
    let ps = linspace(p_lo, p_hi, n);
    match variant {
        Variant::Sym => vec![BifurcationCurve::closed_form(
            "pitchfork",
            CurveKind::Pitchfork,
            Association::P1P2,
            ps.iter().map(|&p| (p, p)).collect(),
        )],
        Variant::Asym => {
            let tc: Vec<(f64, f64)> = ps.iter().filter(|&&p| p <= 1.0).map(|&p| (p, p)).collect();
            let sn: Vec<(f64, f64)> = ps
                .iter()
                .map(|&p| (p, p - 0.25 * s * s))
                .filter(|&(_, r)| r > 0.0)
                .collect();
            vec![
                BifurcationCurve::closed_form("d0", CurveKind::Transcritical, Association::P1, tc),
                BifurcationCurve::closed_form("sd", CurveKind::SaddleNodeEq, Association::P1P2, sn),
            ]
        }
    }
}

/// Hopf curves as closed-form polylines over `p ∈ [p_lo, p_hi]` (and
/// `r ≤ r_hi`).
pub fn hopf_polylines(variant: Variant, s: f64, p_lo: f64, p_hi: f64, r_hi: f64, n: usize) -> Vec<BifurcationCurve> {
    let ps = linspace(p_lo, p_hi, n);
    let p0: Vec<(f64, f64)> = ps.iter().filter(|&&p| p >= 1.0).map(|&p| (p, 1.0)).collect();
    let mut out = vec![BifurcationCurve::closed_form("e0", CurveKind::HopfSuper, Association::P0, p0)];
    if variant == Variant::Sym || s == 0.0 {
        let rs = linspace(1.0, r_hi.max(1.0), n);
        out.push(BifurcationCurve::closed_form(
            "p=1",
            CurveKind::HopfSub,
            Association::P1P2,
            rs.iter().map(|&r| (1.0, r)).collect(),
        ));
        return out;
    }
    let parabola = |p: f64| 1.0 + (p - 1.0).powi(2) / (s * s);
    let left: Vec<(f64, f64)> = ps
        .iter()
        .filter(|&&p| p <= 1.0)
        .map(|&p| (p, parabola(p)))
        .filter(|&(_, r)| r <= r_hi)
        .collect();
    let right: Vec<(f64, f64)> = ps
        .iter()
        .filter(|&&p| p >= 1.0 + 0.5 * s * s)
        .map(|&p| (p, parabola(p)))
        .filter(|&(_, r)| r <= r_hi)
        .collect();
    out.push(BifurcationCurve::closed_form("e1", CurveKind::HopfSub, Association::P1, left));
    out.push(BifurcationCurve::closed_form("e2", CurveKind::HopfSub, Association::P2, right));
    out
}
