//! Equilibria, Jacobians and linear stability.
//!
//! Every variant has the trivial state `P0` at the origin. The planar models
//! have up to two more, `P1` and `P2`, on the line `y = −x` (the 3-D model
//! adds `z = −x`) with `x` a root of `x² + sx − (r − p) = 0`:
//!
//! ```text
//! x₁,₂ = ½(−s ± √(s² + 4(r − p)))      exist for r > p − s²/4
//! ```
//!
//! `P1` is the `+` root. In the rotated frame the same points sit at `(x, 0)`;
//! in the unfolded system they are `(±√μ, 0)` for `μ > 0`.
//!
//! Eigenvalues come from the characteristic polynomial in closed form. For
//! 3×3 matrices the cubic is solved by the trigonometric method when it has
//! three real roots and by Cardano's formula otherwise; the real root is
//! polished by Newton steps and the other two follow from deflation.

mod hopf;
mod regions;

pub use hopf::{
    bt_points, codim1_loci, hopf_analysis, hopf_frequency, hopf_polylines, BtPoint, Criticality, HopfReport,
};
pub use regions::{
    node_spiral_curves, region_classify, region_classify_exact, Region3Thresholds, RegionLabel,
    Variant,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{AsymParams, ModelSpec, MsParams, UnfoldParams};

/// `|Re λ|` below this makes an equilibrium nonhyperbolic.
pub const NONHYPERBOLIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    P0,
    P1,
    P2,
}

impl std::fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquilibriumLabel::P0 => "P0",
            EquilibriumLabel::P1 => "P1",
            EquilibriumLabel::P2 => "P2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Saddle,
    Nonhyperbolic,
}

impl Kind {
    pub fn is_stable(self) -> bool {
        matches!(self, Kind::StableNode | Kind::StableSpiral)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub label: EquilibriumLabel,
    pub location: Vec<f64>,
    pub jacobian: Vec<Vec<f64>>,
    pub eigenvalues: Vec<Complex64>,
    pub kind: Kind,
    /// Set when this point coincides with another equilibrium.
    pub degenerate: bool,
}

/// Roots of `x² + sx − (r − p)`, `P1` first. Empty below the shifted diagonal.
pub fn nontrivial_roots(p: f64, r: f64, s: f64) -> Vec<f64> {
    let disc = s * s + 4.0 * (r - p);
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // the root of smaller magnitude is computed without cancellation
    let big = -0.5 * (s + sq);
    let small = if big != 0.0 { -(r - p) / big } else { 0.0 };
    vec![small, big]
}

pub fn ms_jacobian(m: &MsParams, x: &[f64; 3]) -> [[f64; 3]; 3] {
    let (y, z) = (x[1], x[2]);
    [
        [-1.0, -1.0, 0.0],
        [0.0, m.r - z * z, -m.p + 2.0 * m.s * z - 2.0 * y * z],
        [-m.q, 0.0, -m.q],
    ]
}

/// Jacobian of the asymmetric model (the symmetric one at `s = 0`).
pub fn asym_jacobian(m: &AsymParams, x: &[f64; 2]) -> [[f64; 2]; 2] {
    let (u, y) = (x[0], x[1]);
    [
        [-1.0, -1.0],
        [m.p + 2.0 * m.s * u - 2.0 * u * y, m.r - u * u],
    ]
}

pub fn rotated_jacobian(m: &AsymParams, x: &[f64; 2]) -> [[f64; 2]; 2] {
    let (u, y) = (x[0], x[1]);
    [
        [0.0, 1.0],
        [
            (m.r - m.p) - 2.0 * (m.s + y) * u - 3.0 * u * u,
            (m.r - 1.0) - u * u,
        ],
    ]
}

pub fn unfolded_jacobian(m: &UnfoldParams, x: &[f64; 2]) -> [[f64; 2]; 2] {
    let (u, v) = (x[0], x[1]);
    [
        [0.0, 1.0],
        [
            m.mu - 3.0 * u * u - 2.0 * m.eta * u * v,
            m.eta * (m.lambda - u * u),
        ],
    ]
}

pub fn hamiltonian_jacobian(mu: f64, x: &[f64; 2]) -> [[f64; 2]; 2] {
    [[0.0, 1.0], [mu - 3.0 * x[0] * x[0], 0.0]]
}

/// Analytic Jacobian of any variant at `location`.
pub fn jacobian(model: &ModelSpec, location: &[f64]) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    if location.len() != model.dim() {
        return Err(crate::error::Error::InvalidParams(format!(
            "location has {} components, model needs {}",
            location.len(),
            model.dim()
        )));
    }
    let two = |j: [[f64; 2]; 2]| j.iter().map(|r| r.to_vec()).collect();
    let x2 = || [location[0], location[1]];
    Ok(match model {
        ModelSpec::Ms(m) => ms_jacobian(m, &[location[0], location[1], location[2]])
            .iter()
            .map(|r| r.to_vec())
            .collect(),
        ModelSpec::Sym(m) => two(asym_jacobian(&(*m).into(), &x2())),
        ModelSpec::Asym(m) => two(asym_jacobian(m, &x2())),
        ModelSpec::Rotated(m) => two(rotated_jacobian(m, &x2())),
        ModelSpec::Unfolded(m) => two(unfolded_jacobian(m, &x2())),
        ModelSpec::Hamiltonian { mu } => two(hamiltonian_jacobian(*mu, &x2())),
    })
}

/// Eigenvalues of a 2×2 matrix, larger real part first.
pub fn eigenvalues_2x2(j: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    quadratic_roots(-tr, det)
}

/// Roots of `λ² + bλ + c`.
fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        let (r1, r2) = if q == 0.0 {
            (0.5 * sq, -0.5 * sq)
        } else {
            (q, c / q)
        };
        let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Coefficients `(a, b, c)` of `λ³ + aλ² + bλ + c = det(λI − J)`.
pub fn char_poly_3x3(j: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let tr = j[0][0] + j[1][1] + j[2][2];
    let minors = j[0][0] * j[1][1] - j[0][1] * j[1][0] + j[0][0] * j[2][2] - j[0][2] * j[2][0]
        + j[1][1] * j[2][2]
        - j[1][2] * j[2][1];
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    (-tr, minors, -det)
}

/// Eigenvalues of a 3×3 matrix, sorted by decreasing real part.
pub fn eigenvalues_3x3(j: &[[f64; 3]; 3]) -> [Complex64; 3] {
    let (a, b, c) = char_poly_3x3(j);
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    // depressed cubic t³ + pt + q with λ = t − a/3
    let shift = a / 3.0;
    let pp = b - a * a / 3.0;
    let qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (qq / 2.0).powi(2) + (pp / 3.0).powi(3);
    let mut root = if disc < 0.0 {
        // three real roots; take the largest (k = 0 branch)
        let m = 2.0 * (-pp / 3.0).sqrt();
        let arg = (3.0 * qq / (pp * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos() - shift
    } else {
        let sq = disc.sqrt();
        (-qq / 2.0 + sq).cbrt() + (-qq / 2.0 - sq).cbrt() - shift
    };
    for _ in 0..4 {
        let d = dp(root);
        if d == 0.0 {
            break;
        }
        let next = root - p(root) / d;
        if !next.is_finite() {
            break;
        }
        root = next;
    }
    // (λ − root)(λ² + (a + root)λ + (b + root(a + root)))
    let b2 = a + root;
    let c2 = b + root * b2;
    let [z1, z2] = quadratic_roots(b2, c2);
    let mut all = [Complex64::new(root, 0.0), z1, z2];
    all.sort_by(|u, v| v.re.partial_cmp(&u.re).unwrap_or(std::cmp::Ordering::Equal));
    all
}

/// Stability kind from eigenvalues.
pub fn classify_eigenvalues(eigs: &[Complex64]) -> Kind {
    if eigs.iter().any(|e| e.re.abs() < NONHYPERBOLIC_TOL) {
        return Kind::Nonhyperbolic;
    }
    let neg = eigs.iter().filter(|e| e.re < 0.0).count();
    let complex = eigs.iter().any(|e| e.im != 0.0);
    if neg == eigs.len() {
        if complex {
            Kind::StableSpiral
        } else {
            Kind::StableNode
        }
    } else if neg == 0 {
        if complex {
            Kind::UnstableSpiral
        } else {
            Kind::UnstableNode
        }
    } else {
        Kind::Saddle
    }
}

/// Eigenvalues and kind of a 2×2 or 3×3 Jacobian.
pub fn classify_stability(jacobian: &[Vec<f64>]) -> (Vec<Complex64>, Kind) {
    let eigs: Vec<Complex64> = match jacobian.len() {
        2 => eigenvalues_2x2(&[
            [jacobian[0][0], jacobian[0][1]],
            [jacobian[1][0], jacobian[1][1]],
        ])
        .to_vec(),
        3 => {
            let mut j = [[0.0; 3]; 3];
            for (i, row) in jacobian.iter().enumerate() {
                j[i].copy_from_slice(&row[..3]);
            }
            eigenvalues_3x3(&j).to_vec()
        }
        n => panic!("classify_stability supports 2x2 and 3x3, got {n}x{n}"),
    };
    let kind = classify_eigenvalues(&eigs);
    (eigs, kind)
}

fn report(model: &ModelSpec, label: EquilibriumLabel, location: Vec<f64>, degenerate: bool) -> Result<EquilibriumReport> {
    let jac = jacobian(model, &location)?;
    let (eigenvalues, kind) = classify_stability(&jac);
    Ok(EquilibriumReport {
        label,
        location,
        jacobian: jac,
        eigenvalues,
        kind,
        degenerate,
    })
}

/// All equilibria of a model, `P0` first.
///
/// The Hamiltonian and unfolded systems label `(√μ, 0)` as `P1` and
/// `(−√μ, 0)` as `P2`.
pub fn find_equilibria(model: &ModelSpec) -> Result<Vec<EquilibriumReport>> {
    model.validate()?;
    let dim = model.dim();
    let mut out = vec![report(model, EquilibriumLabel::P0, vec![0.0; dim], false)?];
    let branch = match model {
        ModelSpec::Ms(m) => Some((m.p, m.r, m.s)),
        ModelSpec::Sym(m) => Some((m.p, m.r, 0.0)),
        ModelSpec::Asym(m) | ModelSpec::Rotated(m) => Some((m.p, m.r, m.s)),
        _ => None,
    };
    if let Some((p, r, s)) = branch {
        let roots = nontrivial_roots(p, r, s);
        let double = roots.len() == 2 && roots[0] == roots[1];
        for (x, label) in roots.into_iter().zip([EquilibriumLabel::P1, EquilibriumLabel::P2]) {
            let loc = match model {
                ModelSpec::Ms(_) => vec![x, -x, -x],
                ModelSpec::Rotated(_) => vec![x, 0.0],
                _ => vec![x, -x],
            };
            out.push(report(model, label, loc, double || x == 0.0)?);
        }
        if out.iter().skip(1).any(|e| e.location[0] == 0.0) {
            out[0].degenerate = true;
        }
    } else {
        let mu = match model {
            ModelSpec::Unfolded(m) => m.mu,
            ModelSpec::Hamiltonian { mu } => *mu,
            _ => unreachable!(),
        };
        if mu > 0.0 {
            let u = mu.sqrt();
            out.push(report(model, EquilibriumLabel::P1, vec![u, 0.0], false)?);
            out.push(report(model, EquilibriumLabel::P2, vec![-u, 0.0], false)?);
        } else if mu == 0.0 {
            out[0].degenerate = true;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SymParams;

    fn sym(p: f64, r: f64) -> ModelSpec {
        ModelSpec::Sym(SymParams::new(p, r).unwrap())
    }

    fn asym(p: f64, r: f64, s: f64) -> ModelSpec {
        ModelSpec::Asym(AsymParams::new(p, r, s).unwrap())
    }

    #[test]
    fn symmetric_equilibria() {
        assert_eq!(find_equilibria(&sym(1.5, 0.5)).unwrap().len(), 1);
        let eq = find_equilibria(&sym(0.5, 1.5)).unwrap();
        assert_eq!(eq.len(), 3);
        assert!((eq[1].location[0] - 1.0).abs() < 1e-15 && (eq[1].location[1] + 1.0).abs() < 1e-15);
        assert!((eq[2].location[0] + 1.0).abs() < 1e-15 && (eq[2].location[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_collision_at_unit_point() {
        let eq = find_equilibria(&asym(1.0, 1.0, 0.8)).unwrap();
        assert_eq!(eq.len(), 3);
        assert_eq!(eq[1].location[0], 0.0);
        assert!((eq[2].location[0] + 0.8).abs() < 1e-15);
        assert!(eq[0].degenerate && eq[1].degenerate);
    }

    #[test]
    fn asym_jacobian_at_equilibrium() {
        let m = AsymParams::new(1.55, 2.0, 0.8).unwrap();
        let x = nontrivial_roots(m.p, m.r, m.s)[1];
        let j = asym_jacobian(&m, &[x, -x]);
        assert!((j[1][0] - (m.p + 2.0 * m.s * x + 2.0 * x * x)).abs() < 1e-14);
        assert!((j[1][1] - (m.r - x * x)).abs() < 1e-14);
    }

    #[test]
    fn rotated_double_zero_at_unit_point() {
        for s in [0.0, 0.3, 0.8, 2.0] {
            let j = rotated_jacobian(&AsymParams { p: 1.0, r: 1.0, s }, &[0.0, 0.0]);
            assert_eq!(j, [[0.0, 1.0], [0.0, 0.0]]);
        }
    }

    #[test]
    fn stability_examples() {
        let eq = find_equilibria(&sym(0.5, 0.25)).unwrap();
        assert!(eq[0].kind.is_stable());
        let eq = find_equilibria(&sym(0.5, 0.8)).unwrap();
        assert!(eq[1].kind.is_stable() && eq[2].kind.is_stable());
        assert_eq!(eq[0].kind, Kind::Saddle);
        let eq = find_equilibria(&asym(1.55, 3.0, 0.8)).unwrap();
        assert!(eq[2].kind.is_stable());
        assert!(!eq[0].kind.is_stable() && !eq[1].kind.is_stable());
    }

    #[test]
    fn cubic_eigenvalues_satisfy_characteristic_polynomial() {
        let mats = [
            [[1.0, 2.0, 0.0], [0.0, 3.0, 1.0], [0.5, 0.0, -2.0]],
            [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -3.0]],
            [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]],
            [[-1.0, -1.0, 0.0], [0.0, 0.8, -1.0], [-1.2, 0.0, -1.2]],
        ];
        for j in mats {
            let (a, b, c) = char_poly_3x3(&j);
            for e in eigenvalues_3x3(&j) {
                let v = ((e + a) * e + b) * e + c;
                assert!(v.norm() < 1e-10, "{j:?} {e} residual {}", v.norm());
            }
        }
    }

    #[test]
    fn ms_equilibria_zero_the_field() {
        let m = MsParams::new(1.0, 1.2, 1.4, 0.8).unwrap();
        let spec = ModelSpec::Ms(m);
        let eq = find_equilibria(&spec).unwrap();
        assert_eq!(eq.len(), 3);
        for e in &eq {
            let f = spec.eval(&e.location).unwrap();
            assert!(f.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn jacobians_match_central_differences() {
        let models = [
            sym(0.7, 1.3),
            asym(1.55, 2.0, 0.8),
            ModelSpec::Rotated(AsymParams::new(1.2, 1.7, 0.5).unwrap()),
            ModelSpec::Unfolded(UnfoldParams::new(0.9, 1.0, 0.1).unwrap()),
            ModelSpec::Hamiltonian { mu: -1.0 },
            ModelSpec::Ms(MsParams::new(1.0, 1.2, 0.8, 0.8).unwrap()),
        ];
        let h = 1e-5;
        for m in models {
            let x: Vec<f64> = (0..m.dim()).map(|i| 0.3 - 0.45 * i as f64).collect();
            let j = jacobian(&m, &x).unwrap();
            for k in 0..m.dim() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fp = m.eval(&xp).unwrap();
                let fm = m.eval(&xm).unwrap();
                for i in 0..m.dim() {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    assert!((fd - j[i][k]).abs() < 1e-6, "{m:?} ({i},{k})");
                }
            }
        }
    }
}
