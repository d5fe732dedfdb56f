//! Level curves of `H = v²/2 − μu²/2 + u⁴/4` and the Melnikov analysis of
//! the unfolded system `u' = v, v' = μu − u³ + η(λ − u²)v`.
//!
//! A closed level curve is labelled by its largest `u`, the turning point
//! `x`; its level is `h = H(x, 0)` ([`HamiltonianOrbit::level`]). On it,
//!
//! ```text
//! 2(h − U(u)) = ½ (x² − u²)(u² − β),   β = 2μ − x²,
//! ```
//!
//! so the orbit spans `u ∈ [√β, x]` when `β > 0` (inner orbits around
//! `(±1, 0)` for `μ = 1`, `1 < x < √2`) and `u ∈ [−x, x]` otherwise (outer
//! orbits `x > √2`, and every orbit for `μ = −1`). `x = √2` is the right
//! lobe of the figure-eight homoclinic loop.
//!
//! The contour integrals
//!
//! ```text
//! I_k(x) = ∮ u^k v du = 2 ∫_a^x u^k √(2(h − U(u))) du     (clockwise)
//! ```
//!
//! are evaluated after `u = m + w sin θ` (`m`, `w` the midpoint and half
//! width of `[a, x]`). The factor `(x − u)(u − a)` becomes `w² cos² θ`, which
//! cancels the square-root endpoint behaviour exactly, and the remaining
//! integrand is smooth in `θ`. Outer orbits get a breakpoint at `u = 0`,
//! where the integrand develops a corner as `x → √2`. The derivative
//! integrals `dI_k/dh = 2 ∫ u^k / √(2(h − U)) du` transform the same way;
//! with `dh/dx = x³ − μx` they give `R'(x)`.
//!
//! The Melnikov function of the orbit through `x` is `M(λ, x) = λI₀ − I₂`,
//! so perturbed cycles persist where `λ = R(x) = I₂(x)/I₀(x)`. A cycle is
//! stable where `R' > 0`.
//!
//! General `μ ≠ 0` reduces to `μ = ±1`: with `u = √|μ| ū`, `v = |μ| v̄` one
//! has `H = μ² H̄`, hence `I_k(x; μ) = |μ|^((k+3)/2) I_k(x/√|μ|; ±1)` and
//! `R(x; μ) = |μ| R(x/√|μ|; ±1)`.

mod quad;

pub use quad::{gk15, integrate as adaptive_quadrature, Quadrature};

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `R` at the homoclinic loop.
pub const HOMOCLINIC_THRESHOLD: f64 = 0.8;

/// Distance of `x` from `√2` within which the orbit is the homoclinic loop.
pub const HOMOCLINIC_SNAP: f64 = 1e-14;

const REL_TOL: f64 = 1e-13;
const ABS_TOL: f64 = 1e-15;
const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    Inner,
    Homoclinic,
    Outer,
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianOrbit {
    pub mu: f64,
    /// Turning point: the largest `u` on the orbit.
    pub x: f64,
    pub kind: OrbitKind,
    pub level: f64,
}

/// `H(x, 0)`, the level of the orbit with turning point `x`.
pub fn level_of(mu: f64, x: f64) -> f64 {
    -0.5 * mu * x * x + 0.25 * x.powi(4)
}

impl HamiltonianOrbit {
    pub fn new(mu: f64, x: f64) -> Result<Self> {
        if !(mu.is_finite() && mu != 0.0) {
            return Err(Error::InvalidParams("mu must be finite and nonzero".into()));
        }
        let xb = x / mu.abs().sqrt();
        let kind = if mu > 0.0 {
            if !(xb > 1.0) || !xb.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "turning point must exceed √μ for μ > 0, got x = {x}"
                )));
            }
            if (xb - SQRT_2).abs() <= HOMOCLINIC_SNAP {
                OrbitKind::Homoclinic
            } else if xb < SQRT_2 {
                OrbitKind::Inner
            } else {
                OrbitKind::Outer
            }
        } else {
            if !(xb > 0.0) || !xb.is_finite() {
                return Err(Error::InvalidParams(format!("turning point must be positive, got x = {x}")));
            }
            OrbitKind::Simple
        };
        Ok(Self {
            mu,
            x,
            kind,
            level: level_of(mu, x),
        })
    }

    fn canonical(&self) -> (f64, f64, f64) {
        let scale = self.mu.abs();
        (self.mu.signum(), self.x / scale.sqrt(), scale)
    }

    /// Smallest `u` on the orbit.
    pub fn left_turning_point(&self) -> f64 {
        match self.kind {
            OrbitKind::Inner => (2.0 * self.mu - self.x * self.x).sqrt(),
            OrbitKind::Homoclinic => 0.0,
            OrbitKind::Outer | OrbitKind::Simple => -self.x,
        }
    }

    /// Area enclosed by the orbit, which equals `I₀`.
    pub fn enclosed_area(&self) -> Result<f64> {
        orbit_quadrature(self, 0)
    }
}

/// Both integrands in `θ` for the canonical orbit `(sign, x)`.
fn integral(sign: f64, x: f64, kind: OrbitKind, k: i32, derivative: bool) -> Result<f64> {
    let beta = 2.0 * sign - x * x;
    let (a, inner) = match kind {
        OrbitKind::Inner => (beta.sqrt(), true),
        OrbitKind::Homoclinic => (0.0, true),
        OrbitKind::Outer | OrbitKind::Simple => (-x, false),
    };
    let m = 0.5 * (x + a);
    let w = 0.5 * (x - a);
    // smooth remainder g(u) with 2(h − U) = (x − u)(u − a)·g(u)
    let g = move |u: f64| -> f64 {
        if inner {
            0.5 * (x + u) * (u + a)
        } else {
            0.5 * (u * u - beta)
        }
    };
    let f = move |th: f64| -> f64 {
        let u = m + w * th.sin();
        let uk = if k == 0 { 1.0 } else { u.powi(k) };
        let gu = g(u).max(0.0);
        if derivative {
            uk / gu.sqrt()
        } else {
            let c = th.cos();
            uk * w * w * c * c * gu.sqrt()
        }
    };
    let breaks: Vec<f64> = if inner {
        vec![-FRAC_PI_2, FRAC_PI_2]
    } else {
        vec![-FRAC_PI_2, 0.0, FRAC_PI_2]
    };
    let q = quad::integrate(f, &breaks, ABS_TOL, REL_TOL, MAX_INTERVALS)?;
    Ok(2.0 * q.value)
}

/// `I_k = ∮ u^k v du` over the clockwise orbit.
pub fn orbit_quadrature(orbit: &HamiltonianOrbit, moment: u32) -> Result<f64> {
    let (sign, xb, scale) = orbit.canonical();
    let k = moment as i32;
    let v = integral(sign, xb, orbit.kind, k, false)?;
    Ok(scale.powf((k as f64 + 3.0) / 2.0) * v)
}

/// `dI_k/dh` at fixed `μ`. Diverges on the homoclinic loop.
pub fn orbit_quadrature_dh(orbit: &HamiltonianOrbit, moment: u32) -> Result<f64> {
    if orbit.kind == OrbitKind::Homoclinic {
        return Err(Error::QuadratureNotConverged { estimate: f64::INFINITY });
    }
    let (sign, xb, scale) = orbit.canonical();
    let k = moment as i32;
    let v = integral(sign, xb, orbit.kind, k, true)?;
    // I_k scales as |μ|^((k+3)/2) and h as μ²
    Ok(scale.powf((k as f64 - 1.0) / 2.0) * v)
}

/// Period of the orbit, `dI₀/dh`.
pub fn orbit_period(orbit: &HamiltonianOrbit) -> Result<f64> {
    orbit_quadrature_dh(orbit, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelnikovSample {
    pub x: f64,
    pub i0: f64,
    pub i2: f64,
    pub r: f64,
    /// `R'(x)`; absent on the homoclinic loop.
    pub dr: Option<f64>,
}

fn canonical_orbit(x: f64, mu_sign: i32) -> Result<HamiltonianOrbit> {
    match mu_sign {
        1 => HamiltonianOrbit::new(1.0, x),
        -1 => HamiltonianOrbit::new(-1.0, x),
        _ => Err(Error::InvalidParams("mu_sign must be +1 or -1".into())),
    }
}

/// `I₀`, `I₂`, `R` and `R'` at turning point `x` for `μ = mu_sign`.
pub fn melnikov_sample(x: f64, mu_sign: i32) -> Result<MelnikovSample> {
    let orbit = canonical_orbit(x, mu_sign)?;
    let i0 = orbit_quadrature(&orbit, 0)?;
    let i2 = orbit_quadrature(&orbit, 2)?;
    let r = i2 / i0;
    let dr = if orbit.kind == OrbitKind::Homoclinic {
        None
    } else {
        let dhdx = x * x * x - orbit.mu * x;
        let d0 = orbit_quadrature_dh(&orbit, 0)? * dhdx;
        let d2 = orbit_quadrature_dh(&orbit, 2)? * dhdx;
        Some((d2 * i0 - i2 * d0) / (i0 * i0))
    };
    Ok(MelnikovSample { x, i0, i2, r, dr })
}

/// `R(x) = I₂/I₀`.
pub fn r_of_x(x: f64, mu_sign: i32) -> Result<f64> {
    let orbit = canonical_orbit(x, mu_sign)?;
    Ok(orbit_quadrature(&orbit, 2)? / orbit_quadrature(&orbit, 0)?)
}

/// `M(λ, x) = λI₀(x) − I₂(x)`.
pub fn melnikov(lambda: f64, x: f64, mu_sign: i32) -> Result<f64> {
    let orbit = canonical_orbit(x, mu_sign)?;
    Ok(lambda * orbit_quadrature(&orbit, 0)? - orbit_quadrature(&orbit, 2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decreasing,
    Increasing,
}

/// A maximal run of samples on which `R` is monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneRun {
    pub x_start: f64,
    pub x_end: f64,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RCurve {
    pub mu_sign: i32,
    pub samples: Vec<MelnikovSample>,
    pub runs: Vec<MonotoneRun>,
}

/// Header comment of the R-curve CSV schema.
pub const RCURVE_CSV_HEADER: &str = "# msclimate rcurve v1";

impl RCurve {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{RCURVE_CSV_HEADER}\n# mu_sign={}\nx,I0,I2,R\n", self.mu_sign);
        for s in &self.samples {
            out.push_str(&format!("{:?},{:?},{:?},{:?}\n", s.x, s.i0, s.i2, s.r));
        }
        out
    }
}

/// Samples of `R` on `x_grid` (sorted) with its monotone runs.
pub fn r_curve(mu_sign: i32, x_grid: &[f64]) -> Result<RCurve> {
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("x grid must be strictly increasing".into()));
    }
    let samples = x_grid
        .iter()
        .map(|&x| melnikov_sample(x, mu_sign))
        .collect::<Result<Vec<_>>>()?;
    let mut runs: Vec<MonotoneRun> = Vec::new();
    for w in samples.windows(2) {
        let trend = if w[1].r < w[0].r {
            Trend::Decreasing
        } else {
            Trend::Increasing
        };
        match runs.last_mut() {
            Some(run) if run.trend == trend => run.x_end = w[1].x,
            _ => runs.push(MonotoneRun {
                x_start: w[0].x,
                x_end: w[1].x,
                trend,
            }),
        }
    }
    Ok(RCurve {
        mu_sign,
        samples,
        runs,
    })
}

/// Minimizer `x*` of `R` beyond the homoclinic loop and `λ* = R(x*)`
/// (`μ = +1`).
pub fn find_fold() -> Result<(f64, f64)> {
    let r = |x: f64| r_of_x(x, 1);
    let dr = |x: f64| -> Result<f64> {
        melnikov_sample(x, 1)?
            .dr
            .ok_or(Error::QuadratureNotConverged { estimate: f64::NAN })
    };
    // golden-section search on a bracket containing the minimum
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (SQRT_2 + 1e-3, 2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (r(c)?, r(d)?);
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = r(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = r(d)?;
        }
    }
    // polish on the sign change of R'
    let (mut lo, mut hi) = (a - 1e-6, b + 1e-6);
    if dr(lo)? < 0.0 && dr(hi)? > 0.0 {
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if dr(m)? < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, r(x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictedStability {
    Stable,
    Unstable,
}

/// A cycle predicted by a simple zero of the Melnikov function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedCycle {
    /// Turning point of the Hamiltonian orbit it bifurcates from.
    pub x: f64,
    pub kind: OrbitKind,
    pub stability: PredictedStability,
    /// 2 for inner orbits, which come as a symmetric pair.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedCensus {
    pub lambda: f64,
    pub mu_sign: i32,
    pub stable_outer: usize,
    pub unstable_outer: usize,
    pub stable_inner: usize,
    pub unstable_inner: usize,
    pub cycles: Vec<PredictedCycle>,
}

/// Distance from a threshold below which the census is not decided.
pub const THRESHOLD_GUARD: f64 = 1e-6;

fn bisect_root<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo)?;
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        let fm = f(m)?;
        if (fm < 0.0) == (flo < 0.0) {
            lo = m;
        } else {
            hi = m;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Leading-order cycle census of the unfolded system at `λ` (`μ = ±1`).
pub fn cycle_census_unfolded(lambda: f64, mu_sign: i32) -> Result<UnfoldedCensus> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParams("lambda must be finite".into()));
    }
    let mut cycles = Vec::new();
    let pred = |x: f64, kind, stability, multiplicity| PredictedCycle {
        x,
        kind,
        stability,
        multiplicity,
    };
    match mu_sign {
        1 => {
            let (x_star, lambda_star) = find_fold()?;
            for t in [HOMOCLINIC_THRESHOLD, lambda_star] {
                if (lambda - t).abs() < THRESHOLD_GUARD {
                    return Err(Error::AtThreshold { lambda, threshold: t });
                }
            }
            let m = |x: f64| Ok(r_of_x(x, 1)? - lambda);
            if lambda > HOMOCLINIC_THRESHOLD && lambda < 1.0 {
                let x = bisect_root(m, 1.0 + 1e-9, SQRT_2 - 1e-12)?;
                cycles.push(pred(x, OrbitKind::Inner, PredictedStability::Unstable, 2));
            }
            if lambda > lambda_star && lambda < HOMOCLINIC_THRESHOLD {
                let x = bisect_root(m, SQRT_2 + 1e-12, x_star)?;
                cycles.push(pred(x, OrbitKind::Outer, PredictedStability::Unstable, 1));
            }
            if lambda > lambda_star {
                let mut hi = 2.0 * x_star;
                while r_of_x(hi, 1)? < lambda {
                    hi *= 2.0;
                }
                let x = bisect_root(m, x_star, hi)?;
                cycles.push(pred(x, OrbitKind::Outer, PredictedStability::Stable, 1));
            }
        }
        -1 => {
            if lambda > 0.0 {
                let m = |x: f64| Ok(r_of_x(x, -1)? - lambda);
                let mut hi = 1.0;
                while r_of_x(hi, -1)? < lambda {
                    hi *= 2.0;
                }
                let x = bisect_root(m, 1e-9, hi)?;
                cycles.push(pred(x, OrbitKind::Simple, PredictedStability::Stable, 1));
            }
        }
        _ => return Err(Error::InvalidParams("mu_sign must be +1 or -1".into())),
    }
    let count = |outer: bool, st: PredictedStability| -> usize {
        cycles
            .iter()
            .filter(|c| (c.kind != OrbitKind::Inner) == outer && c.stability == st)
            .map(|c| c.multiplicity)
            .sum()
    };
    Ok(UnfoldedCensus {
        lambda,
        mu_sign,
        stable_outer: count(true, PredictedStability::Stable),
        unstable_outer: count(true, PredictedStability::Unstable),
        stable_inner: count(false, PredictedStability::Stable),
        unstable_inner: count(false, PredictedStability::Unstable),
        cycles,
    })
}
