//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use msclimate::equilibria::{find_equilibria, region_classify, region_classify_exact, EquilibriumLabel, RegionLabel, Variant};
use msclimate::integrate::{integrate, integrate_at, IntegratorConfig};
use msclimate::models::{hamiltonian_value, AsymParams, FnField, HamiltonianField, ModelSpec, SymParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `∮ u^k v du` for k = 0, 2 by integrating `u' = v, v' = μu − u³` together
/// with `J_k' = u^k v²` from `(x, 0)` over time `period`. Also returns the
/// distance of the end point from the start.
pub fn time_domain_moments(mu: f64, x: f64, period: f64) -> (f64, f64, f64) {
    let field = FnField(move |s: &[f64; 4]| {
        let [u, v, _, _] = *s;
        [v, mu * u - u * u * u, v * v, u * u * v * v]
    });
    let cfg = IntegratorConfig::rk45(1e-13, 1e-13, period);
    let end = integrate_at(&field, &[x, 0.0, 0.0, 0.0], &[period], &cfg).unwrap()[0];
    let closure = ((end[0] - x).powi(2) + end[1].powi(2)).sqrt();
    (end[2], end[3], closure)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Moments of the right homoclinic lobe `u = √2 sech t`, `v = −√2 sech t tanh t`.
pub fn sech_moments() -> (f64, f64) {
    let v2 = |t: f64| {
        let (s, th) = (1.0 / t.cosh(), t.tanh());
        2.0 * s * s * th * th
    };
    let i0 = simpson(v2, -40.0, 40.0, 200_000);
    let i2 = simpson(|t: f64| 2.0 / t.cosh().powi(2) * v2(t), -40.0, 40.0, 200_000);
    (i0, i2)
}

/// Shoelace area of a closed polygon.
pub fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        .abs()
}

/// Errors of classical RK4 at `t = 5` on the Hamiltonian orbit through
/// `(2, 0)` for steps `h, h/2, h/4, ...`, measured against a step of `h/256`.
pub fn rk4_errors(h: f64, levels: usize) -> Vec<f64> {
    let field = HamiltonianField { mu: 1.0 };
    let end = |step: f64| integrate(&field, &[2.0, 0.0], &IntegratorConfig::rk4(step, 5.0)).unwrap().last();
    let reference = end(h / 256.0);
    (0..levels)
        .map(|i| {
            let e = end(h / f64::from(1u32 << i));
            ((e[0] - reference[0]).powi(2) + (e[1] - reference[1]).powi(2)).sqrt()
        })
        .collect()
}

/// Largest `|H(t) − H(0)|` along an adaptive orbit of the `η = 0` system.
pub fn hamiltonian_drift(mu: f64, x0: [f64; 2], t_end: f64) -> f64 {
    let traj = integrate(&HamiltonianField { mu }, &x0, &IntegratorConfig::rk45(1e-12, 1e-12, t_end)).unwrap();
    let h0 = hamiltonian_value(&x0, mu);
    traj.states
        .iter()
        .map(|s| (hamiltonian_value(s, mu) - h0).abs())
        .fold(0.0, f64::max)
}

/// Twenty turning points: inner, outer (μ = 1) and simple (μ = −1) orbits.
pub fn quadrature_orbits() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for i in 0..7 {
        v.push((1.0, 1.02 + 0.055 * i as f64));
    }
    for i in 0..7 {
        v.push((1.0, 1.45 + 0.25 * i as f64));
    }
    for i in 0..6 {
        v.push((-1.0, 0.2 + 0.5 * i as f64));
    }
    v
}

/// Stable equilibria from closed-form traces and determinants.
/// `P1` is the larger nontrivial root of `x² + sx + p − r`, `P2` the smaller.
pub fn stable_by_formula(p: f64, r: f64, s: f64) -> Vec<EquilibriumLabel> {
    let mut out = Vec::new();
    if r < 1.0 && r < p {
        out.push(EquilibriumLabel::P0);
    }
    let disc = s * s - 4.0 * (p - r);
    if disc > 0.0 {
        for (label, x) in [
            (EquilibriumLabel::P1, 0.5 * (-s + disc.sqrt())),
            (EquilibriumLabel::P2, 0.5 * (-s - disc.sqrt())),
        ] {
            let trace = r - 1.0 - x * x;
            let det = p - r + 2.0 * s * x + 3.0 * x * x;
            if trace < 0.0 && det > 0.0 {
                out.push(label);
            }
        }
    }
    out
}

pub fn expected(label: RegionLabel) -> Vec<EquilibriumLabel> {
    use EquilibriumLabel::*;
    match label {
        RegionLabel::O | RegionLabel::Ob => vec![P0],
        RegionLabel::Oa => vec![P0, P2],
        RegionLabel::I | RegionLabel::II | RegionLabel::IIa => vec![],
        RegionLabel::III | RegionLabel::IIIa | RegionLabel::IIIb | RegionLabel::IIIc => vec![P1, P2],
        RegionLabel::IIIo => vec![P2],
    }
}

/// True when a circle of radius `tube` around the point meets another label.
pub fn in_tube(params: &AsymParams, variant: Variant, tube: f64) -> bool {
    let center = region_classify_exact(params, variant, None);
    (0..32).any(|k| {
        let a = k as f64 * std::f64::consts::PI / 16.0;
        let probe = AsymParams {
            p: params.p + tube * a.cos(),
            r: params.r + tube * a.sin(),
            s: params.s,
        };
        region_classify_exact(&probe, variant, None) != center
    })
}

/// Random atlas of `10⁴` points: `(points checked, mismatches)`.
pub fn atlas(variant: Variant, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut mismatches) = (0, 0);
    for _ in 0..10_000 {
        let p = rng.gen_range(1e-3..3.0);
        let r = rng.gen_range(1e-3..3.0);
        let s = if variant == Variant::Sym { 0.0 } else { rng.gen_range(0.0..2.0) };
        let params = AsymParams::new(p, r, s).unwrap();
        if in_tube(&params, variant, 1e-6) {
            continue;
        }
        let label = region_classify(&params, variant, None).expect("off the boundary tubes");
        let want = expected(label);
        let by_formula = stable_by_formula(p, r, s);
        let spec = if variant == Variant::Sym {
            ModelSpec::Sym(SymParams::new(p, r).unwrap())
        } else {
            ModelSpec::Asym(params)
        };
        let by_eigen: Vec<EquilibriumLabel> = find_equilibria(&spec)
            .unwrap()
            .iter()
            .filter(|e| e.kind.is_stable())
            .map(|e| e.label)
            .collect();
        checked += 1;
        if want != by_formula || want != by_eigen {
            mismatches += 1;
            eprintln!("({p}, {r}, {s}) {label}: region {want:?} formula {by_formula:?} eigen {by_eigen:?}");
        }
    }
    (checked, mismatches)
}
