//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use common::*;
use msclimate::bifurcation::{sweep_xbar, Axis, SweepModel, XbarClass};
use msclimate::equilibria::{bt_points, region_classify_exact, EquilibriumLabel, RegionLabel, Region3Thresholds, Variant};
use msclimate::integrate::*;
use msclimate::melnikov::*;
use msclimate::models::*;

// Tolerances and limits.
const C1_PERIOD: (f64, f64) = (10.0, 1.5);
const C1_TIME: Duration = Duration::from_secs(5);
const C2_TOL: f64 = 1e-8;
const C3_X: (f64, f64) = (1.466, 1.476);
const C3_LAMBDA: (f64, f64) = (0.750, 0.754);
const C3_HOM_TOL: f64 = 1e-12;
const C3_FOLD: (f64, f64) = (-3.03, 0.03);
const C4_NEAR_ONE: f64 = 5e-3;
const C4_LOOP: f64 = 1e-6;
const C4_GROWTH: f64 = 0.05;
const C5_TOL: f64 = 1e-12;
const C6_POINTS: usize = 10_000;
const C7_TIME: Duration = Duration::from_secs(60);
const C9_EXCEPTIONS: f64 = 0.01;
const C9_TIME: Duration = Duration::from_secs(300);
const C9_TUBE: f64 = 0.026;
const C10_RATIO: (f64, f64) = (16.0, 3.0);
const C10_DRIFT: f64 = 1e-8;
const C10_AGREE: f64 = 1e-6;

type Check = Result<String, String>;

fn ok_if(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_ms_cycle() -> Check {
    let t = Instant::now();
    let m = MsParams::new(1.0, 1.2, 0.8, 0.8).unwrap();
    let c = estimate_cycle(&m, &[0.3, -0.1, 0.2], Direction::Forward, &CycleConfig::default()).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    ok_if(
        c.stability == CycleStability::Stable && (c.period - C1_PERIOD.0).abs() <= C1_PERIOD.1 && dt < C1_TIME,
        format!("period {:.4} ({:.1} kyr), {:?}, {:.2?}", c.period, c.period * KYR_PER_TIME_UNIT, c.stability, dt),
    )
}

fn c2_homoclinic_constants() -> Check {
    let o = HamiltonianOrbit::new(1.0, SQRT_2).map_err(|e| e.to_string())?;
    let i0 = orbit_quadrature(&o, 0).map_err(|e| e.to_string())?;
    let i2 = orbit_quadrature(&o, 2).map_err(|e| e.to_string())?;
    // bisection for the zero of M(·, √2)
    let (mut a, mut b) = (0.0, 2.0);
    let m = |l: f64| melnikov(l, SQRT_2, 1).unwrap();
    for _ in 0..100 {
        let c = 0.5 * (a + b);
        if m(a).signum() == m(c).signum() {
            a = c;
        } else {
            b = c;
        }
    }
    let zero = 0.5 * (a + b);
    ok_if(
        (i0 - 4.0 / 3.0).abs() < C2_TOL && (i2 - 16.0 / 15.0).abs() < C2_TOL && (zero - 0.8).abs() < C2_TOL,
        format!("I0 {i0:.12}, I2 {i2:.12}, zero at {zero:.12}"),
    )
}

fn c3_fold_constants() -> Check {
    let (x, l) = find_fold().map_err(|e| e.to_string())?;
    let k_hom = pencil_slope(0.8, 1.0);
    let k_fold = pencil_slope(l, 1.0);
    ok_if(
        (C3_X.0..=C3_X.1).contains(&x)
            && (C3_LAMBDA.0..=C3_LAMBDA.1).contains(&l)
            && (k_hom + 4.0).abs() < C3_HOM_TOL
            && (k_fold - C3_FOLD.0).abs() <= C3_FOLD.1,
        format!("x* {x:.5}, λ* {l:.5}, slopes {k_hom:.12} / {k_fold:.4}"),
    )
}

fn c4_r_curve() -> Check {
    let r = |x: f64| r_of_x(x, 1).unwrap();
    let near = r(1.001);
    let xs: Vec<f64> = (0..60).map(|i| 1.001 + (SQRT_2 - 1.002) * i as f64 / 59.0).collect();
    let dec = xs.windows(2).all(|w| r(w[1]) < r(w[0]));
    let at_loop = r(SQRT_2);
    let (x_star, _) = find_fold().map_err(|e| e.to_string())?;
    let inc = (0..60).map(|i| x_star + 1e-3 + 0.15 * i as f64).collect::<Vec<_>>().windows(2).all(|w| r(w[1]) > r(w[0]));
    let ratios: Vec<f64> = (10..=30).map(|x| r(x as f64) / (x as f64).powi(2)).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    ok_if(
        (near - 1.0).abs() <= C4_NEAR_ONE && dec && (at_loop - 0.8).abs() <= C4_LOOP && inc && hi / lo - 1.0 <= C4_GROWTH,
        format!("R(1.001) {near:.6}, decreasing {dec}, R(√2) {at_loop:.10}, increasing {inc}, R/x² in [{lo:.5}, {hi:.5}]"),
    )
}

fn c5_bt_points() -> Check {
    let pts = bt_points(Variant::Asym, 0.8);
    let q2 = pts.iter().find(|b| b.name == "Q2").ok_or("no Q2")?;
    let at = (q2.p - 1.32).abs() < 1e-12 && (q2.r - 1.16).abs() < 1e-12;
    let worst = pts.iter().map(|b| b.trace.abs().max(b.det.abs())).fold(0.0, f64::max);
    ok_if(
        pts.len() == 2 && at && worst < C5_TOL,
        format!("Q1 ({}, {}), Q2 ({:.4}, {:.4}), max |tr|,|det| {worst:.1e}", pts[0].p, pts[0].r, q2.p, q2.r),
    )
}

fn c6_atlas() -> Check {
    let (ns, ms) = atlas(Variant::Sym, 61);
    let (na, ma) = atlas(Variant::Asym, 62);
    ok_if(
        ms == 0 && ma == 0 && ns + na > 2 * C6_POINTS * 99 / 100,
        format!("sym {ms} mismatches in {ns}, asym {ma} in {na} (of {C6_POINTS} each)"),
    )
}

fn c7_unfolded_census() -> Check {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut all = true;
    for lambda in [1.2, 0.9, 0.78, 0.7] {
        let pred = cycle_census_unfolded(lambda, 1).map_err(|e| e.to_string())?;
        let m = ModelSpec::Unfolded(UnfoldParams::new(lambda, 1.0, 0.01).unwrap());
        let s = census_attractors(&m, &CensusConfig::default()).map_err(|e| e.to_string())?;
        use CycleStability::*;
        let got = (s.count(Stable, true), s.count(Unstable, true), s.count(Stable, false), s.count(Unstable, false));
        let want = (pred.stable_outer, pred.unstable_outer, pred.stable_inner, pred.unstable_inner);
        all &= got == want;
        lines.push(format!("λ={lambda}: {got:?}/{want:?}"));
    }
    let dt = t.elapsed();
    ok_if(all && dt < C7_TIME, format!("{} in {dt:.2?}", lines.join(", ")))
}

fn c8_phase_portraits() -> Check {
    use CycleStability::*;
    use EquilibriumLabel::*;
    type Frame = (f64, &'static [EquilibriumLabel], &'static [(CycleStability, &'static [EquilibriumLabel])]);
    let all: &[EquilibriumLabel] = &[P0, P1, P2];
    let frames: [Frame; 6] = [
        (1.2, &[], &[(Stable, &[P0])]),
        (1.45, &[], &[(Stable, &[P0, P1, P2])]),
        (1.6, &[P2], &[(Stable, &[P0, P1, P2]), (Unstable, &[P2])]),
        (2.0, &[P2], &[(Stable, &[P0, P1, P2])]),
        (2.5, &[P2], &[(Stable, &[P0, P1, P2]), (Unstable, &[P0, P1, P2])]),
        (3.0, &[P2], &[]),
    ];
    let mut bad = Vec::new();
    for (r, attractors, cycles) in frames {
        let m = ModelSpec::Asym(AsymParams::new(1.55, r, 0.8).unwrap());
        let s = census_attractors(&m, &CensusConfig::default()).map_err(|e| e.to_string())?;
        let mut got: Vec<(CycleStability, Vec<EquilibriumLabel>)> =
            s.cycles.iter().map(|c| (c.stability, c.encloses.clone())).collect();
        let mut want: Vec<(CycleStability, Vec<EquilibriumLabel>)> = cycles.iter().map(|(a, b)| (*a, b.to_vec())).collect();
        got.sort_by_key(|c| format!("{c:?}"));
        want.sort_by_key(|c| format!("{c:?}"));
        let exist_ok = r < 1.3 || s.equilibria.len() == all.len();
        if s.attractors() != attractors || got != want || !exist_ok {
            bad.push(format!("r={r}: attractors {:?} cycles {got:?}", s.attractors()));
        }
    }
    ok_if(bad.is_empty(), if bad.is_empty() { "six frames match".into() } else { bad.join("; ") })
}

fn c9_sweep() -> Check {
    let t = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let axis = Axis::new(0.0, 3.0, 60).unwrap();
    let grid = pool
        .install(|| sweep_xbar(SweepModel::Sym, axis, axis, 0, &XbarConfig::default()))
        .map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    let th = Region3Thresholds {
        homoclinic: HOMOCLINIC_THRESHOLD,
        fold: find_fold().map_err(|e| e.to_string())?.1,
    };
    let (mut counted, mut exceptions) = (0usize, 0usize);
    for j in 0..60 {
        for i in 0..60 {
            let (p, r) = grid.p_r(i, j);
            if (r - p).abs() < C9_TUBE || (r - 1.0).abs() < C9_TUBE || (p - 1.0).abs() < C9_TUBE {
                continue;
            }
            let label = region_classify_exact(&AsymParams::new(p, r, 0.0).unwrap(), Variant::Sym, Some(&th));
            let want = match label {
                RegionLabel::O => XbarClass::Trivial,
                RegionLabel::I | RegionLabel::II => XbarClass::Cycle,
                RegionLabel::IIIc => XbarClass::Equilibrium,
                _ => continue,
            };
            counted += 1;
            if grid.classify(i, j).map_err(|e| e.to_string())? != want {
                exceptions += 1;
            }
        }
    }
    let frac = exceptions as f64 / counted.max(1) as f64;
    ok_if(
        frac <= C9_EXCEPTIONS && dt < C9_TIME,
        format!("{exceptions} exceptions in {counted} interior cells, {} unsettled cells, {dt:.2?} on one thread", grid.warnings()),
    )
}

fn c10_hygiene() -> Check {
    let errs = rk4_errors(0.05, 4);
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let order_ok = ratios.iter().all(|r| (r - C10_RATIO.0).abs() <= C10_RATIO.1);
    let drift = [(1.0, [2.0, 0.0]), (1.0, [1.2, 0.0]), (-1.0, [0.5, 0.3])]
        .iter()
        .map(|(mu, x0)| hamiltonian_drift(*mu, *x0, 200.0))
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (mu, x) in quadrature_orbits() {
        let o = HamiltonianOrbit::new(mu, x).map_err(|e| e.to_string())?;
        let period = orbit_period(&o).map_err(|e| e.to_string())?;
        let (j0, j2, _) = time_domain_moments(mu, x, period);
        let i0 = orbit_quadrature(&o, 0).map_err(|e| e.to_string())?;
        let i2 = orbit_quadrature(&o, 2).map_err(|e| e.to_string())?;
        worst = worst.max(((i0 - j0) / j0).abs()).max(((i2 - j2) / j2).abs());
    }
    ok_if(
        order_ok && drift <= C10_DRIFT && worst <= C10_AGREE,
        format!("RK4 ratios {ratios:.2?}, drift {drift:.1e}, worst relative quadrature gap {worst:.1e} on 20 orbits"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 ms limit cycle", c1_ms_cycle),
        ("2 homoclinic Melnikov constants", c2_homoclinic_constants),
        ("3 cycle-fold constants and tangent slopes", c3_fold_constants),
        ("4 R-curve shape", c4_r_curve),
        ("5 organizing centers", c5_bt_points),
        ("6 region/stability atlas", c6_atlas),
        ("7 unfolded census vs Melnikov", c7_unfolded_census),
        ("8 asymmetric phase portraits", c8_phase_portraits),
        ("9 symmetric sweep partition", c9_sweep),
        ("10 numerical hygiene", c10_hygiene),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
