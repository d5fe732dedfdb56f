use msclimate::bifurcation::*;
use msclimate::equilibria::{region_classify, RegionLabel, Region3Thresholds, Variant};
use msclimate::integrate::XbarConfig;
use msclimate::melnikov::{find_fold, HOMOCLINIC_THRESHOLD};
use msclimate::models::AsymParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Single-cell grid at exactly `(p, r)`.
fn cell(model: SweepModel, p: f64, r: f64, seed: u64) -> SweepGrid {
    let axis = |v: f64| Axis::new(v - 0.1, v, 1).unwrap();
    sweep_xbar(model, axis(p), axis(r), seed, &XbarConfig::default()).unwrap()
}

#[test]
fn reference_cells() {
    let ms = cell(SweepModel::Ms { q: 1.2, s: 0.8 }, 1.0, 0.8, 0);
    assert_eq!(ms.classify(0, 0).unwrap(), XbarClass::Cycle);
    assert!(ms.values[0] > 0.0);

    let trivial = cell(SweepModel::Sym, 2.0, 0.5, 0);
    assert!(trivial.values[0].abs() < 1e-4);

    for seed in 0..4 {
        let eq = cell(SweepModel::Sym, 0.5, 1.5, seed);
        assert!((eq.values[0].abs() - 1.0).abs() < 1e-3, "seed {seed}: {}", eq.values[0]);
    }
}

#[test]
fn same_seed_gives_identical_grids() {
    let run = |seed| {
        sweep_xbar(
            SweepModel::Ms { q: 1.2, s: 0.8 },
            Axis::new(0.0, 3.0, 5).unwrap(),
            Axis::new(0.0, 3.0, 4).unwrap(),
            seed,
            &XbarConfig::default(),
        )
        .unwrap()
    };
    let (a, b) = (run(7), run(7));
    assert_eq!(a.to_binary(), b.to_binary());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), run(8).to_csv());
}

#[test]
fn random_cells_agree_with_regions() {
    let t = Region3Thresholds {
        homoclinic: HOMOCLINIC_THRESHOLD,
        fold: find_fold().unwrap().1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 100 {
        let p: f64 = rng.gen_range(0.02..3.0);
        let r: f64 = rng.gen_range(0.02..3.0);
        if (r - p).abs() < 0.05 || (r - 1.0).abs() < 0.05 || (p - 1.0).abs() < 0.05 {
            continue;
        }
        let Ok(label) = region_classify(&AsymParams::new(p, r, 0.0).unwrap(), Variant::Sym, Some(&t)) else {
            continue;
        };
        let g = cell(SweepModel::Sym, p, r, checked as u64);
        let class = g.classify(0, 0).unwrap();
        let allowed: &[XbarClass] = match label {
            RegionLabel::O => &[XbarClass::Trivial],
            RegionLabel::I | RegionLabel::II => &[XbarClass::Cycle],
            RegionLabel::IIIc => &[XbarClass::Equilibrium],
            // stable outer cycle coexists with the stable equilibria
            RegionLabel::IIIa | RegionLabel::IIIb => &[XbarClass::Equilibrium, XbarClass::Cycle],
            other => panic!("unexpected {other}"),
        };
        assert!(allowed.contains(&class), "({p}, {r}) {label}: {class:?} x̄={}", g.values[0]);
        checked += 1;
    }
}

#[test]
fn csv_schema() {
    let g = cell(SweepModel::Sym, 2.0, 0.5, 0);
    let csv = g.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
    assert!(lines.next().unwrap().starts_with("# model="));
    assert_eq!(lines.next(), Some("p,r,xbar,status"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 2.0);
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.5);
    assert_eq!(row[2].parse::<f64>().unwrap(), g.values[0]);
}
