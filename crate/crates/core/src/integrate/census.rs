//! Census of the attractors and repellers of a planar flow.
//!
//! Orbits are started from a grid of initial states and from a small ring
//! around every equilibrium, and each is followed both forward (stable
//! cycles) and backward (unstable cycles) in time. Cycles found more than
//! once are merged. A cycle encloses an equilibrium when its winding number
//! around it is nonzero; one cycle lies inside another when the outer one
//! winds around a point of the inner one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cycle::{estimate_cycle, CycleConfig, CycleEstimate, CycleStability, Direction};
use crate::equilibria::{find_equilibria, EquilibriumLabel, EquilibriumReport, Kind};
use crate::error::{Error, Result};
use crate::models::{ModelSpec, RotatedField, VectorField};

/// Uniform lattice of initial states, end points included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for IcGrid {
    fn default() -> Self {
        Self {
            x_range: (-2.5, 2.5),
            y_range: (-2.5, 2.5),
            nx: 6,
            ny: 6,
        }
    }
}

impl IcGrid {
    pub fn points(&self) -> Vec<[f64; 2]> {
        let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
            if n <= 1 {
                return vec![0.5 * (lo + hi)];
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        let xs = axis(self.x_range, self.nx);
        let ys = axis(self.y_range, self.ny);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub grid: IcGrid,
    pub cycle: CycleConfig,
    /// Radius of the ring of seeds around each equilibrium.
    pub seed_radius: f64,
    /// Relative tolerance for treating two detected cycles as the same.
    pub match_tol: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            grid: IcGrid::default(),
            cycle: CycleConfig::default(),
            seed_radius: 0.02,
            match_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub label: EquilibriumLabel,
    pub location: Vec<f64>,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub stability: CycleStability,
    pub period: f64,
    pub amplitude_x: f64,
    pub diameter: f64,
    /// Equilibria the cycle winds around.
    pub encloses: Vec<EquilibriumLabel>,
    /// Indices of the cycles this one lies inside.
    pub inside: Vec<usize>,
    #[serde(skip)]
    pub orbit: Vec<Vec<f64>>,
}

impl CycleSummary {
    /// Winds around every equilibrium of the flow.
    pub fn is_outer(&self, n_equilibria: usize) -> bool {
        self.encloses.len() == n_equilibria && n_equilibria > 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitSummary {
    pub equilibria: Vec<EquilibriumSummary>,
    pub cycles: Vec<CycleSummary>,
    pub stable_equilibria: usize,
    pub unstable_equilibria: usize,
    pub stable_cycles: usize,
    pub unstable_cycles: usize,
    /// Seeds whose orbit left every bounded set.
    pub diverged: usize,
    /// Seeds whose orbit neither settled nor escaped within the budget.
    pub unresolved: usize,
}

impl PortraitSummary {
    /// Cycles of the given stability enclosing all equilibria (or exactly
    /// one, when `outer` is false).
    pub fn count(&self, stability: CycleStability, outer: bool) -> usize {
        let n = self.equilibria.len();
        self.cycles
            .iter()
            .filter(|c| c.stability == stability)
            .filter(|c| if outer { c.is_outer(n) } else { !c.is_outer(n) })
            .count()
    }

    /// Equilibria that attract.
    pub fn attractors(&self) -> Vec<EquilibriumLabel> {
        self.equilibria
            .iter()
            .filter(|e| e.kind.is_stable())
            .map(|e| e.label)
            .collect()
    }
}

enum Outcome {
    Cycle(CycleEstimate),
    Point,
    Diverged,
    Unresolved,
}

fn run_seed<F: VectorField<2>>(field: &F, seed: [f64; 2], dir: Direction, cfg: &CycleConfig) -> Result<Outcome> {
    match estimate_cycle(field, &seed, dir, cfg) {
        Ok(c) => Ok(Outcome::Cycle(c)),
        Err(Error::NoCycleFound(msg)) if msg.contains("diverged") => Ok(Outcome::Diverged),
        Err(Error::NoCycleFound(_)) => Ok(Outcome::Point),
        Err(Error::NonConvergentReturns { .. }) | Err(Error::StepLimitExceeded { .. }) => Ok(Outcome::Unresolved),
        Err(e) => Err(e),
    }
}

fn same_cycle(a: &CycleEstimate, b: &CycleEstimate, tol: f64) -> bool {
    if a.stability != b.stability || (a.period - b.period).abs() > tol * a.period.max(b.period) {
        return false;
    }
    let scale = 1.0 + a.diameter().max(b.diameter());
    a.orbit.iter().step_by((a.orbit.len() / 8).max(1)).all(|p| b.min_distance_to(p) < tol * scale)
}

/// Census of a planar field whose equilibria are known.
pub fn census_field<F: VectorField<2> + Sync>(
    field: &F,
    equilibria: &[EquilibriumReport],
    config: &CensusConfig,
) -> Result<PortraitSummary> {
    let mut seeds = config.grid.points();
    for e in equilibria {
        for k in 0..4 {
            let a = std::f64::consts::FRAC_PI_4 + k as f64 * std::f64::consts::FRAC_PI_2;
            seeds.push([
                e.location[0] + config.seed_radius * a.cos(),
                e.location[1] + config.seed_radius * a.sin(),
            ]);
        }
    }
    let jobs: Vec<([f64; 2], Direction)> = seeds
        .iter()
        .flat_map(|&s| [(s, Direction::Forward), (s, Direction::Reverse)])
        .collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(s, d)| run_seed(field, s, d, &config.cycle))
        .collect::<Result<_>>()?;

    let mut found: Vec<CycleEstimate> = Vec::new();
    let mut diverged = 0;
    let mut unresolved = 0;
    for o in outcomes {
        match o {
            Outcome::Cycle(c) => {
                if !found.iter().any(|f| same_cycle(f, &c, config.match_tol)) {
                    found.push(c);
                }
            }
            Outcome::Diverged => diverged += 1,
            Outcome::Unresolved => unresolved += 1,
            Outcome::Point => {}
        }
    }
    // outermost first, stable before unstable at equal size
    found.sort_by(|a, b| {
        b.diameter()
            .partial_cmp(&a.diameter())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.stability as u8).cmp(&(b.stability as u8)))
    });

    let cycles: Vec<CycleSummary> = found
        .iter()
        .map(|c| {
            let encloses = equilibria
                .iter()
                .filter(|e| c.winding_number(&e.location) != 0)
                .map(|e| e.label)
                .collect();
            let inside = found
                .iter()
                .enumerate()
                .filter(|(_, o)| !std::ptr::eq(*o, c) && o.winding_number(&c.orbit[0]) != 0)
                .map(|(j, _)| j)
                .collect();
            CycleSummary {
                stability: c.stability,
                period: c.period,
                amplitude_x: c.amplitude_x,
                diameter: c.diameter(),
                encloses,
                inside,
                orbit: c.orbit.clone(),
            }
        })
        .collect();

    let equilibria: Vec<EquilibriumSummary> = equilibria
        .iter()
        .map(|e| EquilibriumSummary {
            label: e.label,
            location: e.location.clone(),
            kind: e.kind,
        })
        .collect();
    Ok(PortraitSummary {
        stable_equilibria: equilibria.iter().filter(|e| e.kind.is_stable()).count(),
        unstable_equilibria: equilibria.iter().filter(|e| !e.kind.is_stable()).count(),
        stable_cycles: cycles.iter().filter(|c| c.stability == CycleStability::Stable).count(),
        unstable_cycles: cycles.iter().filter(|c| c.stability == CycleStability::Unstable).count(),
        equilibria,
        cycles,
        diverged,
        unresolved,
    })
}

/// Census of a planar model variant.
pub fn census_attractors(model: &ModelSpec, config: &CensusConfig) -> Result<PortraitSummary> {
    let eq = find_equilibria(model)?;
    match model {
        ModelSpec::Sym(m) => census_field(m, &eq, config),
        ModelSpec::Asym(m) => census_field(m, &eq, config),
        ModelSpec::Rotated(m) => census_field(&RotatedField(*m), &eq, config),
        ModelSpec::Unfolded(m) => census_field(m, &eq, config),
        ModelSpec::Ms(_) | ModelSpec::Hamiltonian { .. } => Err(Error::InvalidParams(
            "census needs a planar dissipative model (sym, asym, rotated or unfolded)".into(),
        )),
    }
}
