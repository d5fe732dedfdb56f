//! Parameter sweeps of `x̄` over a `(p, r)` grid.
//!
//! Every cell integrates one orbit from a uniform random initial state drawn
//! from the ChaCha8 stream numbered by the cell index, so a grid is a pure
//! function of its inputs and cells can be computed in any order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::find_equilibria;
use crate::error::{Error, Result};
use crate::integrate::{random_initial_state, xbar_model, XbarConfig};
use crate::models::{AsymParams, ModelSpec, MsParams, SymParams};

/// Header comment of the sweep CSV schema.
pub const SWEEP_CSV_HEADER: &str = "# msclimate sweep v1";

/// Magic bytes of the binary sweep format.
pub const SWEEP_MAGIC: &[u8; 4] = b"MSXB";

/// The model family swept, with the parameters held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SweepModel {
    Ms { q: f64, s: f64 },
    Sym,
    Asym { s: f64 },
}

impl SweepModel {
    pub fn at(&self, p: f64, r: f64) -> Result<ModelSpec> {
        Ok(match *self {
            SweepModel::Ms { q, s } => ModelSpec::Ms(MsParams::new(p, q, r, s)?),
            SweepModel::Sym => ModelSpec::Sym(SymParams::new(p, r)?),
            SweepModel::Asym { s } => ModelSpec::Asym(AsymParams::new(p, r, s)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SweepModel::Ms { .. } => 3,
            _ => 2,
        }
    }
}

/// `n` uniform points on `(lo, hi]`: `lo + (i+1)(hi−lo)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParams(format!("bad axis {lo}..{hi} with {n} points")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + (i + 1) as f64 * (self.hi - self.lo) / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Converged,
    /// Block suprema still drifting at the end of the budget; the value is the
    /// last block's supremum.
    NotConverged,
    Diverged,
    Failed,
}

/// Three-way reading of an `x̄` value, plus divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XbarClass {
    Trivial,
    Equilibrium,
    Cycle,
    Divergent,
}

/// `x̄` within this distance of zero reads as the trivial state.
pub const TRIVIAL_TOL: f64 = 1e-4;
/// `x̄` within this distance of an equilibrium's `x` reads as that equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-3;

/// Classifies `value` against the `x` coordinates of the nontrivial
/// equilibria.
pub fn classify_xbar(value: f64, equilibria_x: &[f64]) -> XbarClass {
    if !value.is_finite() {
        XbarClass::Divergent
    } else if value.abs() < TRIVIAL_TOL {
        XbarClass::Trivial
    } else if equilibria_x.iter().any(|x| (value - x).abs() < EQUILIBRIUM_TOL) {
        XbarClass::Equilibrium
    } else {
        XbarClass::Cycle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub model: SweepModel,
    pub p_axis: Axis,
    pub r_axis: Axis,
    pub seed: u64,
    pub config: XbarConfig,
    /// Row-major with rows indexed by `r`: cell `(i, j)` sits at `j·n_p + i`.
    pub values: Vec<f64>,
    pub status: Vec<CellStatus>,
}

#[derive(Serialize, Deserialize)]
struct BinaryHeader {
    format: String,
    version: u32,
    rows: usize,
    cols: usize,
    layout: String,
    model: SweepModel,
    p_axis: Axis,
    r_axis: Axis,
    seed: u64,
    config: XbarConfig,
    status: Vec<CellStatus>,
}

impl SweepGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.p_axis.n + i
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn p_r(&self, i: usize, j: usize) -> (f64, f64) {
        (self.p_axis.point(i), self.r_axis.point(j))
    }

    /// Cells that did not converge cleanly.
    pub fn warnings(&self) -> usize {
        self.status.iter().filter(|s| **s != CellStatus::Converged).count()
    }

    pub fn classify(&self, i: usize, j: usize) -> Result<XbarClass> {
        let (p, r) = self.p_r(i, j);
        let eqs = find_equilibria(&self.model.at(p, r)?)?;
        let xs: Vec<f64> = eqs.iter().skip(1).map(|e| e.location[0]).collect();
        Ok(classify_xbar(self.value(i, j), &xs))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{SWEEP_CSV_HEADER}\n# model={} seed={} p_axis={:?}..{:?}/{} r_axis={:?}..{:?}/{}\np,r,xbar,status\n",
            serde_json::to_string(&self.model).expect("model serializes"),
            self.seed,
            self.p_axis.lo,
            self.p_axis.hi,
            self.p_axis.n,
            self.r_axis.lo,
            self.r_axis.hi,
            self.r_axis.n
        );
        for j in 0..self.r_axis.n {
            for i in 0..self.p_axis.n {
                let (p, r) = self.p_r(i, j);
                let k = self.index(i, j);
                let status = serde_json::to_value(self.status[k]).expect("status serializes");
                out.push_str(&format!(
                    "{p:?},{r:?},{:?},{}\n",
                    self.values[k],
                    status.as_str().unwrap_or_default()
                ));
            }
        }
        out
    }

    /// `MSXB`, little-endian `u32` header length, JSON header, then the
    /// values as little-endian `f64` in row-major order.
    pub fn to_binary(&self) -> Vec<u8> {
        let header = BinaryHeader {
            format: "msclimate-sweep".into(),
            version: 1,
            rows: self.r_axis.n,
            cols: self.p_axis.n,
            layout: "row-major, rows = r".into(),
            model: self.model,
            p_axis: self.p_axis,
            r_axis: self.r_axis,
            seed: self.seed,
            config: self.config,
            status: self.status.clone(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(8 + json.len() + 8 * self.values.len());
        out.extend_from_slice(SWEEP_MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("sweep binary: {m}"));
        if bytes.len() < 8 || &bytes[..4] != SWEEP_MAGIC {
            return Err(bad("missing magic"));
        }
        let len = u32::from_le_bytes(bytes[4..8].try_into().expect("four bytes")) as usize;
        let body = bytes.get(8..8 + len).ok_or_else(|| bad("truncated header"))?;
        let h: BinaryHeader = serde_json::from_slice(body)?;
        let data = &bytes[8 + len..];
        if data.len() != 8 * h.rows * h.cols || h.rows != h.r_axis.n || h.cols != h.p_axis.n {
            return Err(bad("value block does not match the header shape"));
        }
        let values = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        Ok(Self {
            model: h.model,
            p_axis: h.p_axis,
            r_axis: h.r_axis,
            seed: h.seed,
            config: h.config,
            values,
            status: h.status,
        })
    }
}

fn cell(model: &ModelSpec, seed: u64, index: u64, config: &XbarConfig) -> (f64, CellStatus) {
    let x0 = random_initial_state(model.dim(), seed, index);
    match xbar_model(model, &x0, config) {
        Ok(e) => (e.value, CellStatus::Converged),
        Err(Error::NotConverged { second, .. }) => (second, CellStatus::NotConverged),
        Err(Error::NonFiniteState { .. }) => (f64::NAN, CellStatus::Diverged),
        Err(_) => (f64::NAN, CellStatus::Failed),
    }
}

/// `x̄` at every cell of the grid.
pub fn sweep_xbar(model: SweepModel, p_axis: Axis, r_axis: Axis, seed: u64, config: &XbarConfig) -> Result<SweepGrid> {
    Axis::new(p_axis.lo, p_axis.hi, p_axis.n)?;
    Axis::new(r_axis.lo, r_axis.hi, r_axis.n)?;
    config.integrator.validate()?;
    let cells: Vec<ModelSpec> = (0..r_axis.n)
        .flat_map(|j| (0..p_axis.n).map(move |i| (i, j)))
        .map(|(i, j)| model.at(p_axis.point(i), r_axis.point(j)))
        .collect::<Result<_>>()?;
    let results: Vec<(f64, CellStatus)> = cells
        .par_iter()
        .enumerate()
        .map(|(k, m)| cell(m, seed, k as u64, config))
        .collect();
    let (values, status) = results.into_iter().unzip();
    Ok(SweepGrid {
        model,
        p_axis,
        r_axis,
        seed,
        config: *config,
        values,
        status,
    })
}
