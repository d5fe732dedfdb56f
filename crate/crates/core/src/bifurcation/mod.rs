//! Parameter-plane products: closed-form Hopf curves, traced homoclinic and
//! cycle-fold curves, the region III sub-partition, and `x̄` sweeps.

mod curve;
mod sweep;
mod trace;

pub use curve::{Association, BifurcationCurve, CurveKind, Provenance, CURVE_CSV_HEADER};
pub use sweep::{
    classify_xbar, sweep_xbar, Axis, CellStatus, SweepGrid, SweepModel, XbarClass, EQUILIBRIUM_TOL, SWEEP_CSV_HEADER,
    SWEEP_MAGIC, TRIVIAL_TOL,
};
pub use trace::{
    fold_detector, homoclinic_probe, region3_subpartition, saddle_label, trace_cycle_fold, trace_homoclinic,
    HomoclinicProbe, Region3Partition, TraceConfig,
};

use crate::equilibria::{hopf_polylines, Variant};

/// Hopf curves over `p ∈ [p_lo, p_hi]`, clipped at `r_hi`.
pub fn hopf_curves(variant: Variant, s: f64, p_lo: f64, p_hi: f64, r_hi: f64, n: usize) -> Vec<BifurcationCurve> {
    hopf_polylines(variant, s, p_lo, p_hi, r_hi, n)
}
