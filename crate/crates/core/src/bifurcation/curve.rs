use serde::{Deserialize, Serialize};

use crate::equilibria::EquilibriumLabel;
use crate::error::{Error, Result};

/// Header comment of the curve CSV schema.
pub const CURVE_CSV_HEADER: &str = "# msclimate curve v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    HopfSuper,
    HopfSub,
    Homoclinic,
    CycleFold,
    Pitchfork,
    Transcritical,
    SaddleNodeEq,
    /// Node/spiral boundary of an equilibrium (not a bifurcation).
    NodeSpiral,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::HopfSuper => "hopf-super",
            CurveKind::HopfSub => "hopf-sub",
            CurveKind::Homoclinic => "homoclinic",
            CurveKind::CycleFold => "cycle-fold",
            CurveKind::Pitchfork => "pitchfork",
            CurveKind::Transcritical => "transcritical",
            CurveKind::SaddleNodeEq => "saddle-node-eq",
            CurveKind::NodeSpiral => "node-spiral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Association {
    P0,
    P1,
    P2,
    /// Both nontrivial equilibria at once.
    P1P2,
    Cycles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Traced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    pub name: String,
    pub kind: CurveKind,
    pub association: Association,
    pub provenance: Provenance,
    /// `(p, r)` polyline, ordered by `p`.
    pub points: Vec<(f64, f64)>,
    /// Bisection half-width in `r` achieved at each traced point.
    pub tolerance: Option<f64>,
    /// Saddle a homoclinic orbit connects to.
    pub saddle: Option<EquilibriumLabel>,
}

impl BifurcationCurve {
    pub fn closed_form(name: &str, kind: CurveKind, association: Association, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.to_string(),
            kind,
            association,
            provenance: Provenance::ClosedForm,
            points,
            tolerance: None,
            saddle: None,
        }
    }

    /// `r` at `p` by linear interpolation, `None` outside the polyline.
    pub fn r_at(&self, p: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let ((p0, r0), (p1, r1)) = (w[0], w[1]);
            let (lo, hi) = if p0 <= p1 { (p0, p1) } else { (p1, p0) };
            if p < lo || p > hi {
                return None;
            }
            if p1 == p0 {
                return Some(r0);
            }
            Some(r0 + (r1 - r0) * (p - p0) / (p1 - p0))
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{CURVE_CSV_HEADER}\n# name={} kind={} association={:?} provenance={:?}",
            self.name,
            self.kind.as_str(),
            self.association,
            self.provenance
        );
        if let Some(t) = self.tolerance {
            out.push_str(&format!(" tolerance={t:?}"));
        }
        if let Some(s) = self.saddle {
            out.push_str(&format!(" saddle={s}"));
        }
        out.push_str("\np,r\n");
        for (p, r) in &self.points {
            out.push_str(&format!("{p:?},{r:?}\n"));
        }
        out
    }

    /// Points of a curve CSV written by [`Self::to_csv`].
    pub fn parse_csv_points(text: &str) -> Result<Vec<(f64, f64)>> {
        let mut lines = text.lines();
        if lines.next() != Some(CURVE_CSV_HEADER) {
            return Err(Error::Format("missing curve CSV header".into()));
        }
        let mut out = Vec::new();
        for line in lines.filter(|l| !l.starts_with('#') && !l.is_empty() && *l != "p,r") {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad row {line}")))?;
            let p = a.parse().map_err(|_| Error::Format(format!("bad p in {line}")))?;
            let r = b.parse().map_err(|_| Error::Format(format!("bad r in {line}")))?;
            out.push((p, r));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_interpolation() {
        let c = BifurcationCurve::closed_form(
            "line",
            CurveKind::Pitchfork,
            Association::P1P2,
            vec![(0.1, 0.2), (0.3, 1.0 / 3.0), (0.5, 0.7)],
        );
        let csv = c.to_csv();
        assert!(csv.contains("kind=pitchfork"));
        assert_eq!(BifurcationCurve::parse_csv_points(&csv).unwrap(), c.points);
        assert!((c.r_at(0.4).unwrap() - (1.0 / 3.0 + 0.7) / 2.0).abs() < 1e-15);
        assert!(c.r_at(0.6).is_none());
    }
}
