use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{integrate, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::models::{HamiltonianField, ModelSpec, RotatedField};

/// Header comment of the orbit CSV schema.
pub const ORBIT_CSV_HEADER: &str = "# msclimate orbit v1";

/// Half-width of the box random initial states are drawn from.
pub const RANDOM_IC_HALF_WIDTH: f64 = 2.5;

/// A stored trajectory with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub model: ModelSpec,
    pub config: IntegratorConfig,
    pub seed: Option<u64>,
    pub initial_state: Vec<f64>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Uniform draw from `[-2.5, 2.5]^dim`. `stream` selects an independent
/// sequence for the same seed (one per sweep cell, say).
pub fn random_initial_state(dim: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..dim)
        .map(|_| rng.gen_range(-RANDOM_IC_HALF_WIDTH..=RANDOM_IC_HALF_WIDTH))
        .collect()
}

fn to_array<const N: usize>(x: &[f64]) -> Result<[f64; N]> {
    x.try_into().map_err(|_| {
        Error::InvalidParams(format!("initial state has {} components, model needs {N}", x.len()))
    })
}

fn flatten<const N: usize>(traj: Trajectory<N>) -> (Vec<f64>, Vec<Vec<f64>>) {
    (
        traj.times,
        traj.states.into_iter().map(|s| s.to_vec()).collect(),
    )
}

/// Integrates any model variant from an explicit initial state.
pub fn integrate_model(
    model: &ModelSpec,
    initial_state: &[f64],
    config: &IntegratorConfig,
    seed: Option<u64>,
) -> Result<OrbitRecord> {
    model.validate()?;
    let (times, states) = match model {
        ModelSpec::Ms(m) => flatten(integrate(m, &to_array::<3>(initial_state)?, config)?),
        ModelSpec::Sym(m) => flatten(integrate(m, &to_array::<2>(initial_state)?, config)?),
        ModelSpec::Asym(m) => flatten(integrate(m, &to_array::<2>(initial_state)?, config)?),
        ModelSpec::Rotated(m) => flatten(integrate(
            &RotatedField(*m),
            &to_array::<2>(initial_state)?,
            config,
        )?),
        ModelSpec::Unfolded(m) => flatten(integrate(m, &to_array::<2>(initial_state)?, config)?),
        ModelSpec::Hamiltonian { mu } => flatten(integrate(
            &HamiltonianField { mu: *mu },
            &to_array::<2>(initial_state)?,
            config,
        )?),
    };
    Ok(OrbitRecord {
        model: *model,
        config: *config,
        seed,
        initial_state: initial_state.to_vec(),
        times,
        states,
    })
}

impl OrbitRecord {
    pub fn to_csv(&self) -> String {
        let names = self.model.kind().state_names();
        let mut out = String::new();
        out.push_str(ORBIT_CSV_HEADER);
        out.push('\n');
        out.push('t');
        for n in names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for c in s {
                out.push(',');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Reads back `(times, states)` from [`Self::to_csv`] output.
    pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l == ORBIT_CSV_HEADER => {}
            _ => return Err(Error::Format("missing orbit CSV header".into())),
        }
        let cols = lines
            .next()
            .ok_or_else(|| Error::Format("missing column line".into()))?
            .split(',')
            .count();
        let mut times = Vec::new();
        let mut states = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
            let vals = vals.map_err(|e| Error::Format(e.to_string()))?;
            if vals.len() != cols {
                return Err(Error::Format(format!("row has {} fields, expected {cols}", vals.len())));
            }
            times.push(vals[0]);
            states.push(vals[1..].to_vec());
        }
        Ok((times, states))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Component `i` along the orbit.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{MsParams, SymParams};

    #[test]
    fn random_states_are_reproducible_and_bounded() {
        let a = random_initial_state(3, 7, 11);
        let b = random_initial_state(3, 7, 11);
        let c = random_initial_state(3, 7, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| v.abs() <= RANDOM_IC_HALF_WIDTH));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let model = ModelSpec::Ms(MsParams::new(1.0, 1.2, 0.8, 0.8).unwrap());
        let rec = integrate_model(
            &model,
            &[0.3, -0.1, 0.2],
            &IntegratorConfig::default().with_t_end(5.0),
            None,
        )
        .unwrap();
        let csv = rec.to_csv();
        assert!(csv.starts_with(ORBIT_CSV_HEADER));
        assert!(csv.lines().nth(1).unwrap() == "t,x,y,z");
        let (times, states) = OrbitRecord::parse_csv(&csv).unwrap();
        assert_eq!(times, rec.times);
        assert_eq!(states, rec.states);
        let back = OrbitRecord::from_json(&rec.to_json().unwrap()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let model = ModelSpec::Sym(SymParams::new(1.0, 1.0).unwrap());
        assert!(integrate_model(&model, &[0.1, 0.2, 0.3], &IntegratorConfig::default(), None).is_err());
    }
}
