//! Vector fields of the Maasch–Saltzman model family.
//!
//! All variants are written in nondimensional form. One time unit is roughly
//! 10 Kyr ([`KYR_PER_TIME_UNIT`]).
//!
//! | variant      | state      | right-hand side                                          |
//! |--------------|------------|----------------------------------------------------------|
//! | `Ms`         | (x, y, z)  | (−x−y, ry − pz + sz² − yz², −qx − qz)                    |
//! | `Sym`        | (x, y)     | (−x−y, ry + px − x²y)                                    |
//! | `Asym`       | (x, y)     | (−x−y, ry + px + sx² − x²y)                              |
//! | `Rotated`    | (x, y)     | (y, (r−p)x + (r−1)y − (s+y)x² − x³)                      |
//! | `Unfolded`   | (u, v)     | (v, μu − u³ + η(λ − u²)v)                                |
//! | `Hamiltonian`| (u, v)     | (v, μu − u³)                                             |
//!
//! The planar models are the formal `q → ∞` limit of the 3-D model
//! (`z = −x`), `Sym` is `Asym` at `s = 0`, and `Rotated` is `Asym` in the
//! coordinates `(x, −(x+y))`. The unfolded system is the rotated symmetric
//! model near `(p, r) = (1, 1)` after the scaling `x = ηu`, `y = η²v`,
//! `t̃ = ηt` with `λ = (r−1)/η²` and `μ = (r−p)/η²`.
//!
//! The dimensional model and the reference scales of ice mass, CO₂ and
//! deep-water volume are not represented; only the map from the hatted
//! dimensionless coefficients to `(p, q, r, s)` is ([`nondimensionalize`]).
//! The CO₂ source term `b₀` is fixed at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Approximate length of one dimensionless time unit, in thousands of years.
pub const KYR_PER_TIME_UNIT: f64 = 10.0;

/// A time-independent vector field on `R^N`.
pub trait VectorField<const N: usize> {
    fn eval(&self, state: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: VectorField<N> + ?Sized> VectorField<N> for &F {
    fn eval(&self, state: &[f64; N]) -> [f64; N] {
        (**self).eval(state)
    }
}

/// Adapter turning a closure into a [`VectorField`].
#[derive(Clone, Copy)]
pub struct FnField<F>(pub F);

impl<const N: usize, F: Fn(&[f64; N]) -> [f64; N]> VectorField<N> for FnField<F> {
    fn eval(&self, state: &[f64; N]) -> [f64; N] {
        (self.0)(state)
    }
}

/// The same field with time reversed.
#[derive(Debug, Clone, Copy)]
pub struct Reversed<F>(pub F);

impl<const N: usize, F: VectorField<N>> VectorField<N> for Reversed<F> {
    fn eval(&self, state: &[f64; N]) -> [f64; N] {
        let mut d = self.0.eval(state);
        for c in d.iter_mut() {
            *c = -*c;
        }
        d
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg.to_string()))
    }
}

/// Parameters of the three-dimensional model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsParams {
    /// Sensitivity of CO₂ to deep-water volume.
    pub p: f64,
    /// Deep-water rate relative to the ice-mass rate.
    pub q: f64,
    /// CO₂ growth rate.
    pub r: f64,
    /// Asymmetry.
    pub s: f64,
}

impl MsParams {
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        let params = Self { p, q, r, s };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p.is_finite() && self.p > 0.0, "p > 0 violated")?;
        check(self.q.is_finite() && self.q > 1.0, "q > 1 violated")?;
        check(self.r.is_finite() && self.r > 0.0, "r > 0 violated")?;
        check(self.s.is_finite() && self.s >= 0.0, "s >= 0 violated")
    }

    /// Parameters of the planar model obtained by letting `q → ∞`.
    pub fn planar_limit(&self) -> AsymParams {
        AsymParams {
            p: self.p,
            r: self.r,
            s: self.s,
        }
    }
}

/// Parameters of the planar model with reflection symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymParams {
    pub p: f64,
    pub r: f64,
}

impl SymParams {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        let params = Self { p, r };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p.is_finite() && self.p > 0.0, "p > 0 violated")?;
        check(self.r.is_finite() && self.r > 0.0, "r > 0 violated")
    }
}

/// Parameters of the planar model with asymmetry `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymParams {
    pub p: f64,
    pub r: f64,
    pub s: f64,
}

impl AsymParams {
    pub fn new(p: f64, r: f64, s: f64) -> Result<Self> {
        let params = Self { p, r, s };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.p.is_finite() && self.p > 0.0, "p > 0 violated")?;
        check(self.r.is_finite() && self.r > 0.0, "r > 0 violated")?;
        check(self.s.is_finite() && self.s >= 0.0, "s >= 0 violated")
    }
}

impl From<SymParams> for AsymParams {
    fn from(sym: SymParams) -> Self {
        AsymParams {
            p: sym.p,
            r: sym.r,
            s: 0.0,
        }
    }
}

/// Parameters of the rescaled system near the organizing center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldParams {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
}

impl UnfoldParams {
    pub fn new(lambda: f64, mu: f64, eta: f64) -> Result<Self> {
        let params = Self { lambda, mu, eta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.lambda.is_finite(), "lambda must be finite")?;
        check(self.mu.is_finite(), "mu must be finite")?;
        check(self.eta.is_finite() && self.eta > 0.0, "eta > 0 violated")
    }
}

/// Hatted dimensionless coefficients of the unscaled nondimensional model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatParams {
    pub a1h: f64,
    pub b1h: f64,
    pub b2h: f64,
    pub b3h: f64,
    pub b4h: f64,
    pub c0h: f64,
    pub c2h: f64,
}

/// Maps the hatted coefficients to `(p, q, r, s)`.
///
/// `b3h = 0` is accepted and yields the symmetric case `s = 0`; every other
/// coefficient must be strictly positive.
pub fn nondimensionalize(h: &HatParams) -> Result<MsParams> {
    let positive = [
        ("a1h", h.a1h),
        ("b1h", h.b1h),
        ("b2h", h.b2h),
        ("b4h", h.b4h),
        ("c0h", h.c0h),
        ("c2h", h.c2h),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParams(format!("{name} must be positive")));
        }
    }
    if !(h.b3h.is_finite() && h.b3h >= 0.0) {
        return Err(Error::InvalidParams("b3h must be nonnegative".into()));
    }
    Ok(MsParams {
        p: h.a1h * h.b2h * h.c0h / h.c2h,
        q: h.c2h,
        r: h.b1h,
        s: h.a1h * h.b3h * h.c0h / (h.c2h * h.b4h.sqrt()),
    })
}

pub fn ms_vector_field(state: &[f64; 3], m: &MsParams) -> [f64; 3] {
    let [x, y, z] = *state;
    [
        -x - y,
        m.r * y - m.p * z + m.s * z * z - y * z * z,
        -m.q * x - m.q * z,
    ]
}

pub fn sym_vector_field(state: &[f64; 2], m: &SymParams) -> [f64; 2] {
    let [x, y] = *state;
    [-x - y, m.r * y + m.p * x - x * x * y]
}

pub fn asym_vector_field(state: &[f64; 2], m: &AsymParams) -> [f64; 2] {
    let [x, y] = *state;
    [-x - y, m.r * y + m.p * x + m.s * x * x - x * x * y]
}

/// Asymmetric model in the coordinates `(x, −(x+y))`.
pub fn rotated_vector_field(state: &[f64; 2], m: &AsymParams) -> [f64; 2] {
    let [x, y] = *state;
    [
        y,
        (m.r - m.p) * x + (m.r - 1.0) * y - (m.s + y) * x * x - x * x * x,
    ]
}

pub fn unfolded_vector_field(state: &[f64; 2], m: &UnfoldParams) -> [f64; 2] {
    let [u, v] = *state;
    [v, m.mu * u - u * u * u + m.eta * (m.lambda - u * u) * v]
}

pub fn hamiltonian_vector_field(state: &[f64; 2], mu: f64) -> [f64; 2] {
    let [u, v] = *state;
    [v, mu * u - u * u * u]
}

/// `H(u, v) = v²/2 − μu²/2 + u⁴/4`.
pub fn hamiltonian_value(state: &[f64; 2], mu: f64) -> f64 {
    let [u, v] = *state;
    0.5 * v * v - 0.5 * mu * u * u + 0.25 * u * u * u * u
}

/// Original-frame state to rotated-frame state.
pub fn to_rotated(state: &[f64; 2]) -> [f64; 2] {
    [state[0], -(state[0] + state[1])]
}

/// Rotated-frame state back to the original frame.
pub fn from_rotated(state: &[f64; 2]) -> [f64; 2] {
    [state[0], -(state[0] + state[1])]
}

/// `(p, r, η) ↦ (λ, μ, η)`.
pub fn unfolding_map(p: f64, r: f64, eta: f64) -> Result<UnfoldParams> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParams("eta > 0 violated".into()));
    }
    let eta2 = eta * eta;
    Ok(UnfoldParams {
        lambda: (r - 1.0) / eta2,
        mu: (r - p) / eta2,
        eta,
    })
}

/// `(λ, μ, η) ↦ (p, r)`.
pub fn unfolding_inverse(u: &UnfoldParams) -> (f64, f64) {
    let eta2 = u.eta * u.eta;
    let r = 1.0 + u.lambda * eta2;
    let p = r - u.mu * eta2;
    (p, r)
}

/// Slope `(r−1)/(p−1)` of the line through `(1, 1)` on which `(λ, μ)` is
/// constant up to scaling, from `(λ − μ)(r − 1) = λ(p − 1)`.
///
/// Infinite when `λ = μ` (the vertical line `p = 1`).
pub fn pencil_slope(lambda: f64, mu: f64) -> f64 {
    lambda / (lambda - mu)
}

/// Point on the pencil line through `(1, 1)` at the given `p`.
pub fn pencil_line(lambda: f64, mu: f64, p: f64) -> f64 {
    1.0 + pencil_slope(lambda, mu) * (p - 1.0)
}

impl VectorField<3> for MsParams {
    fn eval(&self, state: &[f64; 3]) -> [f64; 3] {
        ms_vector_field(state, self)
    }
}

impl VectorField<2> for SymParams {
    fn eval(&self, state: &[f64; 2]) -> [f64; 2] {
        sym_vector_field(state, self)
    }
}

impl VectorField<2> for AsymParams {
    fn eval(&self, state: &[f64; 2]) -> [f64; 2] {
        asym_vector_field(state, self)
    }
}

impl VectorField<2> for UnfoldParams {
    fn eval(&self, state: &[f64; 2]) -> [f64; 2] {
        unfolded_vector_field(state, self)
    }
}

/// Asymmetric model evaluated in the rotated frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedField(pub AsymParams);

impl VectorField<2> for RotatedField {
    fn eval(&self, state: &[f64; 2]) -> [f64; 2] {
        rotated_vector_field(state, &self.0)
    }
}

/// The `η = 0` limit of the unfolded system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianField {
    pub mu: f64,
}

impl VectorField<2> for HamiltonianField {
    fn eval(&self, state: &[f64; 2]) -> [f64; 2] {
        hamiltonian_vector_field(state, self.mu)
    }
}

/// The closed set of model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ms,
    Sym,
    Asym,
    Rotated,
    Unfolded,
    Hamiltonian,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Ms,
        ModelKind::Sym,
        ModelKind::Asym,
        ModelKind::Rotated,
        ModelKind::Unfolded,
        ModelKind::Hamiltonian,
    ];

    pub fn dim(self) -> usize {
        match self {
            ModelKind::Ms => 3,
            _ => 2,
        }
    }

    pub fn state_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Ms => &["x", "y", "z"],
            ModelKind::Unfolded | ModelKind::Hamiltonian => &["u", "v"],
            _ => &["x", "y"],
        }
    }
}

/// A model variant together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Ms(MsParams),
    Sym(SymParams),
    Asym(AsymParams),
    Rotated(AsymParams),
    Unfolded(UnfoldParams),
    Hamiltonian { mu: f64 },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Ms(_) => ModelKind::Ms,
            ModelSpec::Sym(_) => ModelKind::Sym,
            ModelSpec::Asym(_) => ModelKind::Asym,
            ModelSpec::Rotated(_) => ModelKind::Rotated,
            ModelSpec::Unfolded(_) => ModelKind::Unfolded,
            ModelSpec::Hamiltonian { .. } => ModelKind::Hamiltonian,
        }
    }

    pub fn dim(&self) -> usize {
        self.kind().dim()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Ms(m) => m.validate(),
            ModelSpec::Sym(m) => m.validate(),
            ModelSpec::Asym(m) | ModelSpec::Rotated(m) => m.validate(),
            ModelSpec::Unfolded(m) => m.validate(),
            ModelSpec::Hamiltonian { mu } => check(mu.is_finite(), "mu must be finite"),
        }
    }

    /// Evaluates the field on a state slice of length [`Self::dim`].
    pub fn eval(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.dim() {
            return Err(Error::InvalidParams(format!(
                "state has {} components, model needs {}",
                state.len(),
                self.dim()
            )));
        }
        Ok(match self {
            ModelSpec::Ms(m) => m.eval(&[state[0], state[1], state[2]]).to_vec(),
            ModelSpec::Sym(m) => m.eval(&[state[0], state[1]]).to_vec(),
            ModelSpec::Asym(m) => m.eval(&[state[0], state[1]]).to_vec(),
            ModelSpec::Rotated(m) => rotated_vector_field(&[state[0], state[1]], m).to_vec(),
            ModelSpec::Unfolded(m) => m.eval(&[state[0], state[1]]).to_vec(),
            ModelSpec::Hamiltonian { mu } => {
                hamiltonian_vector_field(&[state[0], state[1]], *mu).to_vec()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ms_field_examples() {
        let m = MsParams::new(1.0, 1.2, 0.8, 0.8).unwrap();
        assert_eq!(ms_vector_field(&[0.0; 3], &m), [0.0, 0.0, 0.0]);
        let d = ms_vector_field(&[1.0, 0.0, 0.0], &m);
        assert_abs_diff_eq!(d[0], -1.0);
        assert_abs_diff_eq!(d[1], 0.0);
        assert_abs_diff_eq!(d[2], -1.2);
        let d = ms_vector_field(&[0.0, 1.0, 1.0], &m);
        assert_abs_diff_eq!(d[0], -1.0);
        assert_abs_diff_eq!(d[1], -0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], -1.2);
    }

    #[test]
    fn sym_field_examples() {
        let m = SymParams::new(0.5, 1.5).unwrap();
        assert_eq!(sym_vector_field(&[0.0, 0.0], &m), [0.0, 0.0]);
        let d = sym_vector_field(&[1.0, -1.0], &m);
        assert_abs_diff_eq!(d[0], 0.0);
        assert_abs_diff_eq!(d[1], 0.0);
    }

    #[test]
    fn asym_field_examples() {
        let m = AsymParams::new(1.0, 1.0, 0.8).unwrap();
        let d = asym_vector_field(&[1.0, 1.0], &m);
        assert_abs_diff_eq!(d[0], -2.0);
        assert_abs_diff_eq!(d[1], 1.8, epsilon = 1e-15);
        assert_eq!(asym_vector_field(&[0.0, 0.0], &m), [0.0, 0.0]);
    }

    #[test]
    fn rotated_equilibrium_on_axis() {
        let m = AsymParams::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(rotated_vector_field(&[1.0, 0.0], &m), [0.0, 0.0]);
    }

    #[test]
    fn unfolded_examples() {
        let m = UnfoldParams::new(0.8, 1.0, 0.01).unwrap();
        assert_eq!(unfolded_vector_field(&[1.0, 0.0], &m), [0.0, 0.0]);
        let d = unfolded_vector_field(&[2f64.sqrt(), 0.0], &m);
        assert_abs_diff_eq!(d[0], 0.0);
        assert_abs_diff_eq!(d[1], -(2f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_levels() {
        assert_eq!(hamiltonian_value(&[0.0, 0.0], 1.0), 0.0);
        assert_abs_diff_eq!(hamiltonian_value(&[1.0, 0.0], 1.0), -0.25);
        assert_abs_diff_eq!(hamiltonian_value(&[2f64.sqrt(), 0.0], 1.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn unfolding_and_pencil() {
        let u = unfolding_map(1.0, 1.0, 0.3).unwrap();
        assert_eq!((u.lambda, u.mu), (0.0, 0.0));
        assert_abs_diff_eq!(pencil_slope(0.8, 1.0), -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pencil_slope(0.752, 1.0), -3.0323, epsilon = 1e-3);

        let u = unfolding_map(0.97, 1.11, 0.2).unwrap();
        let (p, r) = unfolding_inverse(&u);
        assert_abs_diff_eq!(p, 0.97, epsilon = 1e-14);
        assert_abs_diff_eq!(r, 1.11, epsilon = 1e-14);
        // (λ − μ)(r − 1) = λ(p − 1)
        assert_abs_diff_eq!(
            (u.lambda - u.mu) * (r - 1.0),
            u.lambda * (p - 1.0),
            epsilon = 1e-12
        );
        assert!(unfolding_map(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn nondimensional_coefficients() {
        let ones = HatParams {
            a1h: 1.0,
            b1h: 1.0,
            b2h: 1.0,
            b3h: 1.0,
            b4h: 1.0,
            c0h: 1.0,
            c2h: 1.0,
        };
        let m = nondimensionalize(&ones).unwrap();
        assert_eq!((m.p, m.q, m.r, m.s), (1.0, 1.0, 1.0, 1.0));
        let m = nondimensionalize(&HatParams { b3h: 0.0, ..ones }).unwrap();
        assert_eq!(m.s, 0.0);
        let m = nondimensionalize(&HatParams {
            a1h: 1.2,
            b1h: 0.8,
            b2h: 1.0,
            b3h: 0.96,
            b4h: 1.0,
            c0h: 1.0,
            c2h: 1.2,
        })
        .unwrap();
        assert_abs_diff_eq!(m.p, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.q, 1.2);
        assert_abs_diff_eq!(m.r, 0.8);
        assert_abs_diff_eq!(m.s, 0.96, epsilon = 1e-15);
        assert!(nondimensionalize(&HatParams { c0h: -1.0, ..ones }).is_err());
        assert!(nondimensionalize(&HatParams { a1h: 0.0, ..ones }).is_err());
    }

    #[test]
    fn params_reject_invalid() {
        assert!(MsParams::new(1.0, 0.5, 0.8, 0.8).is_err());
        assert!(MsParams::new(-1.0, 1.2, 0.8, 0.8).is_err());
        assert!(SymParams::new(1.0, 0.0).is_err());
        assert!(AsymParams::new(1.0, 1.0, -0.1).is_err());
        assert!(UnfoldParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rotation_round_trip() {
        let s = [0.3, -1.7];
        assert_eq!(from_rotated(&to_rotated(&s)), s);
    }

    #[test]
    fn spec_dispatch_matches_fields() {
        let a = AsymParams::new(1.2, 0.9, 0.4).unwrap();
        let spec = ModelSpec::Asym(a);
        assert_eq!(spec.eval(&[0.2, 0.1]).unwrap(), asym_vector_field(&[0.2, 0.1], &a).to_vec());
        assert!(spec.eval(&[0.2]).is_err());
        for kind in ModelKind::ALL {
            assert_eq!(kind.state_names().len(), kind.dim());
        }
    }
}
