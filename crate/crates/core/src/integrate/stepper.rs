//! Single-step Runge–Kutta kernels with continuous extensions.

use crate::models::VectorField;

#[inline]
pub(crate) fn axpy<const N: usize>(x: &[f64; N], a: f64, d: &[f64; N]) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += a * d[i];
    }
    out
}

#[inline]
pub(crate) fn lincomb<const N: usize>(x: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *x;
    for (c, d) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += c * d[i];
            }
        }
    }
    out
}

/// Interpolant over one accepted step, parameterized by `θ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy)]
pub enum Dense<const N: usize> {
    /// Cubic Hermite from end-point states and slopes.
    Hermite {
        h: f64,
        x0: [f64; N],
        x1: [f64; N],
        f0: [f64; N],
        f1: [f64; N],
    },
    /// Fourth-order continuous extension of the Dormand–Prince pair.
    Dopri { rc: [[f64; N]; 5] },
}

impl<const N: usize> Dense<N> {
    pub fn eval(&self, theta: f64) -> [f64; N] {
        match self {
            Dense::Hermite { h, x0, x1, f0, f1 } => {
                let t2 = theta * theta;
                let t3 = t2 * theta;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + theta;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                let mut out = [0.0; N];
                for i in 0..N {
                    out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
                }
                out
            }
            Dense::Dopri { rc } => {
                let t1 = 1.0 - theta;
                let mut out = [0.0; N];
                for i in 0..N {
                    out[i] = rc[0][i]
                        + theta * (rc[1][i] + t1 * (rc[2][i] + theta * (rc[3][i] + t1 * rc[4][i])));
                }
                out
            }
        }
    }
}

pub(crate) fn rk4_step<const N: usize, F: VectorField<N>>(
    field: &F,
    x: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f0;
    let k2 = field.eval(&axpy(x, 0.5 * h, k1));
    let k3 = field.eval(&axpy(x, 0.5 * h, &k2));
    let k4 = field.eval(&axpy(x, h, &k3));
    lincomb(
        x,
        &[(h / 6.0, k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)],
    )
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub(crate) struct DopriTrial<const N: usize> {
    pub x1: [f64; N],
    pub f1: [f64; N],
    pub err: [f64; N],
    k: [[f64; N]; 7],
}

pub(crate) fn dopri_step<const N: usize, F: VectorField<N>>(
    field: &F,
    x: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> DopriTrial<N> {
    let k1 = *f0;
    let k2 = field.eval(&axpy(x, h * A21, &k1));
    let k3 = field.eval(&lincomb(x, &[(h * A31, &k1), (h * A32, &k2)]));
    let k4 = field.eval(&lincomb(x, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
    let k5 = field.eval(&lincomb(
        x,
        &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
    ));
    let k6 = field.eval(&lincomb(
        x,
        &[
            (h * A61, &k1),
            (h * A62, &k2),
            (h * A63, &k3),
            (h * A64, &k4),
            (h * A65, &k5),
        ],
    ));
    let x1 = lincomb(
        x,
        &[
            (h * A71, &k1),
            (h * A73, &k3),
            (h * A74, &k4),
            (h * A75, &k5),
            (h * A76, &k6),
        ],
    );
    let k7 = field.eval(&x1);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    DopriTrial {
        x1,
        f1: k7,
        err,
        k: [k1, k2, k3, k4, k5, k6, k7],
    }
}

impl<const N: usize> DopriTrial<N> {
    pub fn dense(&self, x0: &[f64; N], h: f64) -> Dense<N> {
        let k = &self.k;
        let mut rc = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = self.x1[i] - x0[i];
            let bspl = h * k[0][i] - ydiff;
            rc[0][i] = x0[i];
            rc[1][i] = ydiff;
            rc[2][i] = bspl;
            rc[3][i] = ydiff - h * k[6][i] - bspl;
            rc[4][i] = h
                * (D1 * k[0][i]
                    + D3 * k[2][i]
                    + D4 * k[3][i]
                    + D5 * k[4][i]
                    + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        Dense::Dopri { rc }
    }

    /// Scaled RMS norm of the embedded error estimate.
    pub fn error_norm(&self, x0: &[f64; N], abs_tol: f64, rel_tol: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = abs_tol + rel_tol * x0[i].abs().max(self.x1[i].abs());
            let e = self.err[i] / sc;
            acc += e * e;
        }
        (acc / N as f64).sqrt()
    }
}
