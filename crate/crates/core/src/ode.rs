//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri<const N: usize> {
    pub atol: [f64; N],
    pub rtol: [f64; N],
    /// Upper bound on |h|; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl<const N: usize> Dopri<N> {
    pub fn new(atol: [f64; N], rtol: [f64; N]) -> Self {
        Self {
            atol,
            rtol,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }

    /// Integrates from `x0` to `x1` (either direction). `observe` sees every
    /// accepted step end point, including `x1`.
    pub fn integrate<F, O>(
        &self,
        mut rhs: F,
        x0: f64,
        y0: [f64; N],
        x1: f64,
        h_init: Option<f64>,
        mut observe: O,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]),
    {
        if x0 == x1 {
            return Ok(y0);
        }
        let dir = (x1 - x0).signum();
        let span = (x1 - x0).abs();
        let mut h = h_init.unwrap_or(span * 1e-3).abs().min(span).min(self.h_max);
        let mut x = x0;
        let mut y = y0;
        let mut k1 = rhs(x, &y);
        check_finite(x, &k1)?;
        let mut steps = 0usize;
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 0.0 {
                return Ok(y);
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;

            let stage = |y: &[f64; N], coeffs: &[(f64, &[f64; N])]| {
                let mut out = *y;
                for (c, k) in coeffs {
                    for i in 0..N {
                        out[i] += hs * c * k[i];
                    }
                }
                out
            };
            let k2 = rhs(x + C2 * hs, &stage(&y, &[(A21, &k1)]));
            let k3 = rhs(x + C3 * hs, &stage(&y, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(
                x + C4 * hs,
                &stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = rhs(
                x + C5 * hs,
                &stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                x + hs,
                &stage(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = stage(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let x_new = if last { x1 } else { x + hs };
            let k7 = rhs(x_new, &y_new);

            let mut err = 0.0f64;
            let mut finite = true;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.atol[i] + self.rtol[i] * y[i].abs().max(y_new[i].abs());
                let r = e / sc;
                finite &= r.is_finite() && y_new[i].is_finite() && k7[i].is_finite();
                err = err.max(r.abs());
            }

            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Solver(format!(
                    "step budget exhausted at x = {x} while integrating toward {x1}"
                )));
            }

            if finite && err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                observe(x, &y);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(self.h_max);
                if last {
                    return Ok(y);
                }
            } else {
                let fac = if finite {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h *= fac;
                if h < span * 1e-15 || h < f64::MIN_POSITIVE {
                    return Err(Error::Solver(format!(
                        "step size underflow at x = {x} (error ratio {err:.3e})"
                    )));
                }
            }
        }
    }
}

fn check_finite<const N: usize>(x: f64, k: &[f64; N]) -> Result<()> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Solver(format!("non-finite derivative at x = {x}")))
    }
}
