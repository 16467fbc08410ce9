//! Dormand-Prince 5(4) integrator with adaptive step control.

use crate::error::Error;
use crate::Result;

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` (either direction),
/// starting at `y0`, with relative/absolute tolerance `tol`.
pub fn dopri5<F>(f: &F, t0: f64, t1: f64, y0: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    // Butcher tableau (Dormand-Prince 1980)
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return Ok(y0.to_vec());
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = dir * (span / 100.0).min(0.1).max(1e-10);
    let mut k = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut steps: u64 = 0;

    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::Accuracy {
                context: "ode step budget exhausted".into(),
                achieved: (t - t0).abs(),
                requested: span,
            });
        }
        if ((t + h) - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for i in 0..7 {
            ytmp.copy_from_slice(&y);
            for m in 0..i {
                let a = A[i][m];
                if a != 0.0 {
                    for j in 0..n {
                        ytmp[j] += h * a * k[m][j];
                    }
                }
            }
            let mut stage = vec![0.0; n];
            f(t + C[i] * h, &ytmp, &mut stage);
            k[i] = stage;
        }
        let mut err = 0.0_f64;
        let mut y5 = y.clone();
        for j in 0..n {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for i in 0..7 {
                d5 += B5[i] * k[i][j];
                d4 += B4[i] * k[i][j];
            }
            y5[j] = y[j] + h * d5;
            let sc = tol * (1.0 + y[j].abs().max(y5[j].abs()));
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        if h.abs() < 1e-15 * span {
            return Err(Error::Accuracy {
                context: "ode step underflow".into(),
                achieved: h.abs(),
                requested: 1e-15 * span,
            });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let y = dopri5(&f, 0.0, 3.0, &[1.0], 1e-12).unwrap();
        assert!((y[0] - (-3.0_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let y = dopri5(&f, 0.0, 20.0 * std::f64::consts::PI, &[1.0, 0.0], 1e-12).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8, "{}", y[0]);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let f = |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 2.0 * t;
        let y = dopri5(&f, 2.0, 0.0, &[4.0], 1e-12).unwrap();
        assert!(y[0].abs() < 1e-10);
    }
}
