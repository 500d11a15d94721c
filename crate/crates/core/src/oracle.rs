//! Independent reference computations used to cross-check the fast paths:
//! ball averages for mean values, an adaptive Dormand-Prince integrator for
//! scalar ODEs, and direct discrete Fourier symbols of kernels.

use crate::error::{invalid, Result};
use crate::grid::MacroField;
use crate::micro::MicroFunction;
use crate::sum::pairwise_sum_by;

/// `(1 / |B_R|) int_{B_R} u` by the rectangle rule on a regular grid of
/// `per_unit` nodes per unit length, restricted to the Euclidean ball.
pub fn ball_average(u: &MicroFunction, radius: f64, per_unit: usize) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) || per_unit == 0 {
        return invalid("ball average needs a positive radius and resolution");
    }
    let n = (radius * per_unit as f64).ceil() as i64;
    let d = radius / n as f64;
    // Midpoint nodes so the ball boundary is never sampled exactly.
    let coord = |k: i64| (k as f64 + 0.5) * d;
    match u.dim() {
        1 => {
            let count = (2 * n) as usize;
            let s = pairwise_sum_by(count, &|i| u.value(&[coord(i as i64 - n)]));
            Ok(s / count as f64)
        }
        2 => {
            let side = (2 * n) as usize;
            let inside = |i: usize| {
                let (a, b) = (coord((i / side) as i64 - n), coord((i % side) as i64 - n));
                a * a + b * b <= radius * radius
            };
            let total = pairwise_sum_by(side * side, &|i| {
                if inside(i) {
                    u.value(&[coord((i / side) as i64 - n), coord((i % side) as i64 - n)])
                } else {
                    0.0
                }
            });
            let count = pairwise_sum_by(side * side, &|i| if inside(i) { 1.0 } else { 0.0 });
            Ok(total / count)
        }
        d => invalid(format!("unsupported dimension {d}")),
    }
}

/// Direct discrete Fourier symbol `h^N sum_j J(x_j) exp(-i xi . x_j)` with
/// `xi = pi m / L`, the eigenvalue of convolution with `kernel` on the mode
/// `exp(i xi . x)`. Returns the real and imaginary parts.
pub fn fourier_symbol(kernel: &MacroField, mode: &[i64]) -> Result<(f64, f64)> {
    let g = kernel.grid();
    if mode.len() != g.dim() {
        return invalid("mode has the wrong dimension");
    }
    let xi: Vec<f64> = mode
        .iter()
        .map(|m| std::f64::consts::PI * *m as f64 / g.half_width())
        .collect();
    let v = kernel.values();
    let phase = |j: usize| {
        let x = g.point(j);
        xi.iter().zip(x).map(|(k, xj)| k * xj).sum::<f64>()
    };
    let re = pairwise_sum_by(v.len(), &|j| v[j] * phase(j).cos());
    let im = pairwise_sum_by(v.len(), &|j| -v[j] * phase(j).sin());
    let w = g.cell_volume();
    Ok((w * re, w * im))
}

/// Adaptive Dormand-Prince 5(4) integration of the scalar ODE `y' = f(t, y)`
/// from `(t0, y0)` to `t1`, controlling the local error to `tol` in mixed
/// absolute/relative form.
pub fn dopri_scalar(f: impl Fn(f64, f64) -> f64, t0: f64, y0: f64, t1: f64, tol: f64) -> Result<f64> {
    if t1.is_nan() || t1 < t0 || tol.is_nan() || tol <= 0.0 {
        return invalid("integration needs t1 >= t0 and a positive tolerance");
    }
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
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
    let (mut t, mut y) = (t0, y0);
    let mut h = ((t1 - t0) / 100.0).max(1e-12);
    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > 10_000_000 {
            return invalid("adaptive integrator exceeded its step budget");
        }
        h = h.min(t1 - t);
        let mut k = [0.0; 7];
        for s in 0..7 {
            let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(t + C[s] * h, ys);
        }
        let y5 = y + h * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
        let y4 = y + h * (0..7).map(|s| B4[s] * k[s]).sum::<f64>();
        let err = (y5 - y4).abs() / (tol * (1.0 + y.abs().max(y5.abs())));
        if !err.is_finite() {
            return invalid("adaptive integrator produced a non-finite value");
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MacroGrid;

    #[test]
    fn dopri_exponential() {
        let y = dopri_scalar(|_, y| -y, 0.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((y - (-2.0_f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn dopri_logistic() {
        let y = dopri_scalar(|_, y| y * (1.0 - y), 0.0, 0.1, 3.0, 1e-12).unwrap();
        let exact = 1.0 / (1.0 + 9.0 * (-3.0_f64).exp());
        assert!((y - exact).abs() < 1e-11);
    }

    #[test]
    fn ball_average_of_constant() {
        let one = MicroFunction::constant(2, 1.0);
        assert!((ball_average(&one, 5.0, 4).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symbol_of_delta_is_one() {
        let g = MacroGrid::new(1, 2.0, 32).unwrap();
        let mut v = vec![0.0; 32];
        v[16] = 1.0 / g.spacing();
        let (re, im) = fourier_symbol(&MacroField::new(g, v).unwrap(), &[3]).unwrap();
        assert!((re - 1.0).abs() < 1e-14 && im.abs() < 1e-14);
    }
}
