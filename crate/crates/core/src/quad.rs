//! Numerical integration used across the crate.

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    const MAX_DEPTH: usize = 48;
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol, 0usize)];
    let mut intervals = 0usize;
    while let Some((lo, hi, eps, depth)) = stack.pop() {
        intervals += 1;
        let (val, err) = gk15(&f, lo, hi);
        if err <= eps.max(1e-15 * val.abs()) {
            total += val;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure { intervals });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * eps, depth + 1));
            stack.push((mid, hi, 0.5 * eps, depth + 1));
        }
    }
    Ok(total)
}

/// Composite trapezoid rule on `[a, b]`, doubling the number of intervals
/// until two successive estimates agree to `tol`.
pub(crate) fn trapezoid_refine<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut n = 64usize;
    let mut h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b)) + (1..n).map(|i| f(a + i as f64 * h)).sum::<f64>();
    let mut estimate = sum * h;
    let mut doublings = 0;
    loop {
        if 2 * n > max_intervals {
            return Err(Error::QuadratureFailure { intervals: n });
        }
        // New midpoints only.
        let mids: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        doublings += 1;
        let delta = (next - estimate).abs();
        estimate = next;
        if doublings >= 2 && delta < tol {
            return Ok(estimate);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let g = integrate(|x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(), -12.0, 12.0, 1e-12)
            .unwrap();
        assert!((g - 1.0).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_converges_on_smooth_integrand() {
        let v = trapezoid_refine(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-12, 1 << 16).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }
}
