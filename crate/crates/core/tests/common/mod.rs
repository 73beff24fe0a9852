#![allow(dead_code)]

use std::f64::consts::PI;

/// `I(X; X + N)` for a finite input law, by composite Simpson on the output
/// density. Written independently of the library's quadrature.
pub fn mi_atoms(atoms: &[(f64, f64)], sigma2: f64) -> f64 {
    let sigma = sigma2.sqrt();
    let lo = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min) - 12.0 * sigma;
    let hi = atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max) + 12.0 * sigma;
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let norm = 1.0 / (2.0 * PI * sigma2).sqrt();
    let integrand = |w: f64| {
        let q: f64 = atoms.iter().map(|(a, p)| p * norm * (-(w - a).powi(2) / (2.0 * sigma2)).exp()).sum();
        if q > 0.0 {
            -q * q.ln()
        } else {
            0.0
        }
    };
    let mut s = integrand(lo) + integrand(hi);
    for i in 1..n {
        let w = lo + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(w);
    }
    let h_out = s * h / 3.0;
    h_out - 0.5 * (2.0 * PI * std::f64::consts::E * sigma2).ln()
}

pub fn awgn(power: f64, sigma2: f64) -> f64 {
    0.5 * (1.0 + power.max(0.0) / sigma2).ln()
}
