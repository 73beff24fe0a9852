//! Cost-constrained Blahut-Arimoto on a fixed input grid.
//!
//! The channel is discretised on a uniform output grid fine enough that the
//! trapezoid rule is essentially exact for the Gaussian kernel, which turns
//! the problem into a discrete memoryless channel. Each sweep performs the
//! alternating-maximisation update
//!
//! ```text
//! p_i ← p_i · exp(D_i − λ b_i) / Z
//! ```
//!
//! where `D_i = D(W(·|x_i) ‖ q)` and the multiplier `λ ≥ 0` is re-solved by
//! bisection every sweep so that the new law meets `Σ p_i b_i ≤ P`. Every
//! iterate is feasible, so `I(p)` is a lower bound on the capacity, and
//!
//! ```text
//! U = min_{λ ≥ 0} max_i [D_i − λ (b_i − P)]
//! ```
//!
//! is an upper bound. `U − I(p)` is the reported certificate gap.

use super::{AwgnChannel, SolverOptions};
use crate::error::{Error, Result};

/// Output grid extends this many noise standard deviations past the inputs.
const OUTPUT_SPAN_SIGMAS: f64 = 10.0;
/// The certificate is evaluated every this many sweeps.
const CHECK_EVERY: usize = 4;

pub(crate) struct Problem<'a> {
    pub inputs: &'a [f64],
    pub costs: &'a [f64],
    /// Average-cost budget; `None` when no average constraint applies.
    pub budget: Option<f64>,
    /// Starting law; uniform when absent.
    pub init: Option<&'a [f64]>,
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub probs: Vec<f64>,
    pub rate: f64,
    pub gap: f64,
    pub lambda: f64,
    pub iterations: usize,
}

/// Banded channel matrix: row `i` holds `W(w_j | x_i)` for `j` in
/// `start[i] .. start[i] + values[i].len()`.
struct Kernel {
    n_out: usize,
    start: Vec<usize>,
    values: Vec<Vec<f64>>,
    /// `Σ_j W ln W` per row.
    neg_entropy: Vec<f64>,
}

impl Kernel {
    fn new(inputs: &[f64], channel: &AwgnChannel, step_sigmas: f64) -> Self {
        let sigma = channel.sigma();
        let h = step_sigmas * sigma;
        let lo = inputs.iter().copied().fold(f64::INFINITY, f64::min) - OUTPUT_SPAN_SIGMAS * sigma;
        let hi = inputs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + OUTPUT_SPAN_SIGMAS * sigma;
        let n_out = ((hi - lo) / h).ceil() as usize + 1;
        let inv_two_var = 0.5 / channel.sigma2();
        let mut start = Vec::with_capacity(inputs.len());
        let mut values = Vec::with_capacity(inputs.len());
        let mut neg_entropy = Vec::with_capacity(inputs.len());
        for &x in inputs {
            let j0 = (((x - OUTPUT_SPAN_SIGMAS * sigma - lo) / h).floor().max(0.0)) as usize;
            let j1 = ((((x + OUTPUT_SPAN_SIGMAS * sigma - lo) / h).ceil()) as usize).min(n_out - 1);
            let mut row: Vec<f64> = (j0..=j1)
                .map(|j| {
                    let d = lo + j as f64 * h - x;
                    (-d * d * inv_two_var).exp()
                })
                .collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            neg_entropy.push(row.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum());
            start.push(j0);
            values.push(row);
        }
        Self { n_out, start, values, neg_entropy }
    }

    fn output(&self, p: &[f64], q: &mut [f64]) {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (i, &pi) in p.iter().enumerate() {
            if pi > 0.0 {
                let s = self.start[i];
                for (qj, w) in q[s..].iter_mut().zip(&self.values[i]) {
                    *qj += pi * w;
                }
            }
        }
    }

    /// `D_i = Σ_j W_ij ln(W_ij / q_j)` for every row.
    fn divergences(&self, ln_q: &[f64], d: &mut [f64]) {
        for (i, di) in d.iter_mut().enumerate() {
            let s = self.start[i];
            let cross: f64 = self.values[i].iter().zip(&ln_q[s..]).map(|(w, l)| w * l).sum();
            *di = self.neg_entropy[i] - cross;
        }
    }
}

/// Upper bound `min_{λ≥0} max_i [D_i − λ(b_i − P)]`.
fn dual_bound(d: &[f64], costs: &[f64], budget: Option<f64>, hint: f64, bracket: f64) -> f64 {
    let Some(budget) = budget else {
        return d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    };
    let bound = |lambda: f64| {
        d.iter().zip(costs).map(|(di, bi)| di - lambda * (bi - budget)).fold(f64::NEG_INFINITY, f64::max)
    };
    // Convex and piecewise linear in λ: golden-section search.
    let (mut a, mut b) = (0.0, (4.0 * hint).max(bracket));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut e = a + ratio * (b - a);
    let (mut fc, mut fe) = (bound(c), bound(e));
    for _ in 0..80 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - ratio * (b - a);
            fc = bound(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + ratio * (b - a);
            fe = bound(e);
        }
    }
    bound(0.0).min(bound(hint)).min(fc).min(fe)
}

/// `log Σ exp(v_i)` over finite entries.
fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Normalised `exp(logits − λ b)` and its mean cost.
fn tilt(logits: &[f64], costs: &[f64], lambda: f64, out: &mut [f64]) -> f64 {
    let z = log_sum_exp(logits.iter().zip(costs).map(|(l, b)| l - lambda * b));
    let mut cost = 0.0;
    for ((o, l), b) in out.iter_mut().zip(logits).zip(costs) {
        *o = (l - lambda * b - z).exp();
        cost += *o * b;
    }
    cost
}

/// Smallest `λ ≥ 0` whose tilted law meets the budget; the law itself is
/// written to `out`. Newton steps from `guess`, safeguarded by a bracket.
fn solve_multiplier(
    logits: &[f64],
    costs: &[f64],
    budget: Option<f64>,
    guess: f64,
    bracket: f64,
    out: &mut [f64],
) -> f64 {
    let Some(budget) = budget else {
        tilt(logits, costs, 0.0, out);
        return 0.0;
    };
    if tilt(logits, costs, 0.0, out) <= budget {
        return 0.0;
    }
    let tol = 1e-13 * budget.max(1e-300);
    // Invariant: cost(lo) > budget >= cost(hi).
    let mut lo = 0.0;
    let mut hi = guess.max(bracket);
    while tilt(logits, costs, hi, out) > budget {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return hi;
        }
    }
    let mut lambda = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let cost = tilt(logits, costs, lambda, out);
        if cost > budget {
            lo = lambda;
        } else {
            hi = lambda;
            if budget - cost <= tol {
                return lambda;
            }
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        // d cost / d λ = -Var(b).
        let var: f64 = out.iter().zip(costs).map(|(o, b)| o * (b - cost) * (b - cost)).sum();
        let step = lambda + (cost - budget) / var;
        lambda = if var > 0.0 && step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    tilt(logits, costs, hi, out);
    hi
}

/// Output law `q`, divergences `D_i` and `I(p) = Σ p_i D_i`.
fn evaluate(kernel: &Kernel, p: &[f64], ln_q: &mut [f64], d: &mut [f64]) -> f64 {
    kernel.output(p, ln_q);
    for v in ln_q.iter_mut() {
        *v = v.max(f64::MIN_POSITIVE).ln();
    }
    kernel.divergences(ln_q, d);
    p.iter().zip(d.iter()).map(|(a, b)| a * b).sum()
}

/// Floor on the mass of any grid point inside an update, so a point pushed
/// to underflow can still come back.
const MIN_PROB: f64 = 1e-250;

/// Weights of the uniform-input output law mixed into `q` for extra bounds.
const SMOOTHING: [f64; 3] = [1e-9, 1e-7, 1e-5];

/// Over-relaxation bounds for the exponent of the update.
const MAX_RELAXATION: f64 = 16.0;
const RELAXATION_GROWTH: f64 = 1.25;

pub(crate) fn blahut_arimoto(
    problem: &Problem<'_>,
    channel: &AwgnChannel,
    opts: &SolverOptions,
) -> Result<Solution> {
    let n = problem.inputs.len();
    debug_assert_eq!(n, problem.costs.len());
    let kernel = Kernel::new(problem.inputs, channel, opts.output_step);
    let bracket = opts.lambda_bracket / channel.sigma2();

    let mut p: Vec<f64> = match problem.init {
        Some(init) => init.to_vec(),
        None => vec![1.0; n],
    };
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);

    let mut ln_q = vec![0.0; kernel.n_out];
    let mut d = vec![0.0; n];
    let mut d_next = vec![0.0; n];
    let mut logits = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut lambda = 0.0;
    let mut iterations = 0;

    // A starting law that violates the budget is first projected onto it.
    if let Some(budget) = problem.budget {
        let cost: f64 = p.iter().zip(problem.costs).map(|(a, b)| a * b).sum();
        if cost > budget {
            for (l, pi) in logits.iter_mut().zip(&p) {
                *l = pi.ln();
            }
            lambda = solve_multiplier(&logits, problem.costs, problem.budget, 0.0, bracket, &mut next);
            std::mem::swap(&mut p, &mut next);
        }
    }

    let mut wide = vec![0.0; kernel.n_out];
    kernel.output(&vec![1.0 / n as f64; n], &mut wide);
    let mut mixed = vec![0.0; kernel.n_out];
    let mut d_mixed = vec![0.0; n];

    let mut rate = evaluate(&kernel, &p, &mut ln_q, &mut d);
    let mut relax = 1.0;
    let mut upper = f64::INFINITY;
    let gap = loop {
        let last = iterations >= opts.max_iterations;
        if iterations % CHECK_EVERY == 0 || last {
            // Every output law gives a valid upper bound, so keep the best.
            // Mixing a little of the widest output law into `q` guards the
            // bound against grid points the iterate has not reached yet.
            upper = upper.min(dual_bound(&d, problem.costs, problem.budget, lambda, bracket));
            for eps in SMOOTHING {
                for ((m, l), w) in mixed.iter_mut().zip(&ln_q).zip(&wide) {
                    *m = ((1.0 - eps) * l.exp() + eps * w).max(f64::MIN_POSITIVE).ln();
                }
                kernel.divergences(&mixed, &mut d_mixed);
                upper = upper.min(dual_bound(&d_mixed, problem.costs, problem.budget, lambda, bracket));
            }
            let gap = (upper - rate).max(0.0);
            if gap <= opts.tolerance || last {
                break gap;
            }
        }

        // Over-relaxed update `p ∝ p exp(μ D − λ b)`. A step that lowers the
        // rate is retried with μ = 1, the plain update, which never does.
        loop {
            for ((l, pi), di) in logits.iter_mut().zip(&p).zip(&d) {
                *l = pi.max(MIN_PROB).ln() + relax * di;
            }
            let mu =
                solve_multiplier(&logits, problem.costs, problem.budget, lambda * relax, bracket, &mut next);
            let candidate = evaluate(&kernel, &next, &mut ln_q, &mut d_next);
            if candidate >= rate || relax == 1.0 {
                lambda = mu / relax;
                rate = candidate;
                std::mem::swap(&mut p, &mut next);
                std::mem::swap(&mut d, &mut d_next);
                relax = (relax * RELAXATION_GROWTH).min(MAX_RELAXATION);
                break;
            }
            relax = 1.0;
        }
        iterations += 1;
    };

    if gap > opts.accept_gap {
        return Err(Error::NonConvergence { iterations, gap });
    }
    Ok(Solution { probs: p, rate: rate.max(0.0), gap, lambda, iterations })
}

/// Merges runs of adjacent grid atoms whose mass exceeds `threshold` into
/// their centroids. Runs are split at interior local minima so that a smooth
/// hump and a sharp spike next to it stay separate.
pub(crate) fn consolidate(inputs: &[f64], probs: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut current: Option<(f64, f64)> = None;
    for i in 0..probs.len() {
        let p = probs[i];
        if p <= threshold {
            if let Some(g) = current.take() {
                groups.push(g);
            }
            continue;
        }
        let is_valley =
            i > 0 && i + 1 < probs.len() && probs[i - 1] > threshold && p < probs[i - 1] && p < probs[i + 1];
        if is_valley {
            // Split the valley atom evenly between the two sides.
            let (m, s) = current.take().unwrap_or((0.0, 0.0));
            groups.push((m + 0.5 * p, s + 0.5 * p * inputs[i]));
            current = Some((0.5 * p, 0.5 * p * inputs[i]));
            continue;
        }
        let (m, s) = current.unwrap_or((0.0, 0.0));
        current = Some((m + p, s + p * inputs[i]));
    }
    if let Some(g) = current {
        groups.push(g);
    }
    let total: f64 = groups.iter().map(|(m, _)| m).sum();
    groups.into_iter().map(|(m, s)| (s / m, m / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_symmetric_inputs_far_apart_give_ln2() {
        let ch = AwgnChannel::new(1.0).unwrap();
        let inputs = [-30.0, 30.0];
        let costs = [0.0, 0.0];
        let sol = blahut_arimoto(
            &Problem { inputs: &inputs, costs: &costs, budget: None, init: None },
            &ch,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((sol.rate - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn budget_is_respected() {
        let ch = AwgnChannel::new(1.0).unwrap();
        let inputs: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.1).collect();
        let costs: Vec<f64> = inputs.iter().map(|x| x * x).collect();
        let sol = blahut_arimoto(
            &Problem { inputs: &inputs, costs: &costs, budget: Some(1.0), init: None },
            &ch,
            &SolverOptions::default(),
        )
        .unwrap();
        let cost: f64 = sol.probs.iter().zip(&costs).map(|(p, c)| p * c).sum();
        assert!(cost <= 1.0 + 1e-9, "{cost}");
        assert!(sol.lambda > 0.0);
    }

    #[test]
    fn consolidation_merges_runs() {
        let x = [-1.0, -0.9, 0.0, 0.9, 1.0];
        let p = [0.3, 0.2, 1e-9, 0.2, 0.3];
        let m = consolidate(&x, &p, 1e-6);
        assert_eq!(m.len(), 2);
        assert!((m[0].0 + 0.96).abs() < 1e-12 && (m[0].1 - 0.5).abs() < 1e-12);
        assert!((m[1].0 - 0.96).abs() < 1e-12);
    }
}
