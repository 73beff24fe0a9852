mod common;

use common::{awgn, mi_atoms};
use ehcap_core::capacity::fixed_sleep_rate;
use ehcap_core::{
    awgn_capacity, hu_capacity, hus_budget, kt_density_check, mutual_information, onoff_decomposition,
    pe_capacity, peak_average_capacity, rate_table, AwgnChannel, HarvestModel, InputDistribution, RateQuery,
    SolverOptions,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn unit() -> AwgnChannel {
    AwgnChannel::new(1.0).unwrap()
}

/// Best symmetric law on at most three points `{-a, 0, a}` with `|a| ≤ peak`
/// and `E[X²] ≤ power`, by exhaustive search.
fn brute_force_small_support(peak: f64, power: f64, sigma2: f64) -> f64 {
    let steps = 60;
    let mut best = 0.0f64;
    for i in 1..=steps {
        let a = peak * i as f64 / steps as f64;
        for j in 1..=steps {
            let q = j as f64 / steps as f64;
            if q * a * a > power {
                continue;
            }
            let atoms = [(-a, 0.5 * q), (0.0, 1.0 - q), (a, 0.5 * q)];
            best = best.max(mi_atoms(&atoms, sigma2));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_awgn(p in 0.0f64..100.0, s in 0.01f64..10.0) {
        let ch = AwgnChannel::new(s).unwrap();
        prop_assert!((awgn_capacity(p, &ch) - 0.5 * (1.0 + p / s).ln()).abs() <= 1e-12);
    }

    #[test]
    fn use_first_never_loses_to_store_first(b1 in 0.01f64..=1.0) {
        let m = HarvestModel::example1();
        let ch = unit();
        let opts = SolverOptions::default();
        let hsu = rate_table(&RateQuery::Hsu { ey: m.mean(), beta1: b1, beta2: 0.0 }, &ch, &opts).unwrap();
        let hus = rate_table(&RateQuery::Hus { model: &m, beta1: b1, beta2: 0.0 }, &ch, &opts).unwrap();
        prop_assert!(hus >= hsu - 1e-12, "{hus} < {hsu}");
        let c = hus_budget(&m, b1, 0.0).unwrap();
        prop_assert!(c >= b1 * m.mean() - 1e-9);
    }

    #[test]
    fn mutual_information_of_small_laws_matches_oracle(
        a in 0.1f64..4.0,
        b in 0.1f64..4.0,
        w in 0.05f64..0.95,
        s in 0.2f64..4.0,
    ) {
        let atoms = [(-a, 0.5 * w), (0.0, 1.0 - w), (b, 0.5 * w)];
        let ch = AwgnChannel::new(s).unwrap();
        let lib = mutual_information(&InputDistribution::from_atoms(&atoms).unwrap(), &ch).unwrap();
        prop_assert!((lib - mi_atoms(&atoms, s)).abs() < 1e-6);
    }
}

#[test]
fn two_point_information_matches_monte_carlo() {
    // h(W) = E[-ln q(W)] estimated from 10^7 draws of W = ±1 + N.
    let mut rng = StdRng::seed_from_u64(2024);
    let n = 10_000_000u64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = 0.0;
    for _ in 0..n {
        let x = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let w = x + rng.sample::<f64, _>(StandardNormal);
        let q = 0.5 * norm * ((-0.5 * (w - 1.0).powi(2)).exp() + (-0.5 * (w + 1.0).powi(2)).exp());
        sum -= q.ln();
    }
    let mc = sum / n as f64 - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    let lib = mutual_information(&InputDistribution::symmetric_two_point(1.0), &unit()).unwrap();
    assert!((lib - mc).abs() < 1e-3, "{lib} vs {mc}");
}

#[test]
fn small_peak_solver_matches_exhaustive_search() {
    let opts = SolverOptions::default();
    for sigma2 in [1.0, 2.0] {
        let ch = AwgnChannel::new(sigma2).unwrap();
        for ratio in [0.3, 0.5, 1.0] {
            let peak = ratio * ch.sigma();
            for power in [f64::INFINITY, peak * peak] {
                let r = peak_average_capacity(peak, power, &ch, &opts).unwrap();
                let oracle = brute_force_small_support(peak, power, sigma2);
                assert!((r.rate - oracle).abs() < 1e-4, "A={peak} P={power}: {} vs {oracle}", r.rate);
                assert!(r.certificate_gap <= 1e-4);
            }
        }
    }
}

#[test]
fn binding_average_constraint_at_unit_peak() {
    // With P = A²/2 the three-point family still contains the optimum.
    let ch = unit();
    let r = peak_average_capacity(1.0, 0.5, &ch, &SolverOptions::default()).unwrap();
    let oracle = brute_force_small_support(1.0, 0.5, 1.0);
    assert!(r.rate >= oracle - 1e-4, "{} vs {oracle}", r.rate);
    assert!(r.dist.second_moment() <= 0.5 + 1e-9);
    assert!(r.certificate_gap <= 1e-4);
}

#[test]
fn harvest_use_is_dominated_by_the_ideal_buffer() {
    let ch = unit();
    let opts = SolverOptions::default();
    let m = HarvestModel::example1();
    let hu = hu_capacity(&m, &ch, &opts).unwrap();
    assert!(hu.rate <= awgn(m.mean(), 1.0) + 1e-6);
    assert!(awgn(m.mean(), 1.0) - hu.rate > 1e-3, "{}", hu.rate);
    assert!(hu.certificate_gap() <= 1e-4);
    let small = HarvestModel::discrete(vec![0.1, 0.4], vec![0.5, 0.5]).unwrap();
    let r = hu_capacity(&small, &ch, &opts).unwrap();
    assert!(r.rate <= awgn(small.mean(), 1.0) + 1e-6);
}

#[test]
fn constant_harvest_is_a_peak_and_power_limited_channel() {
    let ch = unit();
    let opts = SolverOptions::default();
    for y in [0.3, 1.0, 2.5] {
        let hu = hu_capacity(&HarvestModel::constant(y).unwrap(), &ch, &opts).unwrap();
        let direct = peak_average_capacity(y.sqrt(), y, &ch, &opts).unwrap();
        assert!((hu.rate - direct.rate).abs() < 1e-6);
    }
}

#[test]
fn finite_buffer_bound_rises_to_the_ideal_rate() {
    let ch = unit();
    let opts = SolverOptions::default();
    let ey = 1.0;
    let mut last = 0.0;
    for gamma in [0.25, 1.0, 4.0, 16.0, 64.0] {
        let r = rate_table(&RateQuery::FiniteBufferBound { ey, gamma }, &ch, &opts).unwrap();
        assert!(r >= last - 1e-6, "gamma {gamma}: {r} < {last}");
        assert!(r <= awgn(ey, 1.0) + 1e-6);
        last = r;
    }
    assert!((awgn(ey, 1.0) - last).abs() < 1e-4, "{last}");
}

#[test]
fn processing_energy_without_overhead_is_the_awgn_channel() {
    let ch = unit();
    let opts = SolverOptions::default();
    for ey in [0.5, 2.0] {
        for sleep in [false, true] {
            let r = pe_capacity(ey, 0.0, &ch, sleep, &opts).unwrap();
            assert!((r.rate - awgn(ey, 1.0)).abs() < 1e-3, "{ey} {sleep}: {}", r.rate);
        }
    }
}

#[test]
fn sleeping_beats_every_fixed_sleep_policy() {
    let ch = unit();
    let opts = SolverOptions::default();
    for ey in [0.5, 1.5, 4.0] {
        let r = pe_capacity(ey, 1.0, &ch, true, &opts).unwrap();
        assert!(r.certificate_gap <= 1e-4);
        for p in [0.0, 0.25, 0.5, 0.75] {
            let fixed = fixed_sleep_rate(ey, 1.0, p, &ch).unwrap();
            assert!(r.rate >= fixed - 1e-6, "ey {ey} p {p}: {} < {fixed}", r.rate);
        }
    }
    let low = pe_capacity(0.5, 1.0, &ch, true, &opts).unwrap();
    assert_eq!(pe_capacity(0.5, 1.0, &ch, false, &opts).unwrap().rate, 0.0);
    assert!(low.rate > 0.0);
    assert!(low.sleep_probability() > 0.5);
}

#[test]
fn processing_energy_capacity_is_monotone_and_concave() {
    let ch = unit();
    let opts = SolverOptions::default();
    let grid: Vec<f64> = (1..=5).map(|i| 0.6 * i as f64).collect();
    let rates: Vec<f64> =
        grid.iter().map(|&ey| pe_capacity(ey, 1.0, &ch, true, &opts).unwrap().rate).collect();
    for w in rates.windows(2) {
        assert!(w[1] >= w[0] - 2e-3, "{rates:?}");
    }
    for w in rates.windows(3) {
        assert!(w[1] >= 0.5 * (w[0] + w[2]) - 2e-3, "{rates:?}");
    }
}

#[test]
fn high_budget_solution_is_near_gaussian() {
    let ch = unit();
    let (ey, ez) = (20.0, 1.0);
    let r = pe_capacity(ey, ez, &ch, true, &SolverOptions::default()).unwrap();
    assert!((r.rate - awgn(ey - ez, 1.0)).abs() < 1e-2, "{}", r.rate);
    let kt = kt_density_check(&r, ey, ez, &ch).unwrap();
    assert!(kt.cost_ok, "{kt:?}");
    assert!(kt.k1 > 0.0 && kt.k2 > 0.0 && kt.max_deviation.is_finite());
    let on = r.dist.off_zero_part().unwrap();
    let expected = (ey - (1.0 - r.sleep_probability()) * ez) / (1.0 - r.sleep_probability());
    assert!((on.second_moment() - expected).abs() < 1e-3 * expected);
}

#[test]
fn onoff_parts_recombine() {
    let ch = unit();
    let on = InputDistribution::gaussian(1.0, 801).unwrap();
    let x = InputDistribution::with_sleep(0.25, &on).unwrap();
    let parts = onoff_decomposition(&x, &ch).unwrap();
    assert!((parts.total - (parts.on_off + 0.75 * parts.on_part)).abs() < 2e-3, "{parts:?}");
    assert!((parts.on_part - awgn(1.0, 1.0)).abs() < 1e-4);

    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..10 {
        let p = rng.random_range(0.0..1.0);
        let v = rng.random_range(0.1..10.0);
        let on = InputDistribution::gaussian(v, 801).unwrap();
        let parts = onoff_decomposition(&InputDistribution::with_sleep(p, &on).unwrap(), &ch).unwrap();
        assert!((parts.recombined() - parts.total).abs() < 2e-3, "p={p} v={v}: {parts:?}");
    }

    let none = onoff_decomposition(&on, &ch).unwrap();
    assert!(none.on_off.abs() < 1e-9 && (none.total - none.on_part).abs() < 1e-6);
    let all = onoff_decomposition(&InputDistribution::zero(), &ch).unwrap();
    assert_eq!((all.total, all.on_off, all.on_part), (0.0, 0.0, 0.0));
}
