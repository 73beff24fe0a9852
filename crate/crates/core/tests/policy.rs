use ehcap_core::policy::SymbolLaw;
use ehcap_core::rng::SlotRng;
use ehcap_core::{
    budget, Architecture, Backoff, BudgetFamily, BudgetInputs, BufferConfig, HarvestModel, InputDistribution,
    Policy, ENERGY_TOLERANCE,
};
use proptest::prelude::*;

fn policies() -> Vec<Policy> {
    let z = HarvestModel::constant(0.4).unwrap();
    vec![
        Policy::truncated_gaussian(0.7).unwrap(),
        Policy::budgeted_gaussian(2.0).unwrap(),
        Policy::HarvestPeak,
        Policy::sleep_wake(0.3, SymbolLaw::Gaussian { variance: 1.5 }, z.clone()).unwrap(),
        Policy::sleep_wake(0.0, SymbolLaw::Tabulated(InputDistribution::gaussian(2.0, 201).unwrap()), z)
            .unwrap(),
        Policy::HarvestUse {
            laws: vec![
                (0.5, InputDistribution::symmetric_two_point(0.7)),
                (2.0, InputDistribution::from_atoms(&[(-1.0, 0.3), (0.0, 0.2), (1.4, 0.5)]).unwrap()),
            ],
        },
    ]
}

proptest! {
    #[test]
    fn symbols_never_overspend(e in 0.0f64..5.0, y_pick in 0usize..2, seed: u64, slot in 0u64..1_000_000) {
        let y = [0.5, 2.0][y_pick];
        let draws = SlotRng::new(seed, slot);
        for p in policies() {
            let s = p.next_symbol(e, y, &draws).unwrap();
            prop_assert!(s.t <= e + ENERGY_TOLERANCE, "{p:?}: {s:?}");
            prop_assert!(s.t >= 0.0);
            if s.slept {
                prop_assert_eq!((s.x, s.t), (0.0, 0.0));
            }
            match p {
                Policy::TruncatedGaussian { .. } | Policy::BudgetedGaussian { .. } => {
                    prop_assert!((s.t - s.x * s.x).abs() <= ENERGY_TOLERANCE);
                }
                Policy::HarvestUse { .. } | Policy::HarvestPeak => {
                    prop_assert!(s.x.abs() <= y.sqrt() + 1e-12);
                }
                Policy::SleepWake { .. } => {
                    if s.x != 0.0 {
                        prop_assert!((s.t - (s.x * s.x + 0.4)).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn unlimited_energy_never_truncates(seed: u64, slot: u64) {
        let s = Policy::truncated_gaussian(1.0).unwrap().next_symbol(f64::INFINITY, 0.0, &SlotRng::new(seed, slot)).unwrap();
        prop_assert!(!s.truncated);
        prop_assert_eq!(s.t, s.x * s.x);
    }

    #[test]
    fn budgets_back_off_and_clamp(ey in 0.0f64..10.0, ez in 0.0f64..3.0, b1 in 0.01f64..=1.0, b2 in 0.0f64..2.0) {
        let inputs = BudgetInputs { ey, ez, beta1: b1, beta2: b2, c: 0.0 };
        for family in [BudgetFamily::Ideal, BudgetFamily::ProcessingEnergy, BudgetFamily::Hsu] {
            let b = budget(family, inputs, Backoff::default());
            let raw = budget(family, inputs, Backoff::none());
            prop_assert!(b >= 0.0 && b <= raw);
            prop_assert!((raw - b - 1e-3 * raw).abs() <= 1e-12 * (1.0 + raw));
        }
    }
}

#[test]
fn budget_examples() {
    let eps = Backoff::default();
    let ideal = budget(BudgetFamily::Ideal, BudgetInputs { ey: 1.0, ..Default::default() }, eps);
    assert!((ideal - 0.999).abs() < 1e-15);
    let pe =
        budget(BudgetFamily::ProcessingEnergy, BudgetInputs { ey: 1.0, ez: 1.0, ..Default::default() }, eps);
    assert_eq!(pe, 0.0);
    let hsu = budget(
        BudgetFamily::Hsu,
        BudgetInputs { ey: 1.0, beta1: 0.7, beta2: 0.1, ..Default::default() },
        eps,
    );
    assert!((hsu - 0.6 * 0.999).abs() < 1e-12);
}

#[test]
fn missing_harvest_law_is_an_error() {
    let p = Policy::HarvestUse { laws: vec![(0.5, InputDistribution::symmetric_two_point(0.7))] };
    assert!(p.next_symbol(1.0, 0.75, &SlotRng::new(1, 1)).is_err());
}

#[test]
fn sleep_wake_without_sleep_or_overhead_matches_truncated_gaussian() {
    let m = HarvestModel::example1();
    let ch = ehcap_core::AwgnChannel::new(1.0).unwrap();
    let tg = Policy::truncated_gaussian(0.6).unwrap();
    let sw =
        Policy::sleep_wake(0.0, SymbolLaw::Gaussian { variance: 0.6 }, HarvestModel::constant(0.0).unwrap())
            .unwrap();
    for arch in [Architecture::Hsu, Architecture::Hus, Architecture::Hu] {
        let cfg = BufferConfig::new(arch, 0.9, 0.01, 30.0).unwrap();
        let a = ehcap_core::sim::run(&m, &cfg, &tg, &ch, 20_000, 42).unwrap();
        let b = ehcap_core::sim::run(&m, &cfg, &sw, &ch, 20_000, 42).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.t, b.t);
        assert_eq!(a.e, b.e);
        assert_eq!(a.w, b.w);
    }
}

#[test]
fn always_sleep_is_silent() {
    let p = Policy::always_sleep();
    for slot in 0..100 {
        let s = p.next_symbol(3.0, 1.0, &SlotRng::new(9, slot)).unwrap();
        assert!(s.slept && s.x == 0.0 && s.t == 0.0);
    }
}
