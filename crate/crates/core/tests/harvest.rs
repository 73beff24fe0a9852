use ehcap_core::harvest::HarvestKind;
use ehcap_core::HarvestModel;
use proptest::prelude::*;

fn models() -> Vec<HarvestModel> {
    vec![
        HarvestModel::example1(),
        HarvestModel::constant(0.8).unwrap(),
        HarvestModel::chi_square1(1.3).unwrap(),
        HarvestModel::discrete(vec![0.0, 2.0, 5.0], vec![0.5, 0.3, 0.2]).unwrap(),
        HarvestModel::periodic(vec![HarvestModel::example1(), HarvestModel::chi_square1(0.5).unwrap()], 2)
            .unwrap(),
    ]
}

proptest! {
    #[test]
    fn positive_parts_recombine_to_the_mean(c in 0.0f64..6.0) {
        for m in models() {
            let (up, down) = m.pos_part_moments(c);
            prop_assert!(up >= 0.0 && down >= 0.0);
            prop_assert!((up - down - (m.mean() - c)).abs() < 1e-8, "{m:?} at {c}");
        }
    }

    #[test]
    fn upper_part_is_nonincreasing(c in 0.0f64..5.0, dc in 0.0f64..1.0) {
        for m in models() {
            let (u1, d1) = m.pos_part_moments(c);
            let (u2, d2) = m.pos_part_moments(c + dc);
            prop_assert!(u2 <= u1 + 1e-10);
            prop_assert!(d2 >= d1 - 1e-10);
        }
    }

    #[test]
    fn scaling_scales_the_mean(f in 0.01f64..10.0) {
        for m in models() {
            let s = m.scaled(f).unwrap();
            prop_assert!((s.mean() - f * m.mean()).abs() <= 1e-12 * (1.0 + f * m.mean()));
        }
    }

    #[test]
    fn atoms_preserve_mass_and_mean(q in 1usize..200) {
        for m in models() {
            let atoms = m.atoms(q);
            let mass: f64 = atoms.iter().map(|a| a.1).sum();
            let mean: f64 = atoms.iter().map(|a| a.0 * a.1).sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);
            prop_assert!((mean - m.mean()).abs() < 1e-6 * (1.0 + m.mean()), "{m:?}: {mean}");
        }
    }
}

#[test]
fn sample_means_converge_across_seeds() {
    // Each seed is a 3-standard-error check; a couple of misses in 100 is
    // expected and tolerated.
    let n = 20_000;
    for m in models() {
        let var = {
            let path = m.sample_path(200_000, 999);
            let mu = path.iter().sum::<f64>() / path.len() as f64;
            path.iter().map(|y| (y - mu).powi(2)).sum::<f64>() / path.len() as f64
        };
        let se = (var / n as f64).sqrt();
        let misses = (0..100u64)
            .filter(|&seed| {
                let path = m.sample_path(n, seed);
                let mean = path.iter().sum::<f64>() / n as f64;
                (mean - m.mean()).abs() > 3.0 * se + 1e-12
            })
            .count();
        assert!(misses <= 2, "{m:?}: {misses} misses");
    }
}

#[test]
fn paths_are_reproducible_and_nonnegative() {
    for m in models() {
        let a = m.sample_path(1000, 17);
        assert_eq!(a, m.sample_path(1000, 17));
        if !matches!(m.kind(), HarvestKind::ConstantIid { .. }) {
            assert_ne!(a, m.sample_path(1000, 18), "{m:?}");
        }
        assert!(a.iter().all(|y| *y >= 0.0));
    }
}
