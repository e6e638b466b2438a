//! Randomized invariants.

use proptest::prelude::*;

use scatterlab::greens::{green_full, green_truncated};
use scatterlab::lattice::{ball_count_s, counting_n, enumerate_window, smoothed_count, QuasiMomentum};
use scatterlab::quantize::{momentum_measure, op_matrix_element, top_mass_fraction, Symbol};
use scatterlab::spectral::{perturbed_spectrum, ScattererConfig};
use scatterlab::stats::{gap_excess_count, pair_count, Window};

fn reference() -> QuasiMomentum {
    QuasiMomentum::reference()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn window_enumeration_is_sorted_and_complete(a in 0.0f64..60.0, w in 0.0f64..5.0) {
        let k = reference();
        let s = enumerate_window(&k, (a, a + w)).unwrap();
        let e = s.energies();
        prop_assert!(e.windows(2).all(|p| p[0] <= p[1]));
        prop_assert!(e.iter().all(|&x| x >= a && x <= a + w));
        let below_a = if a > 0.0 { counting_n(&k, a) - s.modes().iter().filter(|m| m.energy == a).count() } else { 0 };
        prop_assert_eq!(e.len(), counting_n(&k, a + w) - below_a);
    }

    #[test]
    fn one_root_per_gap(a in 0.5f64..40.0, w in 0.1f64..2.0, phi in -3.0f64..3.0) {
        let k = reference();
        let cfg = ScattererConfig::new([0.1, 0.2, 0.3], phi).unwrap();
        let roots = perturbed_spectrum(&k, &cfg, (a, a + w)).unwrap();
        for r in &roots {
            prop_assert!(r.n_left < r.lambda && r.lambda < r.n_right);
            prop_assert!(r.residual.abs() < 1e-6);
        }
        for p in roots.windows(2) {
            prop_assert_eq!(p[1].gap_index, p[0].gap_index + 1);
            prop_assert!(p[0].n_right <= p[1].n_left);
        }
    }

    #[test]
    fn roots_increase_with_phi(a in 1.0f64..30.0, p1 in -3.0f64..3.0, p2 in -3.0f64..3.0) {
        let k = reference();
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        prop_assume!(hi - lo > 1e-3);
        let r1 = perturbed_spectrum(&k, &ScattererConfig::new([0.0; 3], lo).unwrap(), (a, a + 0.5)).unwrap();
        let r2 = perturbed_spectrum(&k, &ScattererConfig::new([0.0; 3], hi).unwrap(), (a, a + 0.5)).unwrap();
        prop_assert_eq!(r1.len(), r2.len());
        for (x, y) in r1.iter().zip(&r2) {
            prop_assert!(x.lambda <= y.lambda);
        }
    }

    #[test]
    fn measures_are_probability_measures(lambda in 5.0f64..40.0, width in 0.3f64..2.0) {
        let k = reference();
        let v = green_truncated(&k, [0.3, 0.1, 0.7], lambda, width).unwrap();
        let mu = momentum_measure(&v, true).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        let f = top_mass_fraction(&mu, 3);
        prop_assert!(f > 0.0 && f <= 1.0 + 1e-12);
        let n = v.normalized();
        prop_assert!((n.norm_sq_exact() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_symbol_gives_norm(lambda in 2.0f64..20.0) {
        let k = reference();
        let v = green_full(&k, [0.2, 0.0, 0.5], lambda, 60.0).unwrap();
        let m = op_matrix_element(&Symbol::identity(), &v, &v).unwrap();
        prop_assert!((m.re - v.norm_sq_exact()).abs() < 1e-9 * v.norm_sq_exact());
        prop_assert!(m.im.abs() < 1e-9 * v.norm_sq_exact());
    }

    #[test]
    fn smoothed_count_is_sandwiched(r in 3.0f64..25.0, delta in 0.01f64..0.9) {
        let k = reference();
        let s = smoothed_count(&k, r, delta).unwrap();
        prop_assert!(ball_count_s(&k, r - delta) as f64 <= s + 1e-9);
        prop_assert!(s <= ball_count_s(&k, r + delta) as f64 + 1e-9);
    }

    #[test]
    fn windows_take_values_in_unit_interval(lo in -2.0f64..2.0, w in 0.01f64..3.0, x in -5.0f64..5.0) {
        for win in [Window::indicator(lo, lo + w).unwrap(), Window::smooth(lo, lo + w).unwrap()] {
            let v = win.eval(x);
            prop_assert!((0.0..=1.0).contains(&v));
            if x < lo || x > lo + w {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gap_excess_is_monotone_and_pairs_come_in_twos(g1 in 1.0f64..30.0, g2 in 1.0f64..30.0, d in 0.1f64..3.0) {
        let k = reference();
        let s = enumerate_window(&k, (0.0, 62.0)).unwrap();
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(gap_excess_count(&s, hi, 60.0).unwrap() <= gap_excess_count(&s, lo, 60.0).unwrap());
        prop_assert_eq!(pair_count(&s, d, 60.0).unwrap() % 2, 0);
    }
}
