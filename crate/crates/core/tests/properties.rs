mod common;

use common::{noisy_trajectory, random_forcing, random_roots, rng, spec_from_roots};
use proptest::prelude::*;
use ulam_core::constants::{best_constant, closed_form_small_order, tail_bound, DEFAULT_TOL};
use ulam_core::oracle::reference_sum;
use ulam_core::poly;
use ulam_core::shadowing::{shadow_coefficients, shadow_direct};
use ulam_core::vandermonde::{
    build, e_term, particular_sequence, solve_vandermonde, VandermondeData,
};
use ulam_core::{
    characteristic_roots, residuals, simulate, Complex64, Field, Forcing, Norm, RootConfig,
    RootSet, Series, ToleranceConfig,
};

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn roots_rebuild_the_polynomial(seed in any::<u64>(), p in 1usize..=8, real in any::<bool>()) {
        let mut r = rng(seed);
        let truth = random_roots(&mut r, p, 0.2, 10.0, 0.3, real);
        let spec = spec_from_roots(&truth, real, 1, Norm::Sup);
        let found = characteristic_roots(&spec, &RootConfig::default()).unwrap();
        let q = spec.characteristic_polynomial();
        let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for z in &found.roots {
            prop_assert!(poly::eval(&q, *z).norm() <= 1e-10 * scale);
        }
        let rebuilt = poly::from_roots(&found.roots);
        for (a, b) in rebuilt.iter().zip(&q) {
            prop_assert!((a - b).norm() <= 1e-8 * scale, "{a} vs {b}");
        }
        if real {
            // conjugate closure
            for z in &found.roots {
                let twin = found.roots.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(twin <= 1e-8 * (1.0 + z.norm()));
            }
        }
    }

    #[test]
    fn simulate_and_residuals_round_trip(seed in any::<u64>(), p in 1usize..=4, dim in 1usize..=3) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 0.5, 1.5, 0.2, true);
        let spec = spec_from_roots(&roots, true, dim, Norm::Euclid);
        let init = random_forcing(&mut r, p, dim, 1.0, true, Norm::Euclid);
        let f = random_forcing(&mut r, 25, dim, 0.3, true, Norm::Euclid);
        let traj = simulate(&spec, &init, &Forcing::new(f.clone(), Norm::Euclid), 25 + p).unwrap();
        let back = residuals(&spec, &traj).unwrap();
        let scale = 1.0 + traj.values.max_norm(Norm::Sup);
        for n in 0..25 {
            for c in 0..dim {
                prop_assert!((back.get(n)[c] - f.get(n)[c]).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn laplace_expansion_of_the_determinant(seed in any::<u64>(), p in 2usize..=8) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 0.3, 4.0, 0.2, false);
        let data = VandermondeData::from_nodes(&roots);
        // expansion along the last column (powers p-1)
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..p {
            let sign = if (k + p) % 2 == 1 { 1.0 } else { -1.0 };
            acc += data.reduced[k] * roots[k].powi(p as i32 - 1) * sign;
        }
        prop_assert!(rel(acc, data.det) <= 1e-9, "{acc} vs {}", data.det);
    }

    #[test]
    fn e_terms_obey_the_geometric_bound(seed in any::<u64>(), p in 1usize..=6, s in 1usize..200) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 1.05, 6.0, 0.1, false);
        let data = VandermondeData::from_nodes(&roots);
        let rho = roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let bound: f64 = data.reduced.iter().map(|v| v.norm()).sum::<f64>() * rho.powi(-(s as i32));
        prop_assert!(e_term(&data, s).magnitude <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn vandermonde_solve_round_trip(seed in any::<u64>(), p in 1usize..=6, dim in 1usize..=2) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 1.1, 3.0, 0.3, false);
        let set = RootSet::from_roots(&roots, &ToleranceConfig::default());
        let coeffs = random_forcing(&mut r, p, dim, 1.0, false, Norm::Sup);
        let mut rhs = Series::zeros(dim, p);
        for n in 0..p {
            for c in 0..dim {
                rhs.get_mut(n)[c] = (0..p).map(|k| coeffs.get(k)[c] * set.roots[k].powi(n as i32)).sum();
            }
        }
        let sol = solve_vandermonde(&set, &rhs).unwrap();
        prop_assert!(!sol.ill_conditioned);
        // compare against the truth in root order of the set
        for k in 0..p {
            for c in 0..dim {
                prop_assert!((sol.coefficients.get(k)[c] - coeffs.get(k)[c]).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn particular_solution_solves_the_forced_equation(seed in any::<u64>(), p in 1usize..=5) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 0.6, 1.4, 0.2, false);
        let spec = spec_from_roots(&roots, false, 1, Norm::Sup);
        let set = characteristic_roots(&spec, &RootConfig::default()).unwrap();
        let data = build(&set).unwrap();
        let f = Forcing::new(random_forcing(&mut r, 30, 1, 1.0, false, Norm::Sup), Norm::Sup);
        let xp = particular_sequence(&data, &f, 30).unwrap();
        for n in 0..p {
            prop_assert!(xp.get(n)[0].norm() <= 1e-12);
        }
        let back = residuals(&spec, &ulam_core::Trajectory::new(xp.clone())).unwrap();
        let scale = 1.0 + xp.max_norm(Norm::Sup);
        for n in 0..30 - p {
            prop_assert!((back.get(n)[0] - f.get(n)[0]).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn partial_sums_increase_and_interval_holds(seed in any::<u64>(), p in 1usize..=5) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 1.2, 5.0, 0.2, false);
        let set = RootSet::from_roots(&roots, &ToleranceConfig::default());
        let data = build(&set).unwrap();
        let kr = best_constant(&set, &data, 1e-8).unwrap();
        let mut prev = 0.0;
        for s in 1..=kr.terms_used {
            let cur = reference_sum(&data, s);
            prop_assert!(cur >= prev * (1.0 - 1e-14));
            prev = cur;
        }
        let long = reference_sum(&data, 4 * kr.terms_used);
        let slack = 1e-12 * kr.upper().max(1.0);
        prop_assert!(long >= kr.value - slack && long <= kr.upper() + slack);
        prop_assert!(tail_bound(&set, &data, kr.terms_used).unwrap() <= 1e-8);
    }

    #[test]
    fn two_positive_roots_match_the_classical_value(r1 in 1.05f64..8.0, r2 in 1.05f64..8.0) {
        prop_assume!((r1 - r2).abs() >= 0.05);
        let set = RootSet::from_roots(
            &[Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)],
            &ToleranceConfig::default(),
        );
        let kr = best_constant(&set, &build(&set).unwrap(), DEFAULT_TOL).unwrap();
        let want = 1.0 / ((r1 - 1.0) * (r2 - 1.0));
        prop_assert!((kr.value - want).abs() <= 1e-10 * want.max(1.0), "{} vs {want}", kr.value);
    }

    #[test]
    fn constant_ignores_root_order(seed in any::<u64>(), p in 2usize..=6) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 1.2, 4.0, 0.2, false);
        let tol = ToleranceConfig::default();
        let base = {
            let data = VandermondeData::from_nodes(&roots);
            best_constant(&RootSet::from_roots(&roots, &tol), &data, DEFAULT_TOL).unwrap().value
        };
        let mut perm = roots.clone();
        perm.reverse();
        perm.rotate_left(seed as usize % p);
        let data = VandermondeData::from_nodes(&perm);
        let other = best_constant(&RootSet::from_roots(&perm, &tol), &data, DEFAULT_TOL).unwrap().value;
        prop_assert!((base - other).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn small_order_closed_forms_agree(seed in any::<u64>(), p in 2usize..=3) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 1.2, 5.0, 0.2, false);
        let set = RootSet::from_roots(&roots, &ToleranceConfig::default());
        let kr = best_constant(&set, &build(&set).unwrap(), DEFAULT_TOL).unwrap();
        let closed = closed_form_small_order(&set, DEFAULT_TOL).unwrap();
        prop_assert!((kr.value - closed).abs() <= 2.0 * DEFAULT_TOL * kr.value.max(1.0));
    }

    #[test]
    fn real_field_shadow_is_real(seed in any::<u64>(), p in 1usize..=4) {
        let mut r = rng(seed);
        let roots = random_roots(&mut r, p, 1.2, 4.0, 0.2, true);
        let spec = spec_from_roots(&roots, true, 1, Norm::Sup);
        prop_assert_eq!(spec.field(), Field::Real);
        let set = characteristic_roots(&spec, &RootConfig::default()).unwrap();
        let data = build(&set).unwrap();
        let kr = best_constant(&set, &data, DEFAULT_TOL).unwrap();
        let traj = noisy_trajectory(&mut r, &spec, 40, 5, 0.1);
        let direct = shadow_direct(&spec, &set, &data, &traj, &kr).unwrap();
        prop_assert!(direct.shadow.values.max_imag() <= 1e-10);
        let coeff = shadow_coefficients(&spec, &set, &data, &traj).unwrap();
        prop_assert!(coeff.shadow.max_imag() <= 1e-10);
    }
}
