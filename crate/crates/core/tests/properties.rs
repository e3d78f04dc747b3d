use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use resolvent_lab::bounds::{
    accretivity_profile, calc_order, distortion, distortion_coefficients, est1_bound, reciprocal_disk, rho_star,
    t_function,
};
use resolvent_lab::resolvent::solve_slice;
use resolvent_lab::semigroup::{estimate_accretivity_floor, integrate, squeeze_check};
use resolvent_lab::starlike::{empirical_order, starlike_functional, starlike_functional_fd, theorem_vs_empirical, RhoMode};
use resolvent_lab::verify::{run_suite, Suite, SuiteConfig};
use resolvent_lab::{sample_generator, solve_resolvent, Disk, Error, GeneratorSpec, SamplerConfig, SolverOptions};

fn spec() -> impl Strategy<Value = GeneratorSpec> {
    any::<u64>().prop_map(|seed| sample_generator(seed, &SamplerConfig::default()).unwrap())
}

fn point(r_max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..=1.0f64, 0.0..TAU).prop_map(move |(u, t)| Complex64::from_polar(r_max * u.sqrt(), t))
}

fn nonzero_point(r_min: f64, r_max: f64) -> impl Strategy<Value = Complex64> {
    (r_min..=r_max, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn lambda() -> impl Strategy<Value = f64> {
    (-2.0..2.0f64).prop_map(|e| 10f64.powf(e))
}

/// `(q, a)` with `0 <= a <= Re q`.
fn params() -> impl Strategy<Value = (Complex64, f64)> {
    (0.01..3.0f64, -2.0..2.0f64, 0.0..=1.0f64).prop_map(|(re, im, t)| (Complex64::new(re, im), t * re))
}

proptest! {
    #[test]
    fn real_part_stays_above_floor(s in spec(), z in point(0.999)) {
        prop_assert!(s.eval_p(z).unwrap().re >= s.a() - 1e-10);
    }

    #[test]
    fn harnack_interval_is_disk_projection(s in spec(), r in 0.0..0.999f64) {
        let disk = s.value_disk(r).unwrap();
        let (lo, hi) = s.harnack_bounds(r).unwrap();
        let (dlo, dhi) = disk.re_range();
        let scale = 1.0 + disk.center.norm() + disk.radius;
        prop_assert!((lo - dlo).abs() <= 1e-12 * scale);
        prop_assert!((hi - dhi).abs() <= 1e-12 * scale);
    }

    #[test]
    fn value_disk_contains_values(s in spec(), z in point(0.999)) {
        let disk = s.value_disk(z.norm()).unwrap();
        let scale = 1.0 + disk.center.norm() + disk.radius;
        prop_assert!(disk.depth(s.eval_p(z).unwrap()) >= -1e-12 * scale);
    }

    #[test]
    fn derivative_matches_differences(s in spec(), z in point(0.9)) {
        let h = 1e-6;
        let fd = (s.eval_p(z + h).unwrap() - s.eval_p(z - h).unwrap()) / (2.0 * h);
        let exact = s.eval_p_prime(z).unwrap();
        prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0));
    }

    #[test]
    fn single_atom_values_lie_on_disk_boundary(
        a in 0.0..2.0f64, scale in 0.01..2.0f64, gamma in -1.0..1.0f64, r in 0.0..0.999f64,
    ) {
        let s = GeneratorSpec::single_atom(0.0, a, scale, gamma).unwrap();
        let disk = s.value_disk(r).unwrap();
        let p = s.eval_p(Complex64::new(r, 0.0)).unwrap();
        prop_assert!(disk.depth(p).abs() <= 1e-10);
    }

    #[test]
    fn spec_json_round_trip(s in spec()) {
        prop_assert_eq!(GeneratorSpec::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn solutions_are_certified_and_contracted(s in spec(), l in lambda(), z in point(0.999)) {
        let sol = solve_resolvent(&s, l, z, &SolverOptions::default()).unwrap();
        let f = sol.w + l * s.eval_p(sol.w).unwrap() * sol.w - z;
        prop_assert!(f.norm() <= 1e-12);
        prop_assert!(sol.w.norm() <= z.norm() + 1e-12);
        prop_assert!((sol.g * z - sol.w).norm() <= 1e-12);
    }

    #[test]
    fn resolvent_multiplier_obeys_maximum_modulus(
        s in spec(), l in lambda(), r in 0.2..0.999f64, frac in 0.0..0.9f64, t in 0.0..TAU,
    ) {
        let opts = SolverOptions::default();
        let ratio = |z: Complex64| solve_resolvent(&s, l, z, &opts).unwrap().w.norm() / z.norm();
        let on_circle = (0..720)
            .map(|k| ratio(Complex64::from_polar(r, TAU * k as f64 / 720.0)))
            .fold(0.0, f64::max);
        let inside = ratio(Complex64::from_polar(r * frac.max(1e-3), t));
        prop_assert!(inside <= on_circle * (1.0 + 1e-6));
    }

    #[test]
    fn small_lambda_follows_the_generator(s in spec(), z in nonzero_point(0.05, 0.9)) {
        let l = 1e-5;
        let w = solve_resolvent(&s, l, z, &SolverOptions::default()).unwrap().w;
        let f = s.eval_f(z).unwrap();
        // G_λ(z) = z − λf(z) + λ² f′(z) f(z) + O(λ³)
        let df = s.eval_p(z).unwrap() + s.eval_p_prime(z).unwrap() * z;
        let second_order = 2.0 * l * (df * f).norm();
        prop_assert!(((w - z) / l + f).norm() <= 1e-3 * f.norm() + second_order + 1e-6);
    }

    #[test]
    fn slice_resolvent_is_a_rotation(s in spec(), l in lambda(), z in point(0.99), phi in 0.0..TAU) {
        let opts = SolverOptions::default();
        let u = Complex64::from_polar(1.0, phi);
        let slice = solve_slice(&s, l, u, z, &opts).unwrap().w;
        let direct = solve_resolvent(&s, l, u * z, &opts).unwrap().w;
        prop_assert!((slice - u.conj() * direct).norm() <= 1e-11);
    }

    #[test]
    fn distortion_bound_holds(s in spec(), l in lambda(), z in point(0.999)) {
        let w = solve_resolvent(&s, l, z, &SolverOptions::default()).unwrap().w;
        let d = distortion(s.q(), s.a(), l).unwrap();
        prop_assert!(d > 0.0 && d <= 1.0);
        prop_assert!(w.norm() <= d * z.norm() + 1e-9);
    }

    #[test]
    fn distortion_dominated_by_floorless_bound((q, a) in params(), l in lambda()) {
        let est1 = est1_bound(q, l).unwrap();
        prop_assert!(distortion(q, 0.0, l).unwrap() <= est1 + 1e-12);
        prop_assert!(distortion(q, a, l).unwrap() <= est1 + 1e-12);
    }

    #[test]
    fn composed_generator_is_accretive_with_a_lambda(s in spec(), l in lambda(), z in nonzero_point(1e-3, 0.999)) {
        let b = distortion_coefficients(s.q(), s.a(), l).unwrap();
        let w = solve_resolvent(&s, l, z, &SolverOptions::default()).unwrap().w;
        let value = (z.conj() * s.eval_f(w).unwrap()).re / z.norm_sqr();
        prop_assert!(value >= b.a_lambda - 1e-8);
    }

    #[test]
    fn resolvent_multiplier_above_disk_profile(s in spec(), l in lambda(), z in nonzero_point(1e-3, 0.999)) {
        let w = solve_resolvent(&s, l, z, &SolverOptions::default()).unwrap().w;
        let psi = accretivity_profile(s.q(), s.a(), l, w.norm()).unwrap();
        prop_assert!((z.conj() * w).re / z.norm_sqr() >= psi - 1e-8);
    }

    #[test]
    fn reciprocal_disk_maps_boundaries(cx in -3.0..3.0f64, cy in -3.0..3.0f64, frac in 0.0..0.95f64) {
        let center = Complex64::new(cx, cy);
        prop_assume!(center.norm() > 1e-3);
        let input = Disk::new(center, frac * center.norm());
        let output = reciprocal_disk(&input).unwrap();
        for k in 0..64 {
            let v = input.center + Complex64::from_polar(input.radius, TAU * k as f64 / 64.0);
            let scale = 1.0 + output.center.norm() + output.radius;
            prop_assert!(output.depth(v.inv()).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn t_equals_one_at_rho_star((q, a) in params(), l in lambda()) {
        let rho = rho_star(q, a, l).unwrap();
        prop_assume!(rho < 1.0);
        let t = t_function(l * (q.re - a), l * a, rho).unwrap();
        prop_assert!((t - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sufficient_conditions_imply_main_inequality((q, a) in params(), l in lambda()) {
        match calc_order(q, a, l) {
            Ok(Some(order)) => prop_assert!(order.order >= 0.5 && order.order <= 1.0),
            Ok(None) => {}
            Err(Error::Inconsistent(msg)) => prop_assert!(false, "{}", msg),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn functional_matches_difference_quotient(s in spec(), l in lambda(), z in nonzero_point(0.05, 0.9)) {
        let opts = SolverOptions::default();
        let exact = starlike_functional(&s, l, z, &opts).unwrap().functional;
        let fd = starlike_functional_fd(&s, l, z, 1e-5, &opts).unwrap();
        prop_assert!((exact - fd).norm() <= 1e-6 * exact.norm());
    }

    #[test]
    fn resolvents_are_starlike_of_order_one_half(s in spec(), l in lambda(), z in point(0.999)) {
        let sample = starlike_functional(&s, l, z, &SolverOptions::default()).unwrap();
        prop_assert!(sample.deviation <= 1.0 + 1e-9);
        prop_assert!(sample.pointwise_order() >= 0.5 - 1e-9);
    }

    #[test]
    fn deviation_within_t_of_image_radius(s in spec(), l in lambda(), z in point(0.999)) {
        let sample = starlike_functional(&s, l, z, &SolverOptions::default()).unwrap();
        let t = t_function(l * (s.q().re - s.a()), l * s.a(), sample.w.norm()).unwrap();
        prop_assert!(sample.deviation <= t * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn disk_containment_below_rho_star(s in spec(), l in lambda()) {
        let opts = SolverOptions::default();
        for mode in [RhoMode::Analytic, RhoMode::Sampled] {
            let cmp = theorem_vs_empirical(&s, l, 128, 0.999, mode, &opts).unwrap();
            if cmp.within_rho_star {
                prop_assert!(cmp.max_deviation <= cmp.t_bound + 1e-9);
            }
        }
    }

    #[test]
    fn strong_order_estimate_bounded(s in spec(), l in lambda(), q in params()) {
        let opts = SolverOptions::default();
        prop_assert!(empirical_order(&s, l, 64, 0.9, &opts).unwrap().strong_order_lb <= 1.0);
        let flat = GeneratorSpec::constant(q.0).unwrap();
        prop_assert_eq!(empirical_order(&flat, l, 64, 0.9, &opts).unwrap().strong_order_lb, 0.0);
    }

    #[test]
    fn flow_is_squeezed_and_monotone(s in spec(), z0 in point(0.99)) {
        let traj = integrate(&s, z0, 2.0, 1e-9).unwrap();
        prop_assert!(squeeze_check(&traj, s.a()).ok);
        for pair in traj.points.windows(2) {
            prop_assert!(pair[1].norm() <= pair[0].norm() + 1e-9);
        }
    }

    #[test]
    fn flow_has_semigroup_property(s in spec(), z0 in point(0.99), t1 in 0.0..1.5f64, t2 in 0.0..1.5f64) {
        let tol = 1e-10;
        let first = integrate(&s, z0, t1, tol).unwrap();
        let split = integrate(&s, first.last().1, t2, tol).unwrap();
        let whole = integrate(&s, z0, t1 + t2, tol).unwrap();
        let steps = (first.len() + split.len() + whole.len()) as f64;
        prop_assert!((split.last().1 - whole.last().1).norm() <= 2.0 * tol * steps.max(10.0));
    }

    #[test]
    fn accretivity_floor_decreases_toward_a(s in spec(), r1 in 0.0..0.999f64, r2 in 0.0..0.999f64) {
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let inner = estimate_accretivity_floor(&s, lo).unwrap();
        let outer = estimate_accretivity_floor(&s, hi).unwrap();
        prop_assert!(outer >= s.a() - 1e-9);
        prop_assert!(outer <= inner + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reports_depend_only_on_seed_and_config(seed in any::<u64>(), suite_index in 0..Suite::ALL.len()) {
        let config = SuiteConfig {
            generators: Some(2),
            lambdas: Some(2),
            radii: 2,
            angles: 8,
            random_points: 4,
            draws: 50,
            ..SuiteConfig::default()
        };
        let suite = Suite::ALL[suite_index];
        let a = run_suite(suite, &config, seed).unwrap();
        let b = run_suite(suite, &config, seed).unwrap();
        prop_assert_eq!(a.without_timing(), b.without_timing());
    }
}

/// The endpoint minimum of `φ` is not a lower bound for `Re(conj(x) G_λ(x))/|x|²`:
/// for `p = (1+z)/(1−z)` and `λ = 1`, `G₁(x) = x/(2+x)`, whose multiplier
/// `1/(2+x)` has real part close to `1/3` near `x = 1`.
#[test]
fn endpoint_accretivity_constant_has_counterexample() {
    let spec = GeneratorSpec::single_atom(0.0, 0.0, 1.0, 0.0).unwrap();
    let stated = distortion_coefficients(Complex64::new(1.0, 0.0), 0.0, 1.0).unwrap().d_lambda.unwrap();
    assert!((stated - 0.5).abs() < 1e-12);
    let z = Complex64::new(0.999, 0.0);
    let w = solve_resolvent(&spec, 1.0, z, &SolverOptions::default()).unwrap().w;
    let observed = (z.conj() * w).re / z.norm_sqr();
    assert!((observed - 1.0 / 2.999).abs() < 1e-12);
    assert!(observed < stated - 0.1);
    // the reciprocal-disk profile is sharp at this point
    let psi = accretivity_profile(Complex64::new(1.0, 0.0), 0.0, 1.0, w.norm()).unwrap();
    assert!((observed - psi).abs() < 1e-12);
}
