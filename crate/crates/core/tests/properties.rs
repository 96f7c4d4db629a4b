use mimo_se::asymptotic::{se_cmimo_asymptotic, se_dmimo_asymptotic, se_high_snr};
use mimo_se::channel::{spectral_efficiency, spectral_efficiency_direct, target_matrix, ChannelModel, Unitaries};
use mimo_se::circular::{
    avg_se_urban, brute_force_ring_radius, optimal_ring_radius, ring_distance_moment, ring_distance_moment_quadrature,
};
use mimo_se::cli::output::format_sig;
use mimo_se::correlation::{coupling_matrix, eig_sym, exp_correlation, max_eigenvalue_bound};
use mimo_se::linalg::{orthonormalize_columns, CMatrix};
use mimo_se::stochastic::{sample_cscg, RandomStream, ShadowingSampler};
use mimo_se::{validate, SystemParams, Topology};
use proptest::prelude::*;

fn params(n_t: usize, n_r: usize, snr: f64, theta_t: f64, theta_r: f64) -> SystemParams {
    SystemParams {
        n_t,
        n_r,
        snr,
        nu: 3.7,
        omega: 1.0,
        alpha: vec![10.0],
        theta_t,
        theta_r,
    }
}

fn arb_params() -> impl Strategy<Value = SystemParams> {
    (
        1usize..5,
        0.01f64..1000.0,
        2.1f64..6.0,
        0.1f64..10.0,
        0.6f64..50.0,
        0.0f64..0.95,
        0.0f64..0.95,
    )
        .prop_flat_map(|(n_t, snr, nu, omega, alpha, theta_t, theta_r)| {
            (n_t + 1..n_t + 40).prop_map(move |n_r| SystemParams {
                n_t,
                n_r,
                snr,
                nu,
                omega,
                alpha: vec![alpha],
                theta_t,
                theta_r,
            })
        })
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_idempotent(p in arb_params(), d in 0.01f64..5.0) {
        let s = validate(p, Topology::Centralized { d }).unwrap();
        let again = validate(s.params.clone(), s.topology.clone()).unwrap();
        prop_assert_eq!(s, again);
    }

    #[test]
    fn broadcast_shape_draws_identically(alpha in 0.6f64..30.0, omega in 0.1f64..5.0, n in 1usize..50, seed: u64) {
        let a = ShadowingSampler::new(&[alpha], omega).unwrap().draw(&mut RandomStream::new(seed, 1), n);
        let b = ShadowingSampler::new(&vec![alpha; n], omega).unwrap().draw(&mut RandomStream::new(seed, 1), n);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn spectrum_trace_and_bound(theta in 0.0f64..0.95, n in 2usize..64) {
        let s = eig_sym(&exp_correlation(theta, n).unwrap()).unwrap();
        prop_assert!(relative(s.sum(), n as f64) < 1e-10);
        prop_assert!(s.max() <= max_eigenvalue_bound(theta) * (1.0 + 1e-12));
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn coupling_energy_is_product_of_sizes(tt in 0.0f64..0.95, tr in 0.0f64..0.95, n_t in 1usize..6, n_r in 2usize..40) {
        let lt = eig_sym(&exp_correlation(tt, n_t).unwrap()).unwrap();
        let lr = eig_sym(&exp_correlation(tr, n_r).unwrap()).unwrap();
        let g = coupling_matrix(&lr, &lt).unwrap();
        prop_assert!(relative(g.energy(), (n_r * n_t) as f64) < 1e-10);
    }

    #[test]
    fn realizations_are_reproducible(p in arb_params(), d in 0.05f64..2.0, seed: u64, trial in 0u64..1000) {
        let model = ChannelModel::new(&validate(p, Topology::Centralized { d }).unwrap()).unwrap();
        let a = model.sample_spectral_efficiency(&mut RandomStream::new(seed, trial)).unwrap();
        let b = model.sample_spectral_efficiency(&mut RandomStream::new(seed, trial)).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rate_ignores_choice_of_unitaries(n_t in 1usize..4, extra in 1usize..8, theta in 0.0f64..0.9, seed: u64) {
        let n_r = n_t + extra;
        let dists: Vec<f64> = (0..n_r).map(|k| 0.3 + 0.05 * k as f64).collect();
        for topo in [Topology::Centralized { d: 0.4 }, Topology::DistributedExplicit { distances: dists.clone() }] {
            let s = validate(params(n_t, n_r, 5.0, theta, theta), topo).unwrap();
            let model = ChannelModel::new(&s).unwrap();
            let mut stream = RandomStream::new(seed, 0);
            let real = model.realize(&mut stream).unwrap();
            let base = spectral_efficiency_direct(&real, 5.0, &model.correlation_unitaries().unwrap()).unwrap();
            let other = Unitaries {
                u_t: orthonormalize_columns(&sample_cscg(&mut stream, n_t, n_t)).unwrap(),
                u_r: Some(orthonormalize_columns(&sample_cscg(&mut stream, n_r, n_r)).unwrap()),
            };
            let rotated = spectral_efficiency_direct(&real, 5.0, &other).unwrap();
            prop_assert!(relative(rotated, base) <= 1e-10, "{} vs {}", rotated, base);
        }
    }

    #[test]
    fn rate_grows_with_snr_and_gain(n_t in 1usize..4, extra in 1usize..10, seed: u64, k in 0usize..10, bump in 1.0f64..4.0) {
        let n_r = n_t + extra;
        let dists: Vec<f64> = (0..n_r).map(|j| 0.2 + 0.1 * j as f64).collect();
        let s = validate(params(n_t, n_r, 3.0, 0.5, 0.0), Topology::DistributedExplicit { distances: dists.clone() }).unwrap();
        let model = ChannelModel::new(&s).unwrap();
        let real = model.realize(&mut RandomStream::new(seed, 0)).unwrap();
        let m = target_matrix(&real).unwrap();
        let lo = spectral_efficiency(&m, 3.0, n_t).unwrap();
        let hi = spectral_efficiency(&m, 3.0 * bump, n_t).unwrap();
        prop_assert!(hi >= lo);

        // Moving antenna k closer raises its large-scale gain.
        let mut closer = dists;
        closer[k % n_r] /= bump;
        let s2 = s.with_topology(Topology::DistributedExplicit { distances: closer }).unwrap();
        let real2 = ChannelModel::new(&s2).unwrap().realize(&mut RandomStream::new(seed, 0)).unwrap();
        let up = spectral_efficiency(&target_matrix(&real2).unwrap(), 3.0, n_t).unwrap();
        prop_assert!(up >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn equal_distances_reduce_to_colocated(p in arb_params(), d in 0.05f64..3.0) {
        let c = se_cmimo_asymptotic(&p, d).unwrap();
        let dm = se_dmimo_asymptotic(&p, &vec![d; p.n_r]).unwrap();
        prop_assert!(relative(dm, c) <= 1e-12);
    }

    #[test]
    fn closed_forms_ignore_rx_correlation(p in arb_params(), d in 0.05f64..3.0, theta_r in 0.0f64..0.95) {
        let mut q = p.clone();
        q.theta_r = theta_r;
        let dists: Vec<f64> = (0..p.n_r).map(|k| d + 0.01 * k as f64).collect();
        prop_assert_eq!(se_cmimo_asymptotic(&p, d).unwrap(), se_cmimo_asymptotic(&q, d).unwrap());
        prop_assert_eq!(se_dmimo_asymptotic(&p, &dists).unwrap(), se_dmimo_asymptotic(&q, &dists).unwrap());
    }

    #[test]
    fn closed_forms_monotone(p in arb_params(), d in 0.05f64..3.0, k in 0usize..40) {
        let dists: Vec<f64> = (0..p.n_r).map(|j| d + 0.01 * j as f64).collect();
        let base = se_dmimo_asymptotic(&p, &dists).unwrap();
        let mut richer = p.clone();
        richer.omega *= 1.5;
        prop_assert!(se_dmimo_asymptotic(&richer, &dists).unwrap() > base);
        let mut farther = dists.clone();
        farther[k % p.n_r] *= 1.5;
        prop_assert!(se_dmimo_asymptotic(&p, &farther).unwrap() < base);

        // d^-nu falls with nu beyond the reference length and rises inside it.
        let mut steeper = p.clone();
        steeper.nu += 0.5;
        let far: Vec<f64> = dists.iter().map(|x| x + 1.0).collect();
        prop_assert!(se_dmimo_asymptotic(&steeper, &far).unwrap() < se_dmimo_asymptotic(&p, &far).unwrap());
        let near: Vec<f64> = dists.iter().map(|x| x / 4.0).collect();
        prop_assert!(se_dmimo_asymptotic(&steeper, &near).unwrap() > se_dmimo_asymptotic(&p, &near).unwrap());
    }

    #[test]
    fn high_snr_form_penalizes_correlation(theta in 0.0f64..0.9, step in 0.01f64..0.09, n_t in 2usize..6) {
        let topo = Topology::Centralized { d: 0.5 };
        let a = se_high_snr(&params(n_t, 100, 1000.0, theta, 0.0), &topo).unwrap();
        let b = se_high_snr(&params(n_t, 100, 1000.0, theta + step, 0.0), &topo).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn ring_moment_matches_quadrature(r_u in 0.1f64..0.9, r_a in 0.1f64..0.9, nu in 2.5f64..5.0) {
        prop_assume!((r_u - r_a).abs() > 0.02);
        let closed = ring_distance_moment(r_u, r_a, nu).unwrap();
        let quad = ring_distance_moment_quadrature(r_u, r_a, nu).unwrap();
        prop_assert!(relative(closed, quad) < 1e-10, "{} vs {}", closed, quad);
    }

    #[test]
    fn derivative_sign_brackets_optimum(r_c in 0.1f64..1000.0, frac in 0.05f64..0.95) {
        let opt = optimal_ring_radius(r_c).unwrap();
        let p = SystemParams { nu: 4.0, ..params(2, 50, 100.0, 0.3, 0.0) };
        let r_a = frac * r_c;
        prop_assume!((r_a - opt.r_a_opt).abs() > 1e-3 * r_c);
        let h = 1e-6 * r_c;
        let fd = avg_se_urban(&p, r_c, r_a + h).unwrap() - avg_se_urban(&p, r_c, r_a - h).unwrap();
        prop_assert_eq!(fd > 0.0, r_a < opt.r_a_opt);
    }

    #[test]
    fn significant_digits_bound_error(x in -1e12f64..1e12, digits in 1usize..17) {
        prop_assume!(x != 0.0);
        let s = format_sig(x, digits);
        let back: f64 = s.parse().unwrap();
        prop_assert!(relative(back, x) <= 0.5 * 10f64.powi(1 - digits as i32) * (1.0 + 1e-9), "{} -> {}", x, s);
        let full: f64 = format_sig(x, 17).parse().unwrap();
        prop_assert_eq!(full, x);
    }
}

#[test]
fn argmax_independent_of_gains() {
    let opt = optimal_ring_radius(1.0).unwrap();
    let sets = [
        params(1, 100, 1.0, 0.0, 0.0),
        params(4, 300, 1000.0, 0.8, 0.3),
        SystemParams {
            omega: 4.0,
            ..params(2, 50, 10.0, 0.5, 0.0)
        },
    ];
    let mut values = Vec::new();
    for p in sets {
        let p = SystemParams { nu: 4.0, ..p };
        let found = brute_force_ring_radius(&p, 1.0, 1e-3).unwrap();
        assert!((found - opt.r_a_opt).abs() <= 1e-3, "{found}");
        values.push(avg_se_urban(&p, 1.0, found).unwrap());
    }
    assert!(values.windows(2).all(|w| (w[0] - w[1]).abs() > 1e-3));
}

#[test]
fn diagonal_target_matrix_rate_by_hand() {
    // A realization is not needed: a diagonal target matrix gives a sum of logs.
    let m = mimo_se::channel::TargetMatrix::new(CMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
    let se = spectral_efficiency(&m, 2.0, 2).unwrap();
    assert!((se - (4f64.log2() + 1.0)).abs() < 1e-12);
}
