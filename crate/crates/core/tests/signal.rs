use arsense::signal::*;
use arsense::verify::required_separation;
use nalgebra::DVector;
use proptest::prelude::*;

fn real_poles(max_p: usize, max_modulus: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-max_modulus..max_modulus, 1..=max_p)
}

fn sparse_input(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![4 => Just(0.0), 1 => -2.0..2.0f64], n)
}

proptest! {
    #[test]
    fn forward_is_superposition_of_impulse_responses(
        poles in real_poles(3, 0.95),
        u in sparse_input(60),
    ) {
        let model = ArModel::from_real_poles(&poles);
        let x = ar_forward(&model, &u);
        let h = impulse_response(&model, u.len());
        for t in 0..u.len() {
            let direct: f64 = (0..=t).filter(|&j| u[j] != 0.0).map(|j| u[j] * h[t - j]).sum();
            prop_assert!((x[t] - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn stability_agrees_with_envelope(coeffs in prop::collection::vec(-2.0..2.0f64, 1..=3)) {
        let model = ArModel::new(coeffs);
        let fitted = fit_decay_envelope(&model, 500, 0.01);
        match fitted {
            Ok(env) => {
                prop_assert!(model.is_stable());
                prop_assert!(env.rho < 1.0);
            }
            Err(_) => prop_assert!(!model.is_stable()),
        }
    }

    #[test]
    fn envelope_bounds_impulse_response(poles in real_poles(3, 0.9)) {
        let model = ArModel::from_real_poles(&poles);
        let env = fit_decay_envelope(&model, 400, 0.01).unwrap();
        for (t, h) in impulse_response(&model, 400).iter().enumerate() {
            prop_assert!(h.abs() <= env.m * env.rho.powi(t as i32) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn lagged_samples_before_spikes_are_small(
        poles in real_poles(2, 0.7),
        k in 2usize..5,
        seed in any::<u64>(),
    ) {
        let model = ArModel::from_real_poles(&poles);
        let env = fit_decay_envelope(&model, 1000, 0.01).unwrap();
        let (beta_min, beta_max) = (1.0, 2.0);
        let p = model.order();
        let l = required_separation(p, &env, beta_min, beta_max);
        prop_assume!(l.is_finite() && l < 400.0);
        let min_sep = l.ceil() as usize;
        let n = (k - 1) * (min_sep + 1) + 1 + 50;
        let params = SpikeParams { n, k, min_sep, beta_min, beta_max, sign_mode: SignMode::Bernoulli };
        let u = make_spike_train(&params, seed).unwrap();
        let x = ar_forward(&model, u.values());
        let rho_l = env.rho.powf(l);
        let bound = beta_max * env.m * env.rho.powf(l - p as f64) / (1.0 - rho_l);
        for &j in u.support().iter().skip(1) {
            for i in 1..=p {
                prop_assert!(x[j - i].abs() < bound, "x[{}] = {} >= {}", j - i, x[j - i], bound);
            }
        }
    }

    #[test]
    fn generator_respects_constraints(
        n in 10usize..300,
        k in 0usize..8,
        min_sep in 0usize..30,
        seed in any::<u64>(),
    ) {
        let params = SpikeParams { n, k, min_sep, beta_min: 0.5, beta_max: 2.0, sign_mode: SignMode::Bernoulli };
        match make_spike_train(&params, seed) {
            Ok(u) => {
                prop_assert_eq!(u.k(), k);
                prop_assert_eq!(u.values().iter().filter(|v| **v != 0.0).count(), k);
                for w in u.support().windows(2) {
                    prop_assert!(w[1] - w[0] > min_sep);
                }
                for &i in u.support() {
                    let a = u.values()[i].abs();
                    prop_assert!((0.5..=2.0).contains(&a));
                }
                prop_assert_eq!(u, make_spike_train(&params, seed).unwrap());
            }
            Err(_) => prop_assert!(k >= 2 && (k - 1) * (min_sep + 1) + 1 > n),
        }
    }

    #[test]
    fn noncausal_solutions_satisfy_the_system(
        fwd in -0.45..0.45f64,
        bwd in -0.45..0.45f64,
        u in sparse_input(40),
        circulant in any::<bool>(),
    ) {
        let boundary = if circulant { Boundary::Circulant } else { Boundary::Open };
        let model = NoncausalArModel::new(vec![fwd], vec![bwd], boundary).unwrap();
        let x = noncausal_forward(&model, &u).unwrap();
        let residual = model.system_matrix(u.len()) * DVector::from_vec(x) - DVector::from_vec(u);
        prop_assert!(residual.amax() < 1e-10);
    }

    #[test]
    fn arma_with_empty_ma_is_ar(poles in real_poles(3, 0.9), u in sparse_input(40)) {
        let ar = ArModel::from_real_poles(&poles);
        let arma = ArmaModel::new(ar.clone(), Vec::new());
        prop_assert_eq!(arma_forward(&arma, &u), ar_forward(&ar, &u));
    }
}

#[test]
fn arma_impulse_starts_with_ma_taps() {
    let arma = ArmaModel::new(ArModel::new(vec![-1.9, 1.06, -0.144]), vec![0.7, 1.0]);
    let mut u = vec![0.0; 5];
    u[0] = 1.0;
    let x = arma_forward(&arma, &u);
    assert_eq!(x[0], 1.0);
    assert!((x[1] - 2.6).abs() < 1e-12);
}
