mod common;

use arsense::decoder::{decode_ar_compressed, decode_blind, DecodeMode};
use arsense::linalg::max_abs_diff;
use arsense::sensing::{build_regressor, RegressorInputs, RegressorVariant, RegressorSystem, SensingOperator};
use arsense::signal::{ar_forward, ArModel, SignMode, SpikeParams, make_spike_train, fit_decay_envelope};
use arsense::solvers::{solve_l1_equality, L1Problem, Mode, SolverOptions};
use arsense::verify::*;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use common::*;

fn compressed(x: &[f64], g: &SensingOperator, p: usize) -> RegressorSystem {
    let y = g.apply(x).unwrap();
    build_regressor(&y, p, RegressorVariant::Compressed, RegressorInputs { sensing: Some(g), ..Default::default() }).unwrap()
}

fn counterexample(u: &[f64]) -> DocCertificate {
    let model = ArModel::new(vec![0.5]);
    let x = ar_forward(&model, u);
    let g = sensing(TOEPLITZ_GAUSSIAN, 50, u.len(), 4);
    let sys = compressed(&x, &g, 1);
    let support: Vec<usize> = (0..u.len()).filter(|&i| u[i] != 0.0).collect();
    let signs: Vec<f64> = support.iter().map(|&i| u[i].signum()).collect();
    match check_doc(&sys.g_sub, &sys.y_lag, &support, &signs, &SolverOptions::default()) {
        Ok(cert) => cert,
        Err(e) => panic!("unexpected DOC error: {e}"),
    }
}

#[test]
fn doc_adjacent_spikes_infeasible() {
    let mut u = vec![0.0; 200];
    u[0] = 1.0;
    u[1] = 1.0;
    let cert = counterexample(&u);
    assert!(!cert.feasible, "t = {}", cert.t);
}

#[test]
fn doc_separated_spikes_feasible() {
    let env = fit_decay_envelope(&ArModel::new(vec![0.5]), ENVELOPE_HORIZON_FOR_TESTS, 0.01).unwrap();
    let l = required_separation(1, &env, 1.0, 1.0);
    let gap = l.floor() as usize + 1;
    let mut u = vec![0.0; 200];
    u[0] = 1.0;
    u[gap] = 1.0;
    let cert = counterexample(&u);
    assert!(cert.feasible, "t = {}", cert.t);
    assert!(cert.null_residual < 1e-8);
    assert!(cert.support_equalities_residual < 1e-8);
}

const ENVELOPE_HORIZON_FOR_TESTS: usize = 2000;

#[test]
fn doc_full_support_is_trivial() {
    let g = DMatrix::<f64>::identity(4, 4);
    let y = DMatrix::<f64>::zeros(4, 0);
    let cert = check_doc(&g, &y, &[0, 1, 2, 3], &[1.0, -1.0, 1.0, 1.0], &SolverOptions::default()).unwrap();
    assert_eq!(cert.t, 0.0);
    assert_eq!(cert.off_support_max, 0.0);
    assert!(cert.feasible);
}

#[test]
fn doc_rejects_bad_signs() {
    let g = DMatrix::<f64>::identity(3, 3);
    let y = DMatrix::<f64>::zeros(3, 0);
    assert!(check_doc(&g, &y, &[0], &[0.5], &SolverOptions::default()).is_err());
    assert!(check_doc(&g, &y, &[], &[], &SolverOptions::default()).is_err());
}

#[test]
fn doc_feasible_on_decoded_instances_and_sound() {
    let model = ArModel::new(vec![-1.4, 0.45]);
    let opts = SolverOptions::default();
    let mut certified = 0;
    for seed in 0..8 {
        let u = spikes(200, 3, 60, seed);
        let x = ar_forward(&model, u.values());
        let g = sensing(TOEPLITZ_GAUSSIAN, 50, 200, 100 + seed);
        let sys = compressed(&x, &g, 2);
        let cert = check_doc(&sys.g_sub, &sys.y_lag, u.support(), &u.signs(), &opts).unwrap();
        let problem = L1Problem::new(sys.g_sub.clone(), Some(sys.y_lag.clone()), sys.rhs.clone(), Mode::Equality).unwrap();
        let report = solve_l1_equality(&problem, &opts).unwrap();
        let recovered = max_abs_diff(&report.u, u.values()) < 1e-6;
        if cert.feasible {
            certified += 1;
            assert!(recovered, "seed {seed}: certified but not recovered");
        }
        if recovered {
            let y = g.apply(&x).unwrap();
            let res = decode_ar_compressed(&y, &g, 2, DecodeMode::Joint, &opts).unwrap();
            assert!(max_abs_diff(&res.u_hat, u.values()) < 1e-6);
        }
    }
    assert!(certified >= 4, "only {certified} certificates");
}

#[test]
fn assumptions_single_spike_passes() {
    let mut u = vec![0.0; 100];
    u[10] = 1.0;
    let report = check_theorem1_assumptions(&ArModel::new(vec![-0.5]), &u, 30);
    assert!(report.stable && report.separation_ok && report.amplitudes_ok);
    assert!(report.all_pass, "{report:?}");
}

#[test]
fn assumptions_adjacent_spikes_fail_separation() {
    let mut u = vec![0.0; 100];
    u[10] = 1.0;
    u[11] = 1.0;
    let report = check_theorem1_assumptions(&ArModel::new(vec![-0.5]), &u, 30);
    assert_eq!(report.l_actual, Some(1));
    assert!(!report.separation_ok);
    assert!(!report.all_pass);
}

#[test]
fn assumptions_slow_pole_needs_long_gaps() {
    let mut u = vec![0.0; 1000];
    u[10] = 1.0;
    u[500] = -1.0;
    let model = ArModel::new(vec![-0.999]);
    let report = check_theorem1_assumptions(&model, &u, 100);
    let env = report.envelope.unwrap();
    // Independent evaluation of the separation formula.
    let expected = ((2.0 / (1.0 - env.rho)).ln() + (6.0 * env.m).ln()) / (1.0 / env.rho).ln() + 1.0;
    let l = report.l_required.unwrap();
    assert!((l - expected).abs() < 1e-9 * expected);
    assert!(l > 1000.0);
    assert!(!report.separation_ok);
}

#[test]
fn assumptions_unstable_model_fails() {
    let mut u = vec![0.0; 50];
    u[3] = 1.0;
    let report = check_theorem1_assumptions(&ArModel::new(vec![-1.0]), &u, 10);
    assert!(!report.stable);
    assert!(report.envelope.is_none());
    assert!(!report.all_pass);
}

#[test]
fn rip_conditions_thresholds() {
    let ok = check_rip_conditions(0.1, 0.2, 2, 6);
    assert!(ok.ratio_ok && ok.double_ok && ok.sparsity_ok);
    let bad = check_rip_conditions(0.3, 0.4, 3, 6);
    assert!(!bad.ratio_ok && !bad.double_ok && !bad.sparsity_ok);
}

fn blind_instance(n: usize, k: usize, min_sep: usize, sigma: f64, sign_mode: SignMode, beta: f64, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let model = ArModel::new(vec![-1.4, 0.45]);
    let params = SpikeParams {
        n,
        k,
        min_sep,
        beta_min: beta,
        beta_max: beta,
        sign_mode,
    };
    let u = make_spike_train(&params, seed).unwrap().into_values();
    let x = ar_forward(&model, &u);
    let mut rng = arsense::rng::rng_from_seed(seed ^ 0xabc);
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let y: Vec<f64> = x.iter().map(|v| if sigma > 0.0 { v + noise.sample(&mut rng) } else { *v }).collect();
    (u, x, y, model.coeffs().to_vec())
}

fn filtered_noise(y: &[f64], u: &[f64], a: &[f64]) -> Vec<f64> {
    let lag = lag_matrix(y, a.len());
    (0..y.len())
        .map(|t| y[t] + (0..a.len()).map(|c| lag[(t, c)] * a[c]).sum::<f64>() - u[t])
        .collect()
}

#[test]
fn closed_form_collapses_without_noise() {
    let (u, _x, y, a) = blind_instance(300, 4, 40, 0.0, SignMode::Bernoulli, 5.0, 1);
    let e = filtered_noise(&y, &u, &a);
    assert!(e.iter().all(|v| v.abs() < 1e-9));
    let (u_hat, a_hat) = theorem2_closed_form(&y, &lag_matrix(&y, 2), &u, &e, 1e-10).unwrap();
    assert!(max_abs_diff(&u_hat, &u) < 1e-6);
    assert!(max_abs_diff(&a_hat, &a) < 1e-6);
}

#[test]
fn closed_form_satisfies_stationarity_and_matches_lasso() {
    let opts = SolverOptions {
        feasibility_tol: 1e-10,
        ..SolverOptions::default()
    };
    let mut matched = 0;
    for seed in 0..5 {
        let (u, _x, y, a) = blind_instance(400, 3, 40, 0.01, SignMode::Bernoulli, 5.0, seed);
        let e = filtered_noise(&y, &u, &a);
        let lag = lag_matrix(&y, 2);
        let lambda = 0.2;
        let (u_hat, a_hat) = theorem2_closed_form(&y, &lag, &u, &e, lambda).unwrap();
        // Yᵀ(y + Yâ − û) = 0.
        let r: Vec<f64> = (0..y.len())
            .map(|t| y[t] + lag[(t, 0)] * a_hat[0] + lag[(t, 1)] * a_hat[1] - u_hat[t])
            .collect();
        let grad = lag.transpose() * nalgebra::DVector::from_vec(r);
        assert!(grad.amax() < 1e-8, "stationarity {}", grad.amax());
        let blind = decode_blind(&y, 2, lambda, &opts).unwrap();
        let signs_match = (0..y.len()).all(|i| (u_hat[i] != 0.0) == (u[i] != 0.0) && u_hat[i].signum() == u[i].signum() || u[i] == 0.0 && u_hat[i] == 0.0);
        if signs_match && max_abs_diff(&blind.u_hat, &u_hat) < 1e-6 && max_abs_diff(&blind.a_hat, &a_hat) < 1e-6 {
            matched += 1;
        }
    }
    assert!(matched >= 4, "matched {matched}/5");
}

#[test]
fn blind_conditions_noise_free_and_scale() {
    let (u, x, _y, a) = blind_instance(500, 5, 40, 0.0, SignMode::Bernoulli, 1.0, 3);
    let base = check_theorem2_conditions(&x, &u, &a, 0.0, 0.1).unwrap();
    assert!(base.condition3_noise);
    let scaled_x: Vec<f64> = x.iter().map(|v| 10.0 * v).collect();
    let scaled_u: Vec<f64> = u.iter().map(|v| 10.0 * v).collect();
    let scaled = check_theorem2_conditions(&scaled_x, &scaled_u, &a, 0.0, 0.1).unwrap();
    assert!((scaled.c - base.c).abs() < 1e-9 * base.c);
    assert!((scaled.peak_ratio - base.peak_ratio).abs() < 1e-12);
    assert_eq!(scaled.condition1, base.condition1);
    assert_eq!(scaled.condition3_peak, base.condition3_peak);
    assert!((scaled.sign_correlation / scaled.x_norm - base.sign_correlation / base.x_norm).abs() < 1e-9);
}

#[test]
fn blind_sign_alignment_condition() {
    let (u, x, _, a) = blind_instance(1000, 300, 1, 0.0, SignMode::Bernoulli, 1.0, 5);
    let mixed = check_theorem2_conditions(&x, &u, &a, 0.0, 0.1).unwrap();
    assert!(mixed.condition2, "{mixed:?}");
    let (u, x, _, a) = blind_instance(1000, 300, 1, 0.0, SignMode::AllPositive, 1.0, 5);
    let aligned = check_theorem2_conditions(&x, &u, &a, 0.0, 0.1).unwrap();
    assert!(!aligned.condition2, "{aligned:?}");
}

#[test]
fn rip_single_column_is_norm_deviation() {
    let g = normalize_columns(sensing(TOEPLITZ_GAUSSIAN, 20, 40, 2).matrix());
    let est = estimate_rip(&g, 1, 0, RipMethod::Auto, 0).unwrap();
    let expected = (0..40).map(|j| (g.column(j).norm_squared() - 1.0).abs()).fold(0.0, f64::max);
    assert!((est.delta_lower - expected).abs() < 1e-12);
    assert_eq!(est.method, RipMethod::Exhaustive);
    assert_eq!(est.trials, 40);
}

#[test]
fn rip_of_orthonormal_matrix_is_zero() {
    let mut rng = arsense::rng::rng_from_seed(9);
    let a = DMatrix::from_fn(8, 8, |_, _| rng.random::<f64>() - 0.5);
    let q = a.qr().q();
    for s in 1..=4 {
        let est = estimate_rip(&q, s, 10, RipMethod::Auto, 1).unwrap();
        assert!(est.delta_lower < 1e-12, "s={s}: {}", est.delta_lower);
    }
}

#[test]
fn rip_sampled_is_monotone_and_bounded_by_exhaustive() {
    let g = normalize_columns(sensing(TOEPLITZ_GAUSSIAN, 50, 200, 3).matrix());
    let d1 = estimate_rip(&g, 1, 0, RipMethod::Sampled, 5).unwrap();
    let d2 = estimate_rip(&g, 2, 500, RipMethod::Sampled, 5).unwrap();
    assert_eq!(d2.method, RipMethod::Sampled);
    assert!(d2.delta_lower >= d1.delta_lower);
    let exact = estimate_rip(&g, 2, 0, RipMethod::Exhaustive, 0).unwrap();
    assert!(d2.delta_lower <= exact.delta_lower + 1e-12);
}

#[test]
fn rip_rejects_bad_sparsity() {
    let g = DMatrix::<f64>::identity(3, 3);
    assert!(estimate_rip(&g, 0, 1, RipMethod::Auto, 0).is_err());
    assert!(estimate_rip(&g, 4, 1, RipMethod::Auto, 0).is_err());
    let big = DMatrix::<f64>::identity(60, 200);
    assert!(estimate_rip(&big, 3, 1, RipMethod::Exhaustive, 0).is_err());
}
