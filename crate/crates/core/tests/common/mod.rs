#![allow(dead_code)]

use arsense::sensing::{build_sensing, Distribution, SensingKind, SensingOperator, Structure};
use arsense::signal::{make_spike_train, SignMode, SpikeParams, SpikeTrain};

pub const TOEPLITZ_GAUSSIAN: SensingKind = SensingKind::new(Structure::Toeplitz, Distribution::Gaussian);
pub const TOEPLITZ_BERNOULLI: SensingKind = SensingKind::new(Structure::Toeplitz, Distribution::Bernoulli);
pub const CIRCULANT_GAUSSIAN: SensingKind = SensingKind::new(Structure::Circulant, Distribution::Gaussian);

pub fn spikes(n: usize, k: usize, min_sep: usize, seed: u64) -> SpikeTrain {
    let params = SpikeParams {
        n,
        k,
        min_sep,
        beta_min: 1.0,
        beta_max: 1.0,
        sign_mode: SignMode::Bernoulli,
    };
    make_spike_train(&params, seed).unwrap()
}

pub fn sensing(kind: SensingKind, m: usize, n: usize, seed: u64) -> SensingOperator {
    build_sensing(kind, m, n, seed).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
