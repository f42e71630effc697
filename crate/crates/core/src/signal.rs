//! Sparse driving processes and the linear systems that filter them.
//!
//! The driving process is called `u` throughout (some texts write `z`).
//! Causal models use zero initial conditions: `x(t) = 0` for `t < 0`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Poles with modulus at or above this are treated as unstable.
pub const STABILITY_THRESHOLD: f64 = 1.0 - 1e-9;

/// A sparse spike train: dense values plus the sorted support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    values: Vec<f64>,
    support: Vec<usize>,
}

impl SpikeTrain {
    pub fn from_values(values: Vec<f64>) -> Self {
        let support = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        SpikeTrain { values, support }
    }

    pub fn zeros(n: usize) -> Self {
        SpikeTrain {
            values: vec![0.0; n],
            support: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn signs(&self) -> Vec<f64> {
        self.support.iter().map(|&i| self.values[i].signum()).collect()
    }

    /// Smallest index gap between consecutive spikes, `None` for k < 2.
    pub fn min_gap(&self) -> Option<usize> {
        self.support.windows(2).map(|w| w[1] - w[0]).min()
    }

    /// `(min |u_i|, max |u_i|)` over the support, `None` when empty.
    pub fn amplitude_range(&self) -> Option<(f64, f64)> {
        let mut it = self.support.iter().map(|&i| self.values[i].abs());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// Each spike is ±1 times its amplitude with equal probability.
    Bernoulli,
    AllPositive,
}

impl std::str::FromStr for SignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(SignMode::Bernoulli),
            "all_positive" | "positive" => Ok(SignMode::AllPositive),
            other => Err(Error::InvalidArgument(format!("unknown sign mode {other:?}"))),
        }
    }
}

/// Parameters of the constrained spike generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeParams {
    pub n: usize,
    pub k: usize,
    /// Spikes satisfy `|i - j| > min_sep`.
    pub min_sep: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub sign_mode: SignMode,
}

/// Largest `min_sep` for which `k` spikes fit in `n` slots.
pub fn max_feasible_separation(n: usize, k: usize) -> Option<usize> {
    match k {
        0 | 1 => Some(n.saturating_sub(1)),
        _ if n < k => None,
        _ => Some((n - 1) / (k - 1) - 1),
    }
}

/// Draws a spike train with `k` spikes at pairwise distance `> min_sep`.
///
/// Positions are uniform over all admissible configurations: `k` sorted
/// draws without replacement from the slack range are spread out by
/// `min_sep` each, so every draw is accepted.
pub fn make_spike_train(params: &SpikeParams, seed: u64) -> Result<SpikeTrain> {
    let SpikeParams {
        n,
        k,
        min_sep,
        beta_min,
        beta_max,
        sign_mode,
    } = *params;
    if !(beta_min > 0.0 && beta_min <= beta_max && beta_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < beta_min <= beta_max, got [{beta_min}, {beta_max}]"
        )));
    }
    let mut values = vec![0.0; n];
    if k == 0 {
        return Ok(SpikeTrain::from_values(values));
    }
    let span = (k - 1)
        .checked_mul(min_sep + 1)
        .and_then(|s| s.checked_add(1))
        .filter(|&s| s <= n)
        .ok_or(Error::InfeasibleSeparation { n, k, min_sep })?;
    let slack = n - span;

    let mut rng = rng_from_seed(seed);
    let mut picks: Vec<usize> = index::sample(&mut rng, slack + k, k).into_vec();
    picks.sort_unstable();
    for (rank, c) in picks.into_iter().enumerate() {
        let pos = c + rank * min_sep;
        let amp = if beta_min == beta_max {
            beta_min
        } else {
            rng.random_range(beta_min..=beta_max)
        };
        let sign = match sign_mode {
            SignMode::AllPositive => 1.0,
            SignMode::Bernoulli => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        values[pos] = sign * amp;
    }
    Ok(SpikeTrain::from_values(values))
}

/// All-pole model `x(t) + Σ a_i x(t-i) = u(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    coeffs: Vec<f64>,
}

impl ArModel {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ArModel { coeffs }
    }

    /// Expands `Π (λ - α_i)` into AR coefficients. Complex poles must come
    /// in conjugate pairs.
    pub fn from_poles(poles: &[Complex<f64>]) -> Result<Self> {
        let mut poly = vec![Complex::new(1.0, 0.0)];
        for &root in poles {
            let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * root;
            }
            poly = next;
        }
        let scale = poly.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if poly.iter().any(|c| c.im.abs() > 1e-9 * scale) {
            return Err(Error::InvalidArgument(
                "complex poles must appear in conjugate pairs".into(),
            ));
        }
        Ok(ArModel {
            coeffs: poly[1..].iter().map(|c| c.re).collect(),
        })
    }

    pub fn from_real_poles(poles: &[f64]) -> Self {
        let poles: Vec<_> = poles.iter().map(|&r| Complex::new(r, 0.0)).collect();
        Self::from_poles(&poles).expect("real poles always expand to real coefficients")
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Roots of `λ^p + a_1 λ^{p-1} + … + a_p`, from the companion matrix.
    pub fn poles(&self) -> Vec<Complex<f64>> {
        let p = self.order();
        if p == 0 {
            return Vec::new();
        }
        let mut companion = DMatrix::<f64>::zeros(p, p);
        for (j, &a) in self.coeffs.iter().enumerate() {
            companion[(0, j)] = -a;
        }
        for i in 1..p {
            companion[(i, i - 1)] = 1.0;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }

    pub fn max_pole_modulus(&self) -> f64 {
        self.poles().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.max_pole_modulus() < STABILITY_THRESHOLD
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Draws a stable AR(p) model with pole moduli uniform in `[lo, hi]`:
/// conjugate pairs (uniform angle in (0, π)) or real poles of random sign.
pub fn random_stable_ar(p: usize, lo: f64, hi: f64, rng: &mut Rng) -> ArModel {
    let mut poles = Vec::with_capacity(p);
    while poles.len() < p {
        let r = rng.random_range(lo..=hi);
        if p - poles.len() >= 2 && rng.random_bool(0.5) {
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let z = Complex::from_polar(r, theta);
            poles.push(z);
            poles.push(z.conj());
        } else {
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            poles.push(Complex::new(s * r, 0.0));
        }
    }
    ArModel::from_poles(&poles).expect("poles are generated in conjugate pairs")
}

/// Runs the AR recursion `x(t) = u(t) - Σ a_i x(t-i)` from rest.
pub fn ar_forward(model: &ArModel, u: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; u.len()];
    for t in 0..u.len() {
        let mut acc = u[t];
        for (i, &a) in model.coeffs.iter().enumerate() {
            if let Some(prev) = t.checked_sub(i + 1) {
                acc -= a * x[prev];
            }
        }
        x[t] = acc;
    }
    x
}

pub fn impulse_response(model: &ArModel, length: usize) -> Vec<f64> {
    let mut delta = vec![0.0; length];
    if let Some(first) = delta.first_mut() {
        *first = 1.0;
    }
    ar_forward(model, &delta)
}

/// Exponential envelope `|h(t)| <= m * rho^t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub m: f64,
    pub rho: f64,
}

/// Default relative inflation of the pole radius; repeated poles give
/// `t·ρ^t` terms that no envelope with `ρ = max |pole|` can cover.
pub const DEFAULT_ENVELOPE_SAFETY: f64 = 0.01;

/// Fits `(M, ρ)`: `ρ = min(1 - 1e-6, ρ_max (1 + safety))` and
/// `M = max_{t <= horizon} |h(t)| / ρ^t`.
pub fn fit_decay_envelope(model: &ArModel, horizon: usize, safety: f64) -> Result<DecayEnvelope> {
    let rho_max = model.max_pole_modulus();
    if rho_max >= STABILITY_THRESHOLD {
        return Err(Error::Unstable {
            max_modulus: rho_max,
        });
    }
    let rho = (rho_max * (1.0 + safety)).clamp(1e-3, 1.0 - 1e-6);
    let h = impulse_response(model, horizon + 1);
    let mut m: f64 = 0.0;
    let mut scale = 1.0;
    for v in h {
        m = m.max(v.abs() / scale);
        scale *= rho;
        if scale < 1e-300 {
            break;
        }
    }
    Ok(DecayEnvelope { m, rho })
}

/// ARMA model `x(t) + Σ a_i x(t-i) = u(t) + Σ b_i u(t-i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmaModel {
    pub ar: ArModel,
    pub ma: Vec<f64>,
}

impl ArmaModel {
    pub fn new(ar: ArModel, ma: Vec<f64>) -> Self {
        ArmaModel { ar, ma }
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }
}

/// Applies the unit-diagonal banded lower-triangular `B` built from `b`.
pub fn ma_filter(b: &[f64], u: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|t| {
            let mut acc = u[t];
            for (i, &bi) in b.iter().enumerate() {
                if let Some(prev) = t.checked_sub(i + 1) {
                    acc += bi * u[prev];
                }
            }
            acc
        })
        .collect()
}

/// The `n x n` matrix `B` with ones on the diagonal and `b_i` on the i-th subdiagonal.
pub fn ma_matrix(b: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    for (i, &bi) in b.iter().enumerate() {
        for t in (i + 1)..n {
            m[(t, t - i - 1)] = bi;
        }
    }
    m
}

pub fn arma_forward(model: &ArmaModel, u: &[f64]) -> Vec<f64> {
    ar_forward(&model.ar, &ma_filter(&model.ma, u))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Indices wrap modulo n.
    Circulant,
    /// Samples outside `0..n` are zero.
    Open,
}

/// Two-sided model `x(t) + Σ a_i x(t-i) + Σ a_{-i} x(t+i) = u(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncausalArModel {
    /// `a_1..a_p`
    pub forward: Vec<f64>,
    /// `a_{-1}..a_{-p}`
    pub backward: Vec<f64>,
    pub boundary: Boundary,
}

impl NoncausalArModel {
    pub fn new(forward: Vec<f64>, backward: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if forward.len() != backward.len() {
            return Err(Error::DimensionMismatch {
                what: "backward coefficients",
                expected: forward.len(),
                found: backward.len(),
            });
        }
        Ok(NoncausalArModel {
            forward,
            backward,
            boundary,
        })
    }

    /// Splits `[a_1..a_p, a_{-1}..a_{-p}]`.
    pub fn from_stacked(coeffs: &[f64], boundary: Boundary) -> Result<Self> {
        if !coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "stacked non-causal coefficients must have even length".into(),
            ));
        }
        let p = coeffs.len() / 2;
        Self::new(coeffs[..p].to_vec(), coeffs[p..].to_vec(), boundary)
    }

    pub fn order(&self) -> usize {
        self.forward.len()
    }

    pub fn system_matrix(&self, n: usize) -> DMatrix<f64> {
        let mut a = DMatrix::identity(n, n);
        if n == 0 {
            return a;
        }
        for t in 0..n {
            for i in 1..=self.order() {
                let (fwd, bwd) = (self.forward[i - 1], self.backward[i - 1]);
                match self.boundary {
                    Boundary::Circulant => {
                        a[(t, (t + n * i - i) % n)] += fwd;
                        a[(t, (t + i) % n)] += bwd;
                    }
                    Boundary::Open => {
                        if t >= i {
                            a[(t, t - i)] += fwd;
                        }
                        if t + i < n {
                            a[(t, t + i)] += bwd;
                        }
                    }
                }
            }
        }
        a
    }
}

/// Solves the banded (or circulant-banded) system `A x = u`.
pub fn noncausal_forward(model: &NoncausalArModel, u: &[f64]) -> Result<Vec<f64>> {
    let n = u.len();
    let a = model.system_matrix(n);
    let rhs = DVector::from_column_slice(u);
    let x = a
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("non-causal system matrix for n = {n}")))?;
    let resid = (&a * &x - &rhs).amax();
    if !x.iter().all(|v| v.is_finite()) || resid > 1e-8 * (1.0 + rhs.amax()) {
        return Err(Error::Singular(format!(
            "non-causal system matrix for n = {n} (residual {resid:.2e})"
        )));
    }
    Ok(x.iter().copied().collect())
}
