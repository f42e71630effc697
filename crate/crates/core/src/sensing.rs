//! Random sensing operators and the lagged regressor systems built from
//! their measurements.
//!
//! For a partial Toeplitz operator, shifting the signal shifts the
//! measurements, so the AR recursion applied to `y` reproduces the
//! sensing of the driving process on the last `m - p` rows:
//! `Y a + y[p..] = G[p..] u`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Toeplitz,
    Circulant,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Gaussian,
    Bernoulli,
}

/// Serialized as its label, for example `"toeplitz-gaussian"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SensingKind {
    pub structure: Structure,
    pub distribution: Distribution,
}

impl SensingKind {
    pub const fn new(structure: Structure, distribution: Distribution) -> Self {
        SensingKind {
            structure,
            distribution,
        }
    }

    pub fn label(&self) -> String {
        let s = match self.structure {
            Structure::Toeplitz => "toeplitz",
            Structure::Circulant => "circulant",
            Structure::Dense => "dense",
        };
        let d = match self.distribution {
            Distribution::Gaussian => "gaussian",
            Distribution::Bernoulli => "bernoulli",
        };
        format!("{s}-{d}")
    }
}

impl std::fmt::Display for SensingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for SensingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidArgument(format!("sensing kind {s:?} is not <structure>-<distribution>")))?;
        let structure = match a {
            "toeplitz" => Structure::Toeplitz,
            "circulant" => Structure::Circulant,
            "dense" => Structure::Dense,
            _ => return Err(Error::InvalidArgument(format!("unknown structure {a:?}"))),
        };
        let distribution = match b {
            "gaussian" => Distribution::Gaussian,
            "bernoulli" => Distribution::Bernoulli,
            _ => return Err(Error::InvalidArgument(format!("unknown distribution {b:?}"))),
        };
        Ok(SensingKind::new(structure, distribution))
    }
}

impl TryFrom<String> for SensingKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SensingKind> for String {
    fn from(kind: SensingKind) -> String {
        kind.label()
    }
}

/// A materialized `m x n` sensing matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingOperator {
    pub kind: SensingKind,
    pub seed: u64,
    matrix: DMatrix<f64>,
    /// Generator `g_0..g_{n-1}` for the structured kinds.
    generator: Option<Vec<f64>>,
}

fn draw(dist: Distribution, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| match dist {
            Distribution::Gaussian => rng.sample::<f64, _>(StandardNormal),
            Distribution::Bernoulli => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect()
}

/// Toeplitz layout: `G[i, j] = g[n - m + i - j]` when that index is `>= 0`.
pub fn toeplitz_from_generator(g: &[f64], m: usize) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(m, n, |i, j| {
        let idx = (n - m + i) as isize - j as isize;
        if idx >= 0 {
            g[idx as usize]
        } else {
            0.0
        }
    })
}

/// Circulant layout: `G[i, j] = g[(n - m + i - j) mod n]`.
pub fn circulant_from_generator(g: &[f64], m: usize) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(m, n, |i, j| g[(n - m + i + n - j) % n])
}

pub fn build_sensing(kind: SensingKind, m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("sensing dimensions must be positive, got {m}x{n}")));
    }
    if kind.structure != Structure::Dense && m > n {
        return Err(Error::InvalidArgument(format!(
            "{} sensing needs m <= n, got {m}x{n}",
            kind.label()
        )));
    }
    let (matrix, generator) = match kind.structure {
        Structure::Toeplitz => {
            let g = draw(kind.distribution, n, seed);
            (toeplitz_from_generator(&g, m), Some(g))
        }
        Structure::Circulant => {
            let g = draw(kind.distribution, n, seed);
            (circulant_from_generator(&g, m), Some(g))
        }
        Structure::Dense => {
            let v = draw(kind.distribution, m * n, seed);
            (DMatrix::from_row_slice(m, n, &v), None)
        }
    };
    Ok(SensingOperator {
        kind,
        seed,
        matrix,
        generator,
    })
}

impl SensingOperator {
    /// Wraps an existing matrix (e.g. one read from disk).
    pub fn from_matrix(kind: SensingKind, seed: u64, matrix: DMatrix<f64>) -> Self {
        let generator = match kind.structure {
            Structure::Dense => None,
            _ => {
                let (m, n) = matrix.shape();
                // last row holds g_{n-1} .. g_0 for both structured layouts
                let mut g = vec![0.0; n];
                for j in 0..n {
                    let idx = (n - m + (m - 1) + n - j) % n;
                    g[idx] = matrix[(m - 1, j)];
                }
                Some(g)
            }
        };
        SensingOperator {
            kind,
            seed,
            matrix,
            generator,
        }
    }

    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn generator(&self) -> Option<&[f64]> {
        self.generator.as_deref()
    }

    /// The last `s` rows (`G^[s]`).
    pub fn last_rows(&self, s: usize) -> DMatrix<f64> {
        self.rows(self.m() - s, self.m())
    }

    /// Rows `start..end`.
    pub fn rows(&self, start: usize, end: usize) -> DMatrix<f64> {
        self.matrix.rows(start, end - start).into_owned()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        apply(self, x)
    }
}

pub fn apply(g: &SensingOperator, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != g.n() {
        return Err(Error::DimensionMismatch {
            what: "signal length",
            expected: g.n(),
            found: x.len(),
        });
    }
    let y = g.matrix() * DVector::from_column_slice(x);
    Ok(y.iter().copied().collect())
}

/// Adds IID `N(0, sigma²)` noise.
pub fn add_noise(y: &[f64], sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(y.to_vec());
    }
    let w = draw(Distribution::Gaussian, y.len(), seed);
    Ok(y.iter().zip(w).map(|(v, e)| v + sigma * e).collect())
}

/// Lagged measurements of a dense random projection: block `c` holds
/// `G S^c x`, where `S^c` delays the signal by `c` samples.
///
/// Without shift structure each lag has to be measured separately, so a
/// `p`-th order model costs `m (p + 1)` measurements instead of `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionBlocks {
    pub blocks: Vec<Vec<f64>>,
}

impl ProjectionBlocks {
    pub fn measurement_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

pub fn measure_projection_blocks(g: &SensingOperator, x: &[f64], p: usize) -> Result<ProjectionBlocks> {
    let blocks = (0..=p)
        .map(|c| {
            let mut shifted = vec![0.0; x.len()];
            if c < x.len() {
                shifted[c..].copy_from_slice(&x[..x.len() - c]);
            }
            apply(g, &shifted)
        })
        .collect::<Result<_>>()?;
    Ok(ProjectionBlocks { blocks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorVariant {
    Compressed,
    Blind,
    Arma,
    NoncausalCirculant,
    NoncausalOpen,
}

/// The samples `x_0..x_{p-1}` and `x_{n-p}..x_{n-1}` measured directly,
/// which make the open-boundary non-causal system exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySamples {
    pub head: Vec<f64>,
    pub tail: Vec<f64>,
}

impl BoundarySamples {
    pub fn from_signal(x: &[f64], p: usize) -> Self {
        let n = x.len();
        BoundarySamples {
            head: x[..p.min(n)].to_vec(),
            tail: x[n.saturating_sub(p)..].to_vec(),
        }
    }
}

/// `Y a + rhs = Gsub u` (noiseless), the linearization every decoder solves.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressorSystem {
    pub y_lag: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub g_sub: DMatrix<f64>,
    pub variant: RegressorVariant,
    pub p: usize,
    pub q: usize,
    /// Rows of the full operator used by `g_sub`.
    pub first_row: usize,
    /// Total scalar measurements consumed.
    pub measurements: usize,
}

impl RegressorSystem {
    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    /// `‖Y a + rhs − Gsub u‖∞`.
    pub fn residual(&self, a: &[f64], u: &[f64]) -> f64 {
        let a = DVector::from_column_slice(a);
        let u = DVector::from_column_slice(u);
        (&self.y_lag * a + &self.rhs - &self.g_sub * u).amax()
    }
}

/// Options beyond `(y, p, variant)`; which fields matter depends on the variant.
#[derive(Clone, Copy, Debug, Default)]
pub struct RegressorInputs<'a> {
    pub sensing: Option<&'a SensingOperator>,
    pub q: usize,
    pub boundary: Option<&'a BoundarySamples>,
}

pub fn build_regressor(y: &[f64], p: usize, variant: RegressorVariant, inputs: RegressorInputs<'_>) -> Result<RegressorSystem> {
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("measurement vector contains {bad}")));
    }
    match variant {
        RegressorVariant::Compressed | RegressorVariant::Arma => {
            let g = require_sensing(inputs.sensing, y.len())?;
            // Without lags no measurement is reused, so any ensemble works.
            if p > 0 && g.kind.structure != Structure::Toeplitz {
                return Err(Error::ShiftStructureRequired(structure_name(g.kind.structure)));
            }
            let m = y.len();
            if m <= p {
                return Err(Error::InsufficientMeasurements { m, needed: p });
            }
            let rows = m - p;
            let y_lag = DMatrix::from_fn(rows, p, |r, c| y[p + r - 1 - c]);
            Ok(RegressorSystem {
                y_lag,
                rhs: DVector::from_column_slice(&y[p..]),
                g_sub: g.last_rows(rows),
                variant,
                p,
                q: if variant == RegressorVariant::Arma { inputs.q } else { 0 },
                first_row: p,
                measurements: m,
            })
        }
        RegressorVariant::Blind => {
            let n = y.len();
            if n <= p {
                return Err(Error::InsufficientMeasurements { m: n, needed: p });
            }
            let y_lag = DMatrix::from_fn(n, p, |t, c| if t > c { y[t - 1 - c] } else { 0.0 });
            Ok(RegressorSystem {
                y_lag,
                rhs: DVector::from_column_slice(y),
                g_sub: DMatrix::identity(n, n),
                variant,
                p,
                q: 0,
                first_row: 0,
                measurements: n,
            })
        }
        RegressorVariant::NoncausalCirculant | RegressorVariant::NoncausalOpen => {
            let g = require_sensing(inputs.sensing, y.len())?;
            if g.kind.structure != Structure::Circulant {
                return Err(Error::ShiftStructureRequired(structure_name(g.kind.structure)));
            }
            let m = y.len();
            if m <= 2 * p {
                return Err(Error::InsufficientMeasurements { m, needed: 2 * p });
            }
            let rows = m - 2 * p;
            let mut y_lag = DMatrix::from_fn(rows, 2 * p, |r, c| {
                let i = p + r;
                if c < p {
                    y[i - (c + 1)]
                } else {
                    y[i + (c - p + 1)]
                }
            });
            let g_sub = g.rows(p, m - p);
            let mut measurements = m;
            if variant == RegressorVariant::NoncausalOpen {
                if let Some(bs) = inputs.boundary {
                    if bs.head.len() != p || bs.tail.len() != p {
                        return Err(Error::DimensionMismatch {
                            what: "boundary samples",
                            expected: p,
                            found: bs.head.len().min(bs.tail.len()),
                        });
                    }
                    y_lag -= &g_sub * wrap_correction(bs, g.n(), p);
                    measurements += 2 * p;
                }
            }
            Ok(RegressorSystem {
                y_lag,
                rhs: DVector::from_column_slice(&y[p..m - p]),
                g_sub,
                variant,
                p,
                q: 0,
                first_row: p,
                measurements,
            })
        }
    }
}

/// `D` with `A_circ x = A_open x + D a`: the wrapped-around terms that the
/// circulant relation adds but the zero-padded model does not contain.
fn wrap_correction(bs: &BoundarySamples, n: usize, p: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, 2 * p);
    for c in 1..=p {
        // forward lag c at rows j < c reads x_{n-c+j}
        for j in 0..c.min(n) {
            d[(j, c - 1)] = bs.tail[p - c + j];
        }
        // backward lag c at rows j >= n-c reads x_{j+c-n}
        for j in n.saturating_sub(c)..n {
            d[(j, p + c - 1)] = bs.head[j + c - n];
        }
    }
    d
}

fn structure_name(s: Structure) -> &'static str {
    match s {
        Structure::Toeplitz => "toeplitz",
        Structure::Circulant => "circulant",
        Structure::Dense => "dense",
    }
}

fn require_sensing(g: Option<&SensingOperator>, m: usize) -> Result<&SensingOperator> {
    let g = g.ok_or_else(|| Error::InvalidArgument("this regressor variant needs the sensing operator".into()))?;
    if g.m() != m {
        return Err(Error::DimensionMismatch {
            what: "measurement count",
            expected: g.m(),
            found: m,
        });
    }
    Ok(g)
}

/// Compressed regressor from dense projection blocks: `Y[:, c-1] = block c`,
/// `rhs = block 0`, `Gsub = G`.
pub fn build_projection_regressor(blocks: &ProjectionBlocks, g: &SensingOperator) -> Result<RegressorSystem> {
    let p = blocks.blocks.len().saturating_sub(1);
    let m = g.m();
    for b in &blocks.blocks {
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                what: "projection block",
                expected: m,
                found: b.len(),
            });
        }
    }
    let rhs = blocks
        .blocks
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one projection block".into()))?;
    Ok(RegressorSystem {
        y_lag: DMatrix::from_fn(m, p, |r, c| blocks.blocks[c + 1][r]),
        rhs: DVector::from_column_slice(rhs),
        g_sub: g.matrix().clone(),
        variant: RegressorVariant::Compressed,
        p,
        q: 0,
        first_row: 0,
        measurements: blocks.measurement_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{ar_forward, noncausal_forward, ArModel, Boundary, NoncausalArModel};

    const TB: SensingKind = SensingKind::new(Structure::Toeplitz, Distribution::Bernoulli);
    const TG: SensingKind = SensingKind::new(Structure::Toeplitz, Distribution::Gaussian);
    const CG: SensingKind = SensingKind::new(Structure::Circulant, Distribution::Gaussian);

    #[test]
    fn toeplitz_layout_2x3() {
        let g = build_sensing(TB, 2, 3, 11).unwrap();
        let gen = g.generator().unwrap().to_vec();
        let expect = DMatrix::from_row_slice(2, 3, &[gen[1], gen[0], 0.0, gen[2], gen[1], gen[0]]);
        assert_eq!(g.matrix(), &expect);
        assert!(gen.iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn toeplitz_shift_structure_50x200() {
        let g = build_sensing(TG, 50, 200, 1).unwrap();
        assert_eq!(g.matrix().shape(), (50, 200));
        let a = g.matrix();
        for i in 0..49 {
            for j in 0..199 {
                assert_eq!(a[(i + 1, j + 1)], a[(i, j)]);
            }
        }
        assert_eq!(a[(0, 151)], 0.0);
        assert_ne!(a[(0, 150)], 0.0);
    }

    #[test]
    fn dense_rows_differ() {
        let g = build_sensing(SensingKind::new(Structure::Dense, Distribution::Gaussian), 5, 30, 2).unwrap();
        for i in 0..5 {
            for k in (i + 1)..5 {
                assert_ne!(g.matrix().row(i), g.matrix().row(k));
            }
        }
    }

    #[test]
    fn apply_examples() {
        let g = build_sensing(TG, 6, 10, 3).unwrap();
        assert!(g.apply(&[0.0; 10]).unwrap().iter().all(|v| *v == 0.0));
        let mut e = vec![0.0; 10];
        e[9] = 1.0;
        let y = g.apply(&e).unwrap();
        let gen = g.generator().unwrap();
        assert_eq!(y, vec![0.0, 0.0, 0.0, 0.0, 0.0, gen[0]]);
        let mut e0 = vec![0.0; 10];
        e0[0] = 1.0;
        assert_eq!(g.apply(&e0).unwrap(), gen[4..10].to_vec());
        assert!(matches!(g.apply(&[1.0; 3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn circulant_commutes_with_cyclic_shift() {
        let n = 12;
        let g = build_sensing(CG, 12, n, 4).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut shifted = vec![0.0; n];
        for i in 0..n {
            shifted[(i + 1) % n] = x[i];
        }
        let y = g.apply(&x).unwrap();
        let ys = g.apply(&shifted).unwrap();
        for i in 0..n {
            assert!((ys[(i + 1) % n] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn generator_round_trips_through_matrix() {
        for kind in [TG, CG] {
            let g = build_sensing(kind, 7, 15, 8).unwrap();
            let back = SensingOperator::from_matrix(kind, 8, g.matrix().clone());
            assert_eq!(back.generator(), g.generator());
        }
    }

    #[test]
    fn noise_examples() {
        let y = vec![1.0; 200];
        assert_eq!(add_noise(&y, 0.0, 1).unwrap(), y);
        let sigma = 0.1;
        let a = add_noise(&y, sigma, 1).unwrap();
        let var = a.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / 200.0;
        assert!((0.005..=0.02).contains(&var), "{var}");
        assert_ne!(a, add_noise(&y, sigma, 2).unwrap());
    }

    #[test]
    fn compressed_regressor_p1_unrolled() {
        let g = build_sensing(TG, 5, 8, 0).unwrap();
        let y = [0.5, -1.0, 2.0, 3.0, 4.0];
        let r = build_regressor(&y, 1, RegressorVariant::Compressed, RegressorInputs { sensing: Some(&g), ..Default::default() }).unwrap();
        assert_eq!(r.y_lag.as_slice(), &[0.5, -1.0, 2.0, 3.0]);
        assert_eq!(r.rhs.as_slice(), &[-1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.g_sub, g.last_rows(4));
    }

    #[test]
    fn blind_regressor_display() {
        let r = build_regressor(&[1.0, 2.0, 3.0], 2, RegressorVariant::Blind, Default::default()).unwrap();
        let expect = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 2.0, 1.0]);
        assert_eq!(r.y_lag, expect);
    }

    #[test]
    fn compressed_identity_holds_exactly() {
        let model = ArModel::new(vec![-1.4, 0.45]);
        let g = build_sensing(TG, 50, 200, 9).unwrap();
        let mut u = vec![0.0; 200];
        u[30] = 1.0;
        u[120] = -1.5;
        u[197] = 0.7;
        let x = ar_forward(&model, &u);
        let y = g.apply(&x).unwrap();
        let r = build_regressor(&y, 2, RegressorVariant::Compressed, RegressorInputs { sensing: Some(&g), ..Default::default() }).unwrap();
        assert!(r.residual(model.coeffs(), &u) < 1e-9);
    }

    #[test]
    fn dense_sensing_rejected_for_shift_regressor() {
        let g = build_sensing(SensingKind::new(Structure::Dense, Distribution::Gaussian), 10, 20, 0).unwrap();
        let y = vec![0.0; 10];
        let err = build_regressor(&y, 1, RegressorVariant::Compressed, RegressorInputs { sensing: Some(&g), ..Default::default() });
        assert!(matches!(err, Err(Error::ShiftStructureRequired(_))));
        let err = build_regressor(&y[..1], 1, RegressorVariant::Blind, Default::default());
        assert!(matches!(err, Err(Error::InsufficientMeasurements { .. })));
    }

    #[test]
    fn projection_blocks_identity() {
        let model = ArModel::new(vec![-0.8, 0.1]);
        let g = build_sensing(SensingKind::new(Structure::Dense, Distribution::Bernoulli), 15, 40, 5).unwrap();
        let mut u = vec![0.0; 40];
        u[3] = 1.0;
        u[22] = -2.0;
        let x = ar_forward(&model, &u);
        let blocks = measure_projection_blocks(&g, &x, 2).unwrap();
        assert_eq!(blocks.measurement_count(), 45);
        let r = build_projection_regressor(&blocks, &g).unwrap();
        assert!(r.residual(model.coeffs(), &u) < 1e-10);
    }

    #[test]
    fn noncausal_identities() {
        let n = 60;
        let m = 30;
        let g = build_sensing(CG, m, n, 12).unwrap();
        let mut u = vec![0.0; n];
        u[1] = 1.0;
        u[33] = -0.8;
        u[58] = 0.6;
        let a = [-0.375, 0.05, -0.5, 0.02];

        let circ = NoncausalArModel::from_stacked(&a, Boundary::Circulant).unwrap();
        let x = noncausal_forward(&circ, &u).unwrap();
        let y = g.apply(&x).unwrap();
        let r = build_regressor(&y, 2, RegressorVariant::NoncausalCirculant, RegressorInputs { sensing: Some(&g), ..Default::default() }).unwrap();
        assert_eq!(r.y_lag.shape(), (m - 4, 4));
        assert!(r.residual(&a, &u) < 1e-9);

        let open = NoncausalArModel::from_stacked(&a, Boundary::Open).unwrap();
        let x = noncausal_forward(&open, &u).unwrap();
        let y = g.apply(&x).unwrap();
        let biased = build_regressor(&y, 2, RegressorVariant::NoncausalOpen, RegressorInputs { sensing: Some(&g), ..Default::default() }).unwrap();
        assert!(biased.residual(&a, &u) > 1e-3);
        let bs = BoundarySamples::from_signal(&x, 2);
        let exact = build_regressor(&y, 2, RegressorVariant::NoncausalOpen, RegressorInputs { sensing: Some(&g), boundary: Some(&bs), ..Default::default() }).unwrap();
        assert!(exact.residual(&a, &u) < 1e-9);
        assert_eq!(exact.measurements, m + 4);
    }
}
