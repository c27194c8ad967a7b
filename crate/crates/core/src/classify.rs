//! Binary classification with a screened Dantzig selector.
//!
//! Training keeps the `N` highest-variance features, solves the reduced
//! selector with `D = I`, and embeds the coefficients back into the full
//! feature space. Prediction thresholds `Xβ̂` at 0.49/0.51 and assigns the
//! values in between to the nearer of the two cluster edges.

use alloc::vec;
use alloc::vec::Vec;

use crate::clock::{Clock, NullClock};
use crate::error::{check_len, Error, Result};
use crate::fpsolver::solve_with_operator;
use crate::linop::DantzigOperator;
use crate::matrix::Matrix;
use crate::problem::{ChangeMeasure, ProblemInstance, Scheme, SolveResult, SolverConfig};
use crate::rng::{derive_seed, seeded, standard_normal};

use rand::Rng;

pub const LOWER_THRESHOLD: f64 = 0.49;
pub const UPPER_THRESHOLD: f64 = 0.51;
pub const DEFAULT_N_TOP: usize = 1000;
pub const DELTA_GRID: [f64; 6] = [0.0625, 0.125, 0.1875, 0.25, 0.3125, 0.375];

/// Features with unit-norm columns plus 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<u8>,
    scales: Vec<f64>,
}

impl LabeledDataset {
    /// Normalizes every column of `raw` to unit ℓ2 norm and records the
    /// original norms. All-zero columns are left as they are, with scale 0.
    pub fn new(raw: Matrix, labels: Vec<u8>) -> Result<Self> {
        check_len("labels", raw.nrows(), labels.len())?;
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidParameter {
                name: "labels",
                reason: "must be 0 or 1",
            });
        }
        let scales = raw.column_norms();
        let mut features = raw;
        for i in 0..features.nrows() {
            for (v, s) in features.row_mut(i).iter_mut().zip(&scales) {
                if *s > 0.0 {
                    *v /= s;
                }
            }
        }
        Ok(Self {
            features,
            labels,
            scales,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Column norms of the raw features.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Labels as regression targets.
    pub fn targets(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| f64::from(l)).collect()
    }

    /// Undoes the column normalization.
    pub fn raw_features(&self) -> Matrix {
        Matrix::from_fn(self.features.nrows(), self.features.ncols(), |i, j| {
            let s = self.scales[j];
            if s > 0.0 {
                self.features.get(i, j) * s
            } else {
                self.features.get(i, j)
            }
        })
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }
}

/// Sample variance (divisor `rows − 1`) of each column.
pub fn column_variances(x: &Matrix) -> Vec<f64> {
    let rows = x.nrows();
    if rows < 2 {
        return vec![0.0; x.ncols()];
    }
    let mut mean = vec![0.0; x.ncols()];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut var = vec![0.0; x.ncols()];
    for row in x.rows() {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= (rows - 1) as f64);
    var
}

/// Indices (ascending) of the `n_top` training columns with the largest
/// sample variance; ties go to the lower index.
pub fn select_top_variance(train: &LabeledDataset, n_top: usize) -> Result<Vec<usize>> {
    let p = train.n_features();
    if n_top > p {
        return Err(Error::NTooLarge {
            requested: n_top,
            available: p,
        });
    }
    let var = column_variances(train.features());
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = order.into_iter().take(n_top).collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Settings used for the classification experiment: `α = ‖X̃ᵀX̃‖₂²`,
/// derived `λ`, `tol = 0.1`, `η = 80`, `ε = 1e-4`, no refit.
pub fn classify_config(norm_estimate: f64) -> SolverConfig {
    SolverConfig {
        alpha: norm_estimate * norm_estimate,
        lambda: None,
        tol: 0.1,
        epsilon: 1e-4,
        eta: 80,
        max_iters: SolverConfig::DEFAULT_MAX_ITERS,
        scheme: Scheme::TauFirst,
        postprocess: false,
        change_measure: ChangeMeasure::Primal,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Coefficients over all features; zero off the screened set.
    pub beta_hat: Vec<f64>,
    pub support: Vec<usize>,
    /// Result of the reduced solve (length `|support|`).
    pub result: SolveResult,
}

/// Reduced problem on the columns in `support`, with `D = I`.
pub fn reduced_problem(train: &LabeledDataset, support: &[usize], delta: f64) -> Result<ProblemInstance> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let sub = train.features().select_columns(support)?;
    ProblemInstance::with_unit_scaling(sub, train.targets(), delta)
}

fn embed(p: usize, support: &[usize], coef: &[f64]) -> Vec<f64> {
    let mut beta = vec![0.0; p];
    for (&j, c) in support.iter().zip(coef) {
        beta[j] = *c;
    }
    beta
}

/// Trains with an explicit configuration.
pub fn train_reduced(
    train: &LabeledDataset,
    support: &[usize],
    delta: f64,
    cfg: &SolverConfig,
) -> Result<TrainedModel> {
    train_reduced_timed(train, support, delta, Some(cfg), &NullClock)
}

/// Trains with [`classify_config`] derived from the reduced operator.
pub fn train_reduced_default(train: &LabeledDataset, support: &[usize], delta: f64) -> Result<TrainedModel> {
    train_reduced_timed(train, support, delta, None, &NullClock)
}

/// Trains and times the reduced solve (operator setup included). With
/// `cfg = None` the defaults of [`classify_config`] are used.
pub fn train_reduced_timed(
    train: &LabeledDataset,
    support: &[usize],
    delta: f64,
    cfg: Option<&SolverConfig>,
    clock: &dyn Clock,
) -> Result<TrainedModel> {
    let problem = reduced_problem(train, support, delta)?;
    let start = clock.now();
    let op = DantzigOperator::new(&problem)?;
    let derived;
    let cfg = match cfg {
        Some(c) => c,
        None => {
            derived = classify_config(op.norm_estimate());
            &derived
        }
    };
    let mut result = solve_with_operator(&op, cfg, clock)?;
    result.wall_seconds = (clock.now() - start).max(0.0);
    Ok(TrainedModel {
        beta_hat: embed(train.n_features(), support, &result.beta_hat),
        support: support.to_vec(),
        result,
    })
}

/// Threshold-and-cluster labelling of raw scores.
///
/// Scores below 0.49 get 0 and above 0.51 get 1. A score in the band
/// `[0.49, 0.51]` goes to the nearer of `y₀ = max{y < 0.49}` and
/// `y₁ = min{y > 0.51}`, ties to 0. When either edge is missing the band
/// is split at 0.5, with 0.5 itself labelled 1.
pub fn threshold_labels(scores: &[f64]) -> Vec<u8> {
    let y0 = scores
        .iter()
        .copied()
        .filter(|&v| v < LOWER_THRESHOLD)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let y1 = scores
        .iter()
        .copied()
        .filter(|&v| v > UPPER_THRESHOLD)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    scores
        .iter()
        .map(|&v| {
            if v < LOWER_THRESHOLD {
                0
            } else if v > UPPER_THRESHOLD {
                1
            } else {
                match (y0, y1) {
                    (Some(a), Some(b)) => u8::from((v - a).abs() > (v - b).abs()),
                    _ => u8::from(v >= 0.5),
                }
            }
        })
        .collect()
}

/// Scores `X_test·β̂` and their labels.
pub fn predict_labels(test_features: &Matrix, beta_hat: &[f64]) -> Result<(Vec<f64>, Vec<u8>)> {
    let scores = test_features.mul_vec(beta_hat)?;
    let labels = threshold_labels(&scores);
    Ok((scores, labels))
}

/// Number of positions where the labels differ.
pub fn misdiagnosis_count(predicted: &[u8], actual: &[u8]) -> Result<usize> {
    check_len("label vectors", actual.len(), predicted.len())?;
    Ok(predicted.iter().zip(actual).filter(|(a, b)| a != b).count())
}

/// Shape of a synthetic two-class dataset with a planted sparse linear rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    /// Number of informative features.
    pub n_planted: usize,
    /// Gap between the score ranges of the two classes.
    pub margin: f64,
    /// Standard deviation of the noise added to every raw feature.
    pub noise: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            n_train: 60,
            n_test: 40,
            n_features: 500,
            n_planted: 10,
            margin: 0.6,
            noise: 0.02,
        }
    }
}

/// Planted dataset split into training and test sets.
#[derive(Debug, Clone)]
pub struct PlantedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Indices of the informative features, ascending.
    pub planted: Vec<usize>,
}

/// Generates a planted two-class dataset.
///
/// Each row draws a score `t`, uniform on `[0, (1 − margin)/2]` for class
/// 0 and on `[(1 + margin)/2, 1]` for class 1, and informative features `z`
/// with `w·z = t` for a fixed positive weight vector `w`. The remaining
/// features sit on a nonzero constant level, so after column normalization
/// they vary far less than the informative ones. Every raw entry then gets
/// Gaussian noise. Classes alternate by row so both are always present.
pub fn gen_planted(spec: &PlantedSpec, seed: u64) -> Result<PlantedData> {
    let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
    if spec.n_planted < 2 || spec.n_planted > spec.n_features {
        return bad("n_planted", "need 2 ≤ n_planted ≤ n_features");
    }
    if spec.n_train < 2 || spec.n_test < 2 {
        return bad("rows", "need at least two rows per split");
    }
    if !(spec.margin >= 0.0 && spec.margin < 1.0) || !(spec.noise >= 0.0) {
        return bad("margin", "need 0 ≤ margin < 1 and noise ≥ 0");
    }
    let mut rng = seeded(derive_seed(&[seed, 0]));
    let planted = {
        let mut idx = rand::seq::index::sample(&mut rng, spec.n_features, spec.n_planted).into_vec();
        idx.sort_unstable();
        idx
    };
    let k = spec.n_planted;
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5) / k as f64).collect();
    let levels: Vec<f64> = (0..spec.n_features).map(|_| rng.random_range(1.0..2.0)).collect();
    let low = (1.0 - spec.margin) / 2.0;

    let split = |rows: usize, part: u64| -> Result<LabeledDataset> {
        let mut rng = seeded(derive_seed(&[seed, part]));
        let mut raw = Matrix::zeros(rows, spec.n_features);
        let mut labels = Vec::with_capacity(rows);
        for i in 0..rows {
            let label = (i % 2) as u8;
            let t = if label == 0 {
                rng.random_range(0.0..=low)
            } else {
                rng.random_range(1.0 - low..=1.0)
            };
            let row = raw.row_mut(i);
            row.copy_from_slice(&levels);
            let mut partial = 0.0;
            for (&j, w) in planted.iter().zip(&weights).take(k - 1) {
                let z = standard_normal(&mut rng);
                row[j] = z;
                partial += w * z;
            }
            row[planted[k - 1]] = (t - partial) / weights[k - 1];
            for v in row.iter_mut() {
                *v += spec.noise * standard_normal(&mut rng);
            }
            labels.push(label);
        }
        LabeledDataset::new(raw, labels)
    };
    let train = split(spec.n_train, 1)?;
    let test = split(spec.n_test, 2)?;
    Ok(PlantedData { train, test, planted })
}
