//! Logistic null model, per-feature score statistics and set-level spectra.
//!
//! The null model is fitted on the confounders only. Every Globaltest
//! quantity is then a function of the residualized, variance-weighted
//! feature matrix `W = Σ^{1/2} (I - H) X`:
//!
//! - `g_i = (X_iᵀ (I - H) y)²`, additive over sets;
//! - `w_i = ‖W_i‖²`, the weight of feature `i`;
//! - the null spectrum of a set `R` is the nonzero spectrum of `W_Rᵀ W_R`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const IRLS_TOL: f64 = 1e-8;
const IRLS_MAX_ITER: usize = 50;
const MU_CLAMP: f64 = 1e-6;
const RANK_TOL: f64 = 1e-10;
const INACTIVE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

/// Binary response, confounders and features for `n` samples.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: DVector<f64>,
    z: DMatrix<f64>,
    x: DMatrix<f64>,
    feature_names: Vec<String>,
    sample_ids: Vec<String>,
}

impl Dataset {
    /// `z` must already contain the intercept column.
    pub fn new(
        y: Vec<f64>,
        z: DMatrix<f64>,
        x: DMatrix<f64>,
        feature_names: Vec<String>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
        }
        if z.nrows() != n || x.nrows() != n {
            return Err(Error::InvalidInput(format!(
                "row mismatch: y has {n}, Z has {}, X has {}",
                z.nrows(),
                x.nrows()
            )));
        }
        if z.ncols() == 0 {
            return Err(Error::InvalidInput("confounder matrix has no columns".into()));
        }
        if z.ncols() >= n {
            return Err(Error::InvalidInput(format!(
                "need fewer confounders ({}) than samples ({n})",
                z.ncols()
            )));
        }
        if x.ncols() == 0 {
            return Err(Error::InvalidInput("no feature columns".into()));
        }
        if feature_names.len() != x.ncols() {
            return Err(Error::InvalidInput("feature name count does not match X".into()));
        }
        if sample_ids.len() != n {
            return Err(Error::InvalidInput("sample id count does not match y".into()));
        }
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidInput("response must be coded 0/1".into()));
        }
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        if ones == 0 || ones == n {
            return Err(Error::InvalidInput(
                "response must contain both classes".into(),
            ));
        }
        if z.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in Z or X".into()));
        }
        Ok(Self {
            y: DVector::from_vec(y),
            z,
            x,
            feature_names,
            sample_ids,
        })
    }

    /// Intercept-only confounders and generic names.
    pub fn with_intercept(y: Vec<f64>, x: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        let m = x.ncols();
        Self::new(
            y,
            DMatrix::from_element(n, 1, 1.0),
            x,
            (1..=m).map(|j| format!("x{j}")).collect(),
            (1..=n).map(|i| i.to_string()).collect(),
        )
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_confounders(&self) -> usize {
        self.z.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }
}

/// Logistic fit of `y` on the confounders.
#[derive(Debug, Clone)]
pub struct NullModel {
    pub coefficients: DVector<f64>,
    pub mu_hat: DVector<f64>,
    /// `μ̂ (1 - μ̂)` after clamping.
    pub sigma_diag: DVector<f64>,
    /// Orthonormal basis of col(Z); `H v = Q Qᵀ v`.
    pub basis: DMatrix<f64>,
    /// `(I - H) y`.
    pub resid: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of fitted means that hit the clamp (quasi-separation).
    pub clamped: usize,
}

impl NullModel {
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    pub fn residualize(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.project(v)
    }

    pub fn residualize_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m - &self.basis * (self.basis.transpose() * m)
    }
}

fn orthonormal_basis(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = z.ncols();
    let qr = z.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..p).map(|j| r[(j, j)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let rank = diag.iter().filter(|&&d| d > RANK_TOL * max.max(1e-300)).count();
    if rank < p || max == 0.0 {
        return Err(Error::RankDeficientZ { rank, cols: p });
    }
    Ok(qr.q())
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Maximum-likelihood logistic regression of `y` on `Z` by IRLS.
///
/// Quasi-separation is not fatal: the fit stops after the iteration cap,
/// means are clamped to `[1e-6, 1 - 1e-6]` and a warning is logged.
pub fn fit_null(dataset: &Dataset) -> Result<NullModel> {
    let z = dataset.z();
    let y = dataset.y();
    let (n, p) = (z.nrows(), z.ncols());
    let basis = orthonormal_basis(z)?;

    let mut gamma = DVector::zeros(p);
    let mut mu = y.map(|v| (v + 0.5) / 2.0);
    let mut eta = mu.map(|m: f64| (m / (1.0 - m)).ln());
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=IRLS_MAX_ITER {
        iterations = it;
        let mut wz = DMatrix::zeros(n, p);
        let mut wrhs = DVector::zeros(n);
        for i in 0..n {
            let var = (mu[i] * (1.0 - mu[i])).max(1e-12);
            let sw = var.sqrt();
            let working = eta[i] + (y[i] - mu[i]) / var;
            for j in 0..p {
                wz[(i, j)] = sw * z[(i, j)];
            }
            wrhs[i] = sw * working;
        }
        let qr = wz.qr();
        let qtb = qr.q().transpose() * wrhs;
        let next = qr
            .r()
            .solve_upper_triangular(&qtb)
            .ok_or_else(|| Error::NumericalBreakdown("singular weighted design in IRLS".into()))?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown("non-finite IRLS update".into()));
        }
        let change = (&next - &gamma).amax();
        gamma = next;
        eta = z * &gamma;
        mu = eta.map(logistic);
        if change < IRLS_TOL {
            converged = true;
            break;
        }
    }

    let clamped = mu
        .iter()
        .filter(|&&m| !(MU_CLAMP..=1.0 - MU_CLAMP).contains(&m))
        .count();
    if !converged || clamped > 0 {
        log::warn!(
            "null model: IRLS {} after {iterations} iterations, {clamped} fitted means clamped (possible separation)",
            if converged { "converged" } else { "did not converge" }
        );
    }
    let mu_hat = mu.map(|m| m.clamp(MU_CLAMP, 1.0 - MU_CLAMP));
    let sigma_diag = mu_hat.map(|m| m * (1.0 - m));
    let resid = y - &basis * (basis.transpose() * y);

    Ok(NullModel {
        coefficients: gamma,
        mu_hat,
        sigma_diag,
        basis,
        resid,
        iterations,
        converged,
        clamped,
    })
}

/// Per-feature statistics `g`, weights `w` and ratios `q = g / w`.
#[derive(Debug, Clone)]
pub struct FeatureStats {
    pub g: Vec<f64>,
    pub w: Vec<f64>,
    /// NaN for inactive features.
    pub q: Vec<f64>,
    pub active: Vec<bool>,
}

impl FeatureStats {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn ratio(&self, i: usize) -> Option<f64> {
        self.active[i].then(|| self.q[i])
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.active[i]).collect()
    }

    /// `g_R`, summed.
    pub fn stat(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.g[i]).sum()
    }

    /// `ℓ_R`, summed.
    pub fn level(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.w[i]).sum()
    }
}

/// `W = Σ^{1/2} (I - H) X`.
fn weighted_residuals(dataset: &Dataset, null: &NullModel) -> DMatrix<f64> {
    let mut rx = null.residualize_matrix(dataset.x());
    for (i, mut row) in rx.row_iter_mut().enumerate() {
        row *= null.sigma_diag[i].sqrt();
    }
    rx
}

fn stats_from(dataset: &Dataset, null: &NullModel, weighted: &DMatrix<f64>) -> FeatureStats {
    let m = dataset.n_features();
    let score = dataset.x().transpose() * &null.resid;
    let mut g: Vec<f64> = score.iter().map(|s| s * s).collect();
    let mut w: Vec<f64> = (0..m).map(|j| weighted.column(j).norm_squared()).collect();
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    let active: Vec<bool> = w.iter().map(|&wi| wi > INACTIVE_TOL * wmax && wi > 0.0).collect();
    let mut q = vec![f64::NAN; m];
    for j in 0..m {
        if active[j] {
            q[j] = g[j] / w[j];
        } else {
            g[j] = 0.0;
            w[j] = 0.0;
        }
    }
    FeatureStats { g, w, q, active }
}

pub fn feature_stats(dataset: &Dataset, null: &NullModel) -> FeatureStats {
    stats_from(dataset, null, &weighted_residuals(dataset, null))
}

/// Descending nonzero eigenvalues of a set's null quadratic form; entries
/// past `lambdas.len()` up to `ambient_n` are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lambdas: Vec<f64>,
    pub ambient_n: usize,
    pub level: f64,
}

impl Spectrum {
    pub fn new(mut lambdas: Vec<f64>, ambient_n: usize) -> Self {
        lambdas.retain(|&l| l > 0.0);
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let level = lambdas.iter().sum();
        Self {
            lambdas,
            ambient_n,
            level,
        }
    }

    /// i-th largest eigenvalue (0-based), zero past the stored nonzeros.
    pub fn get(&self, i: usize) -> f64 {
        self.lambdas.get(i).copied().unwrap_or(0.0)
    }

    pub fn nonzeros(&self) -> usize {
        self.lambdas.len()
    }

    pub fn padded(&self, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.get(i)).collect()
    }
}

fn clean_eigenvalues(values: impl IntoIterator<Item = f64>) -> Result<Vec<f64>> {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().cloned().fold(0.0, f64::max);
    let tol = EIGEN_TOL * max;
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        if v < -tol {
            return Err(Error::NumericalBreakdown(format!(
                "Gram matrix has eigenvalue {v:e} below -{tol:e}"
            )));
        }
        if v > tol {
            out.push(v);
        }
    }
    Ok(out)
}

/// Anything that can produce the null spectrum of a feature set.
pub trait SpectrumProvider {
    fn spectrum(&self, set: &[usize]) -> Result<Spectrum>;
}

/// Fitted null model plus everything needed for set-level Globaltests.
#[derive(Debug, Clone)]
pub struct Model {
    null: NullModel,
    stats: FeatureStats,
    weighted: DMatrix<f64>,
    gram: DMatrix<f64>,
    n: usize,
}

impl Model {
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        let null = fit_null(dataset)?;
        Ok(Self::from_null(dataset, null))
    }

    pub fn from_null(dataset: &Dataset, null: NullModel) -> Self {
        let weighted = weighted_residuals(dataset, &null);
        let stats = stats_from(dataset, &null, &weighted);
        let gram = weighted.transpose() * &weighted;
        Self {
            null,
            stats,
            weighted,
            gram,
            n: dataset.n_samples(),
        }
    }

    pub fn null(&self) -> &NullModel {
        &self.null
    }

    pub fn stats(&self) -> &FeatureStats {
        &self.stats
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// `X_Rᵀ (I-H) Σ (I-H) X_R`.
    pub fn gram(&self, set: &[usize]) -> DMatrix<f64> {
        let r = set.len();
        DMatrix::from_fn(r, r, |a, b| self.gram[(set[a], set[b])])
    }

    /// `W_R` (n × r).
    pub fn weighted_columns(&self, set: &[usize]) -> DMatrix<f64> {
        self.weighted.select_columns(set)
    }
}

impl SpectrumProvider for Model {
    fn spectrum(&self, set: &[usize]) -> Result<Spectrum> {
        spectrum(self, set)
    }
}

/// Nonzero spectrum of `Σ^{1/2}(I-H) X_R X_Rᵀ (I-H) Σ^{1/2}`, computed on the
/// r × r Gram form when `r <= n` and on the n × n outer form otherwise.
pub fn spectrum(model: &Model, set: &[usize]) -> Result<Spectrum> {
    if set.is_empty() {
        return Ok(Spectrum::new(Vec::new(), model.n));
    }
    if let Some(&bad) = set.iter().find(|&&i| i >= model.stats.len()) {
        return Err(Error::InvalidInput(format!("feature index {bad} out of range")));
    }
    if set.len() == 1 {
        return Ok(Spectrum::new(vec![model.stats.w[set[0]]], model.n));
    }
    let form = if set.len() <= model.n {
        model.gram(set)
    } else {
        let wr = model.weighted_columns(set);
        &wr * wr.transpose()
    };
    let eig = SymmetricEigen::new(form).eigenvalues;
    Ok(Spectrum::new(clean_eigenvalues(eig.iter().copied())?, model.n))
}
