#![allow(dead_code)]

use ctgt::io::{load_dataset, Normalization, RawTable};
use ctgt::linmodel::{Dataset, Model};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const TOY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy_n100_m5.csv");

/// Standard normal features; `logit P(y = 1) = Σ_j effects[j] x_j`.
pub fn logistic_data(seed: u64, n: usize, effects: &[f64], m: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    loop {
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let eta: f64 = effects.iter().enumerate().map(|(j, e)| e * x[(i, j)]).sum();
                (rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())) as u8 as f64
            })
            .collect();
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        if ones > 1 && ones + 1 < n {
            return Dataset::with_intercept(y, x).unwrap();
        }
    }
}

/// Random instance with mixed effect sizes on a few leading features.
pub fn random_model(seed: u64, n: usize, m: usize) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let strength = [0.0, 0.8, 1.5, 2.5][(seed % 4) as usize];
    let effects: Vec<f64> = (0..m.min(4)).map(|_| strength * rng.random_range(-1.0..1.0)).collect();
    Model::fit(&logistic_data(seed, n, &effects, m)).unwrap()
}

pub fn toy_model() -> (Dataset, Model) {
    let table = RawTable::read(TOY).unwrap();
    let ds = load_dataset(&table, "y", &[], Normalization::None).unwrap().dataset;
    let model = Model::fit(&ds).unwrap();
    (ds, model)
}

/// All `S` with `base ⊆ S ⊆ top`.
pub fn supersets(base: &[usize], top: &[usize]) -> Vec<Vec<usize>> {
    let free: Vec<usize> = top.iter().copied().filter(|i| !base.contains(i)).collect();
    (0u64..1 << free.len())
        .map(|mask| {
            let mut s = base.to_vec();
            s.extend(free.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i));
            s.sort_unstable();
            s
        })
        .collect()
}

/// `I − Z(ZᵀZ)⁻¹Zᵀ` formed explicitly.
pub fn residual_projector(ds: &Dataset) -> DMatrix<f64> {
    let z = ds.z();
    let h = z * (z.transpose() * z).try_inverse().unwrap() * z.transpose();
    DMatrix::identity(ds.n_samples(), ds.n_samples()) - h
}

/// Eigenvalues of the n×n form `Σ^{1/2}(I−H)X_S X_Sᵀ(I−H)Σ^{1/2}`, descending.
pub fn outer_eigenvalues(ds: &Dataset, model: &Model, set: &[usize]) -> Vec<f64> {
    let p = residual_projector(ds);
    let xs = ds.x().select_columns(set);
    let s_half = DMatrix::from_diagonal(&model.null().sigma_diag.map(f64::sqrt));
    let a = &s_half * &p * xs;
    let outer = &a * a.transpose();
    let mut ev: Vec<f64> = outer.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Partial-sum majorization with relative tolerance.
pub fn partial_sums_majorize(major: &[f64], minor: &[f64], tol: f64) -> bool {
    let mut a = major.to_vec();
    let mut b = minor.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let len = a.len().max(b.len());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    let scale: f64 = b.iter().sum::<f64>().max(1e-300);
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..len {
        sa += a[i];
        sb += b[i];
        if sa < sb - tol * scale {
            return false;
        }
    }
    (sa - sb).abs() <= tol * scale
}
