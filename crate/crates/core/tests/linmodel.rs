mod common;

use common::{outer_eigenvalues, residual_projector, supersets};
use ctgt::driver::globaltest;
use ctgt::linmodel::{fit_null, Dataset, Model, SpectrumProvider};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn with_confounder(seed: u64, n: usize, m: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = c
        .iter()
        .map(|&ci| (rng.random::<f64>() < 1.0 / (1.0 + (-(0.3 + 0.9 * ci)).exp())) as u8 as f64)
        .collect();
    let z = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { c[i] });
    let x = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    Dataset::new(
        y,
        z,
        x,
        (0..m).map(|j| format!("f{j}")).collect(),
        (0..n).map(|i| format!("s{i}")).collect(),
    )
    .unwrap()
}

/// Plain Newton-Raphson for a two-column logistic model.
fn newton_logistic(y: &[f64], c: &[f64]) -> Vec<f64> {
    let (mut b0, mut b1) = (0.0, 0.0);
    for _ in 0..100 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&yi, &ci) in y.iter().zip(c) {
            let p = 1.0 / (1.0 + (-(b0 + b1 * ci)).exp());
            let w = p * (1.0 - p);
            g0 += yi - p;
            g1 += (yi - p) * ci;
            h00 += w;
            h01 += w * ci;
            h11 += w * ci * ci;
        }
        let det = h00 * h11 - h01 * h01;
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        b0 += d0;
        b1 += d1;
        if d0.abs().max(d1.abs()) < 1e-14 {
            break;
        }
    }
    y.iter().zip(c).map(|(_, &ci)| 1.0 / (1.0 + (-(b0 + b1 * ci)).exp())).collect()
}

#[test]
fn irls_matches_independent_newton_fit() {
    let ds = with_confounder(17, 100, 3);
    let null = fit_null(&ds).unwrap();
    let c: Vec<f64> = ds.z().column(1).iter().copied().collect();
    let expected = newton_logistic(ds.y().as_slice(), &c);
    for (a, b) in null.mu_hat.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert!(null.converged);
}

#[test]
fn projector_is_idempotent_and_reconstructs_y() {
    let ds = with_confounder(3, 60, 2);
    let null = fit_null(&ds).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let v = DVector::from_fn(60, |_, _| rng.sample::<f64, _>(StandardNormal));
        let hv = null.project(&v);
        assert!((null.project(&hv) - &hv).amax() < 1e-10);
        let u = DVector::from_fn(60, |_, _| rng.sample::<f64, _>(StandardNormal));
        assert!((u.dot(&hv) - null.project(&u).dot(&v)).abs() < 1e-10);
    }
    let recon = null.project(ds.y()) + &null.resid;
    assert!((recon - ds.y()).amax() < 1e-10);
    assert!(null.sigma_diag.iter().all(|&s| s > 0.0 && s <= 0.25));
}

#[test]
fn statistic_matches_direct_quadratic_form() {
    let ds = with_confounder(5, 20, 5);
    let model = Model::fit(&ds).unwrap();
    let p = residual_projector(&ds);
    let ry = &p * ds.y();
    for set in [vec![1, 3], vec![0, 2, 4], vec![4]] {
        let xs = ds.x().select_columns(&set);
        let proj = xs.transpose() * &ry;
        let direct = proj.norm_squared();
        let additive = model.stats().stat(&set);
        assert!((direct - additive).abs() <= 1e-8 * direct.max(1.0));
    }
}

#[test]
fn spectrum_matches_outer_form_and_trace() {
    let ds = with_confounder(8, 20, 8);
    let model = Model::fit(&ds).unwrap();
    let set: Vec<usize> = vec![0, 2, 3, 5, 7];
    let sp = model.spectrum(&set).unwrap();
    let outer = outer_eigenvalues(&ds, &model, &set);
    assert!((sp.level - model.stats().level(&set)).abs() <= 1e-8 * sp.level);
    assert!(sp.nonzeros() <= set.len().min(20 - 2));
    for (i, l) in sp.lambdas.iter().enumerate() {
        assert!((l - outer[i]).abs() <= 1e-8 * sp.lambdas[0]);
    }
}

#[test]
fn nested_spectra_interlace() {
    let ds = with_confounder(21, 20, 8);
    let model = Model::fit(&ds).unwrap();
    let (r, f) = (vec![1, 4], (0..8).collect::<Vec<_>>());
    let lr = model.spectrum(&r).unwrap();
    let lf = model.spectrum(&f).unwrap();
    for s in supersets(&r, &f) {
        let ls = model.spectrum(&s).unwrap();
        for i in 0..8 {
            let tol = 1e-8 * lf.lambdas[0];
            assert!(lr.get(i) <= ls.get(i) + tol && ls.get(i) <= lf.get(i) + tol);
        }
    }
}

#[test]
fn permuting_features_permutes_statistics() {
    let ds = with_confounder(13, 30, 6);
    let perm = [3, 0, 5, 1, 4, 2];
    let x = DMatrix::from_fn(30, 6, |i, j| ds.x()[(i, perm[j])]);
    let names = perm.iter().map(|&j| ds.feature_names()[j].clone()).collect();
    let permuted = Dataset::new(ds.y().as_slice().to_vec(), ds.z().clone(), x, names, ds.sample_ids().to_vec()).unwrap();
    let a = Model::fit(&ds).unwrap();
    let b = Model::fit(&permuted).unwrap();
    for j in 0..6 {
        assert!((a.stats().g[perm[j]] - b.stats().g[j]).abs() < 1e-10);
        assert!((a.stats().w[perm[j]] - b.stats().w[j]).abs() < 1e-10);
    }
    let set_a = vec![0, 3, 5];
    let set_b = vec![0, 1, 2];
    assert!((a.stats().stat(&set_a) - b.stats().stat(&set_b)).abs() < 1e-10);
    let (sa, sb) = (a.spectrum(&set_a).unwrap(), b.spectrum(&set_b).unwrap());
    for (x, y) in sa.lambdas.iter().zip(&sb.lambdas) {
        assert!((x - y).abs() < 1e-9 * sa.lambdas[0]);
    }
}

#[test]
fn label_swap_leaves_decisions_unchanged() {
    for seed in 0..10 {
        let ds = common::logistic_data(seed, 40, &[0.9, -0.5], 6);
        let flipped: Vec<f64> = ds.y().iter().map(|v| 1.0 - v).collect();
        let swapped = Dataset::new(flipped, ds.z().clone(), ds.x().clone(), ds.feature_names().to_vec(), ds.sample_ids().to_vec()).unwrap();
        let a = Model::fit(&ds).unwrap();
        let b = Model::fit(&swapped).unwrap();
        for set in [vec![0], vec![0, 1], vec![2, 3, 4]] {
            let ga = globaltest(a.stats(), &a, &set, 0.05).unwrap();
            let gb = globaltest(b.stats(), &b, &set, 0.05).unwrap();
            assert_eq!(ga.reject, gb.reject);
            assert!((ga.p_value - gb.p_value).abs() < 1e-9);
        }
    }
}
