mod common;

use common::{partial_sums_majorize, random_model, supersets, toy_model};
use ctgt::driver::{full_closed_test, globaltest, LocalTester};
use ctgt::linmodel::{Model, SpectrumProvider};
use ctgt::shortcut::{cmax, crossing_test, gmin_curve, majorizing_vector, single_step, Crossing};
use ctgt::wchi2::{alpha0_diagnostic, WeightedChiSq};
use ctgt::Decision;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gmin_bounds_every_superset() {
    for seed in 0..5 {
        let model = random_model(seed, 30, 8);
        let stats = model.stats();
        let all: Vec<usize> = (0..8).collect();
        for base in [vec![0], vec![2, 5], vec![7]] {
            let curve = gmin_curve(stats, &base, &all).unwrap();
            for s in supersets(&base, &all) {
                let bound = curve.evaluate(stats.level(&s));
                assert!(stats.stat(&s) >= bound - 1e-10 * bound.max(1.0));
            }
            assert_eq!(curve.evaluate(curve.base_level()), stats.stat(&base));
            let first = curve.order()[0];
            let l1 = stats.level(&base) + stats.w[first];
            assert!((curve.evaluate(l1) - stats.stat(&base) - stats.g[first]).abs() < 1e-10 * l1);
        }
    }
}

#[test]
fn inverse_round_trips() {
    let model = random_model(3, 30, 8);
    let all: Vec<usize> = (0..8).collect();
    let curve = gmin_curve(model.stats(), &[1], &all).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let c = rng.random_range(curve.base_stat()..curve.top_stat());
        let l = curve.inverse(c).unwrap();
        assert!((curve.evaluate(l) - c).abs() <= 1e-12 * curve.top_stat());
    }
    assert_eq!(curve.inverse(curve.top_stat()).unwrap(), curve.top_level());
}

fn exhaustive_bound_check(model: &Model, base: &[usize], all: &[usize]) -> (usize, usize) {
    let lr = model.spectrum(base).unwrap();
    let lf = model.spectrum(all).unwrap();
    let mut checked = 0;
    let mut violations = 0;
    for s in supersets(base, all) {
        let ls = model.spectrum(&s).unwrap();
        let major = majorizing_vector(&lr, &lf, ls.level).unwrap();
        assert!(partial_sums_majorize(&major.lambdas, &ls.lambdas, 1e-8), "S = {s:?}");
        let cs = WeightedChiSq::new(&ls.lambdas).unwrap().quantile(0.95).unwrap();
        let cm = cmax(&lr, &lf, ls.level, 0.05).unwrap();
        if cm < cs * (1.0 - 1e-9) {
            violations += 1;
            let a0 = alpha0_diagnostic(&ls.lambdas, &major.lambdas).unwrap();
            assert!(a0 <= 0.05, "critical value bound fails with alpha0 {a0}");
        }
        checked += 1;
    }
    (checked, violations)
}

#[test]
fn majorizing_vector_and_cmax_bound_supersets() {
    for seed in 0..4 {
        let model = random_model(seed, 20, 6);
        let all: Vec<usize> = (0..6).collect();
        let (checked, _) = exhaustive_bound_check(&model, &[seed as usize % 6], &all);
        assert_eq!(checked, 32);
    }
}

#[test]
fn cmax_hits_endpoint_critical_values() {
    let model = random_model(1, 25, 6);
    let all: Vec<usize> = (0..6).collect();
    let lr = model.spectrum(&[2]).unwrap();
    let lf = model.spectrum(&all).unwrap();
    let cf = WeightedChiSq::new(&lf.lambdas).unwrap().quantile(0.95).unwrap();
    let cr = WeightedChiSq::new(&lr.lambdas).unwrap().quantile(0.95).unwrap();
    assert_eq!(cmax(&lr, &lf, lf.level, 0.05).unwrap(), cf);
    assert_eq!(cmax(&lr, &lf, lr.level, 0.05).unwrap(), cr);
}

/// Minimum of `g_min − c_max` over a uniform grid plus all breakpoints.
fn dense_gap(model: &Model, base: &[usize], all: &[usize], points: usize) -> f64 {
    let curve = gmin_curve(model.stats(), base, all).unwrap();
    let lr = model.spectrum(base).unwrap();
    let lf = model.spectrum(all).unwrap();
    let (lo, hi) = (curve.base_level(), curve.top_level());
    let grid = (0..points)
        .map(|j| lo + (hi - lo) * j as f64 / (points - 1) as f64)
        .chain(curve.breakpoints().map(|b| b.0));
    grid.map(|l| curve.evaluate(l) - cmax(&lr, &lf, l, 0.05).unwrap())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn crossing_test_agrees_with_dense_grid() {
    let (_, toy) = toy_model();
    let mut cases: Vec<(Model, Vec<usize>)> = (0..5).map(|i| (toy.clone(), vec![i])).collect();
    for seed in 0..6 {
        cases.push((random_model(seed, 40, 6), vec![seed as usize % 6]));
    }
    let mut compared = 0;
    for (model, base) in &cases {
        let all: Vec<usize> = (0..model.stats().len()).collect();
        let mut t = LocalTester::new(model.stats(), model, 0.05).unwrap();
        if !t.test(base).unwrap().reject || !t.test(&all).unwrap().reject {
            continue;
        }
        let curve = gmin_curve(model.stats(), base, &all).unwrap();
        let lr = model.spectrum(base).unwrap();
        let lf = model.spectrum(&all).unwrap();
        let (res, _) = crossing_test(&curve, |l| cmax(&lr, &lf, l, 0.05), 1e-4).unwrap();
        let gap = dense_gap(model, base, &all, 4001);
        let slack = 1e-6 * curve.top_stat();
        match res {
            Crossing::Above => assert!(gap >= -slack, "above but dense gap {gap}"),
            Crossing::Cross(_) => assert!(gap <= slack, "cross but dense gap {gap}"),
        }
        compared += 1;
    }
    assert!(compared >= 3);
}

#[test]
fn single_step_is_sound_against_oracle() {
    let mut decided = [0usize; 3];
    for seed in 0..20 {
        let m = 6 + (seed as usize % 5);
        let model = random_model(seed, 25, m);
        let all: Vec<usize> = (0..m).collect();
        let mut t = LocalTester::new(model.stats(), &model, 0.05).unwrap();
        for i in 0..m {
            let ss = single_step(&mut t, &[i], &all, 1e-4).unwrap();
            let oracle = full_closed_test(&mut t, &[i], &all, 20).unwrap();
            match ss.decision {
                Decision::Reject => assert!(oracle.rejects(), "seed {seed} feature {i}"),
                Decision::NotReject => {
                    assert!(!oracle.rejects());
                    let w = ss.witness.unwrap();
                    assert!(w.contains(&i));
                    assert!(!globaltest(model.stats(), &model, &w, 0.05).unwrap().reject);
                }
                Decision::Unsure => assert!(ss.witness.is_none()),
            }
            decided[ss.decision as usize] += 1;
        }
    }
    assert!(decided.iter().all(|&c| c > 0), "{decided:?}");
}

#[test]
fn single_step_is_deterministic() {
    let model = random_model(2, 30, 8);
    let all: Vec<usize> = (0..8).collect();
    for i in 0..8 {
        let mut a = LocalTester::new(model.stats(), &model, 0.05).unwrap();
        let mut b = LocalTester::new(model.stats(), &model, 0.05).unwrap();
        assert_eq!(single_step(&mut a, &[i], &all, 1e-4).unwrap(), single_step(&mut b, &[i], &all, 1e-4).unwrap());
    }
}
