mod common;

use common::{logistic_data, random_model};
use ctgt::driver::{full_closed_test, globaltest, LocalTester};
use ctgt::linmodel::Model;

#[test]
fn type_one_error_under_null() {
    let mut rejections = 0;
    for seed in 0..1000 {
        let ds = logistic_data(10_000 + seed, 60, &[], 4);
        let model = Model::fit(&ds).unwrap();
        rejections += globaltest(model.stats(), &model, &[0, 1, 2], 0.05).unwrap().reject as usize;
    }
    let rate = rejections as f64 / 1000.0;
    assert!((0.03..=0.07).contains(&rate), "rate {rate}");
}

#[test]
fn oracle_rejection_needs_top_rejection() {
    for seed in 0..20 {
        let model = random_model(seed, 25, 7);
        let all: Vec<usize> = (0..7).collect();
        let mut t = LocalTester::new(model.stats(), &model, 0.05).unwrap();
        let top = globaltest(model.stats(), &model, &all, 0.05).unwrap();
        for i in 0..7 {
            let res = full_closed_test(&mut t, &[i], &all, 20).unwrap();
            if res.rejects() {
                assert!(top.reject);
                assert_eq!(res.n_tests, 64);
            } else {
                let w = res.first_failure.unwrap();
                assert!(!globaltest(model.stats(), &model, &w, 0.05).unwrap().reject);
            }
        }
    }
}
