//! Searches seeds for a five-feature instance whose singletons show every
//! shortcut outcome, and prints it as CSV.
//!
//! cargo run --release --example find_toy > crates/core/tests/fixtures/toy_n100_m5.csv

use ctgt::bnb::iterative_shortcut;
use ctgt::driver::LocalTester;
use ctgt::linmodel::{Dataset, Model};
use ctgt::shortcut::{single_step, Stage};
use ctgt::Decision;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const N: usize = 100;
const M: usize = 5;

fn instance(seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..M).map(|_| rng.random_range(-0.8..0.8)).collect();
    let x = DMatrix::from_fn(N, M, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y = (0..N)
        .map(|i| {
            let eta: f64 = (0..M).map(|j| beta[j] * x[(i, j)]).sum();
            (rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())) as u8 as f64
        })
        .collect();
    (y, x)
}

fn matches(model: &Model) -> bool {
    let all: Vec<usize> = (0..M).collect();
    let mut t = LocalTester::new(model.stats(), model, 0.05).unwrap();
    let (mut curves, mut witness, mut resolved) = (false, false, false);
    for i in 0..M {
        let Ok(ss) = single_step(&mut t, &[i], &all, 1e-4) else { return false };
        match (ss.decision, ss.stage) {
            (Decision::Reject, Stage::Curves) => curves = true,
            (Decision::NotReject, Stage::Staircase) => witness = true,
            (Decision::Unsure, _) => {
                let it = iterative_shortcut(&mut t, &[i], &all, 1e-4, 4).unwrap();
                resolved |= it.decision == Decision::Reject;
            }
            _ => {}
        }
    }
    curves && witness && resolved
}

fn main() {
    for seed in 0..200_000u64 {
        let (y, x) = instance(seed);
        let Ok(data) = Dataset::with_intercept(y.clone(), x.clone()) else { continue };
        let Ok(model) = Model::fit(&data) else { continue };
        if matches(&model) {
            eprintln!("seed {seed}");
            println!("y,x1,x2,x3,x4,x5");
            for i in 0..N {
                let row: Vec<String> = (0..M).map(|j| x[(i, j)].to_string()).collect();
                println!("{},{}", y[i], row.join(","));
            }
            return;
        }
    }
    eprintln!("no instance found");
    std::process::exit(1);
}
