//! Seeded logistic data and family-wise error simulation.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use nalgebra::DMatrix;

use crate::bnb::{analyze_collection, BatchConfig, NamedSet, RowOutcome};
use crate::error::{Error, Result};
use crate::linmodel::{Dataset, Model};
use crate::Decision;

const PATHWAY_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub n_pathways: usize,
    /// Smallest and largest pathway size.
    pub pathway_size: (usize, usize),
    /// Features `0..signal` carry the effect.
    pub signal: usize,
    pub effect: f64,
    pub include_singletons: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 50,
            m: 20,
            n_pathways: 30,
            pathway_size: (2, 6),
            signal: 3,
            effect: 0.0,
            include_singletons: false,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.pathway_size;
        if self.n < 4 || self.m == 0 {
            return Err(Error::InvalidInput("simulation needs n >= 4 and m >= 1".into()));
        }
        if lo == 0 || lo > hi || hi > self.m {
            return Err(Error::InvalidInput(format!("pathway sizes {lo}..={hi} do not fit m = {}", self.m)));
        }
        if self.signal > self.m {
            return Err(Error::InvalidInput("more signal features than features".into()));
        }
        if !self.effect.is_finite() {
            return Err(Error::InvalidInput("effect must be finite".into()));
        }
        Ok(())
    }

    pub fn is_signal(&self, feature: usize) -> bool {
        self.effect != 0.0 && feature < self.signal
    }
}

/// Random pathways over `m` features, fixed for a seed.
pub fn generate_pathways(config: &SimConfig, seed: u64) -> Result<Vec<NamedSet>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PATHWAY_STREAM);
    let (lo, hi) = config.pathway_size;
    let mut sets: Vec<NamedSet> = (0..config.n_pathways)
        .map(|k| {
            let size = rng.random_range(lo..=hi);
            let members = crate::sets::normalize(sample(&mut rng, config.m, size).into_vec());
            NamedSet {
                name: format!("P{}", k + 1),
                size,
                members,
            }
        })
        .collect();
    if config.include_singletons {
        sets.extend((0..config.m).map(|i| NamedSet {
            name: format!("x{}", i + 1),
            size: 1,
            members: vec![i],
        }));
    }
    Ok(sets)
}

/// One replicate: standard normal features and
/// `logit P(y = 1) = effect · Σ_{i < signal} x_i`. Responses are redrawn
/// until both classes occur.
pub fn generate_dataset(config: &SimConfig, seed: u64, replicate: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    let (n, m) = (config.n, config.m);
    let x = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let prob: Vec<f64> = (0..n)
        .map(|i| {
            let eta = config.effect * (0..config.signal).map(|j| x[(i, j)]).sum::<f64>();
            1.0 / (1.0 + (-eta).exp())
        })
        .collect();
    for _ in 0..1000 {
        let y: Vec<f64> = prob.iter().map(|&p| (rng.random::<f64>() < p) as u8 as f64).collect();
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        if ones > 0 && ones < n {
            return Dataset::with_intercept(y, x);
        }
    }
    Err(Error::InvalidInput("could not draw a response with both classes".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ReplicateOutcome {
    pub true_rejections: usize,
    pub false_rejections: usize,
    pub unsure: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub replicates: usize,
    pub sets_per_replicate: usize,
    /// Replicates with at least one false rejection.
    pub fwer_count: usize,
    pub fwer: f64,
    pub mean_true_rejections: f64,
    pub mean_false_rejections: f64,
    pub mean_unsure: f64,
    pub errors: usize,
}

/// A rejected set is false when it contains no signal feature.
pub fn run_replicate(config: &SimConfig, sets: &[NamedSet], batch: &BatchConfig, seed: u64, replicate: u64) -> Result<ReplicateOutcome> {
    let data = generate_dataset(config, seed, replicate)?;
    let model = Model::fit(&data)?;
    let rows = analyze_collection(model.stats(), &model, sets, &BatchConfig { workers: None, ..*batch })?;
    let mut out = ReplicateOutcome::default();
    for (row, set) in rows.iter().zip(sets) {
        match &row.outcome {
            RowOutcome::Done(r) => match r.result.decision {
                Decision::Reject if set.members.iter().any(|&i| config.is_signal(i)) => out.true_rejections += 1,
                Decision::Reject => out.false_rejections += 1,
                Decision::Unsure => out.unsure += 1,
                Decision::NotReject => {}
            },
            RowOutcome::Failed(_) => out.errors += 1,
            RowOutcome::Skipped(_) => {}
        }
    }
    Ok(out)
}

pub fn simulate(config: &SimConfig, batch: &BatchConfig, seed: u64, replicates: usize) -> Result<SimSummary> {
    crate::driver::check_alpha(batch.alpha)?;
    if replicates == 0 {
        return Err(Error::InvalidInput("need at least one replicate".into()));
    }
    let sets = generate_pathways(config, seed)?;
    let run = || {
        (0..replicates as u64)
            .into_par_iter()
            .map(|r| run_replicate(config, &sets, batch, seed, r))
            .collect::<Result<Vec<_>>>()
    };
    let outcomes = match batch.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start {k} workers: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let r = replicates as f64;
    let fwer_count = outcomes.iter().filter(|o| o.false_rejections > 0).count();
    Ok(SimSummary {
        replicates,
        sets_per_replicate: sets.len(),
        fwer_count,
        fwer: fwer_count as f64 / r,
        mean_true_rejections: outcomes.iter().map(|o| o.true_rejections).sum::<usize>() as f64 / r,
        mean_false_rejections: outcomes.iter().map(|o| o.false_rejections).sum::<usize>() as f64 / r,
        mean_unsure: outcomes.iter().map(|o| o.unsure).sum::<usize>() as f64 / r,
        errors: outcomes.iter().map(|o| o.errors).sum(),
    })
}
