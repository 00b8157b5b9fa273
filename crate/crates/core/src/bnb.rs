//! Iterative shortcut: branch and bound over subspaces with the single-step
//! shortcut as the bounding rule.

use rayon::prelude::*;

use crate::driver::{LocalTester, DEFAULT_ORACLE_CAP};
use crate::error::{Error, Result};
use crate::linmodel::{FeatureStats, SpectrumProvider};
use crate::sets::{self, IndexSet};
use crate::shortcut::{single_step, SingleStepResult};
use crate::Decision;

pub const DEFAULT_MAX_ITERATIONS: usize = 20_000;

/// The hypotheses `{H_S : bottom ⊆ S ⊆ top}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    pub top: IndexSet,
    pub bottom: IndexSet,
}

impl Subspace {
    pub fn new(bottom: IndexSet, top: IndexSet) -> Self {
        Self { top, bottom }
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        sets::is_subset(&self.bottom, set) && sets::is_subset(set, &self.top)
    }

    /// Number of hypotheses, saturating at `u64::MAX`.
    pub fn size(&self) -> u64 {
        let free = self.top.len() - self.bottom.len();
        1u64.checked_shl(free as u32).unwrap_or(u64::MAX)
    }

    /// `(S¹, S²) = (S(F′∖{u}, R′), S(F′, R′∪{u}))`.
    pub fn split(&self, u: usize) -> (Subspace, Subspace) {
        (
            Subspace::new(self.bottom.clone(), sets::without(&self.top, u)),
            Subspace::new(sets::with(&self.bottom, u), self.top.clone()),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeResult {
    pub decision: Decision,
    pub iterations_used: usize,
    pub witness: Option<IndexSet>,
    pub frontier_size: usize,
}

/// Resumable branch-and-bound state for one root query.
#[derive(Debug, Clone)]
pub struct BranchAndBound {
    root: Subspace,
    worklist: Vec<Subspace>,
    resolved: Vec<Subspace>,
    epsilon: f64,
    iterations: usize,
    witness: Option<IndexSet>,
}

impl BranchAndBound {
    pub fn new(base: &[usize], top: &[usize], epsilon: f64) -> Result<Self> {
        if base.is_empty() || !sets::is_subset(base, top) {
            return Err(Error::InvalidInput("the shortcut needs a nonempty R within F".into()));
        }
        let root = Subspace::new(base.to_vec(), top.to_vec());
        Ok(Self {
            worklist: vec![root.clone()],
            root,
            resolved: Vec::new(),
            epsilon,
            iterations: 0,
            witness: None,
        })
    }

    pub fn root(&self) -> &Subspace {
        &self.root
    }

    /// Unresolved subspaces, next to be popped last.
    pub fn frontier(&self) -> &[Subspace] {
        &self.worklist
    }

    /// Subspaces settled by a Reject.
    pub fn resolved(&self) -> &[Subspace] {
        &self.resolved
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn is_finished(&self) -> bool {
        self.witness.is_some() || self.worklist.is_empty()
    }

    /// Runs one single-step shortcut on the next subspace. Returns that
    /// subspace's result, or `None` when the search is already finished.
    pub fn step<P: SpectrumProvider + ?Sized>(
        &mut self,
        tester: &mut LocalTester<'_, P>,
    ) -> Result<Option<SingleStepResult>> {
        if self.is_finished() {
            return Ok(None);
        }
        let sub = self.worklist.pop().expect("worklist is nonempty");
        let res = single_step(tester, &sub.bottom, &sub.top, self.epsilon)?;
        self.iterations += 1;
        match res.decision {
            Decision::Reject => self.resolved.push(sub),
            Decision::NotReject => {
                self.witness = res.witness.clone();
                self.worklist.push(sub);
            }
            Decision::Unsure => {
                let stats = tester.stats();
                let u = sets::difference(&sub.top, &sub.bottom)
                    .into_iter()
                    .reduce(|a, b| if stats.g[b] > stats.g[a] { b } else { a })
                    .expect("an unsure subspace has a free feature");
                let (s1, s2) = sub.split(u);
                self.worklist.push(s1);
                self.worklist.push(s2);
            }
        }
        Ok(Some(res))
    }

    pub fn result(&self) -> IterativeResult {
        let decision = if self.witness.is_some() {
            Decision::NotReject
        } else if self.worklist.is_empty() {
            Decision::Reject
        } else {
            Decision::Unsure
        };
        IterativeResult {
            decision,
            iterations_used: self.iterations,
            witness: self.witness.clone(),
            frontier_size: if self.witness.is_some() { 0 } else { self.worklist.len() },
        }
    }
}

/// Closed testing of `H_R` within `F` with at most `max_iterations`
/// single-step runs. `usize::MAX` means no budget.
pub fn iterative_shortcut<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    epsilon: f64,
    max_iterations: usize,
) -> Result<IterativeResult> {
    if max_iterations == 0 {
        return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
    }
    let mut bnb = BranchAndBound::new(base, top, epsilon)?;
    while !bnb.is_finished() && bnb.iterations() < max_iterations {
        bnb.step(tester)?;
    }
    Ok(bnb.result())
}

/// Settings shared by every set of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub trunc_tol: f64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            epsilon: crate::shortcut::DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            trunc_tol: crate::wchi2::DEFAULT_TRUNC_TOL,
            workers: None,
        }
    }
}

/// A named set with members already resolved to feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSet {
    pub name: String,
    /// Members as listed, before resolution.
    pub size: usize,
    pub members: IndexSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetReport {
    pub level: f64,
    pub statistic: f64,
    pub critical_value: f64,
    pub result: IterativeResult,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Done(SetReport),
    Skipped(String),
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionRow {
    pub name: String,
    pub size: usize,
    /// Active members actually tested.
    pub resolved: IndexSet,
    pub outcome: RowOutcome,
}

impl CollectionRow {
    pub fn decision(&self) -> Option<Decision> {
        match &self.outcome {
            RowOutcome::Done(r) => Some(r.result.decision),
            _ => None,
        }
    }
}

/// Runs the iterative shortcut for every set against all active features.
/// Rows come back in input order; errors stay in their row.
pub fn analyze_collection<P: SpectrumProvider + Sync + ?Sized>(
    stats: &FeatureStats,
    provider: &P,
    collection: &[NamedSet],
    config: &BatchConfig,
) -> Result<Vec<CollectionRow>> {
    crate::driver::check_alpha(config.alpha)?;
    if config.max_iterations == 0 {
        return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
    }
    let universe = stats.active_indices();
    let run = || {
        collection
            .par_iter()
            .map_init(
                || {
                    LocalTester::new(stats, provider, config.alpha)
                        .expect("alpha checked")
                        .with_trunc_tol(config.trunc_tol)
                },
                |tester, set| analyze_one(tester, &universe, set, config),
            )
            .collect::<Vec<_>>()
    };
    match config.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

fn analyze_one<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    universe: &[usize],
    set: &NamedSet,
    config: &BatchConfig,
) -> CollectionRow {
    let stats = tester.stats();
    let resolved: IndexSet = sets::normalize(
        set.members
            .iter()
            .copied()
            .filter(|&i| i < stats.len() && stats.active[i])
            .collect(),
    );
    let outcome = if resolved.is_empty() {
        RowOutcome::Skipped(if set.members.is_empty() {
            "no member matches a dataset feature".into()
        } else {
            "all matched members are constant after adjustment".into()
        })
    } else {
        let mut report = || -> Result<SetReport> {
            let result = iterative_shortcut(tester, &resolved, universe, config.epsilon, config.max_iterations)?;
            Ok(SetReport {
                level: stats.level(&resolved),
                statistic: stats.stat(&resolved),
                critical_value: tester.critical_value(&resolved)?,
                result,
            })
        };
        match report() {
            Ok(r) => RowOutcome::Done(r),
            Err(e) => RowOutcome::Failed(e),
        }
    };
    CollectionRow {
        name: set.name.clone(),
        size: set.size,
        resolved,
        outcome,
    }
}

/// Oracle counterpart of [`iterative_shortcut`] for small complements.
pub fn oracle_agrees<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    epsilon: f64,
) -> Result<bool> {
    let oracle = crate::driver::full_closed_test(tester, base, top, DEFAULT_ORACLE_CAP)?;
    let shortcut = iterative_shortcut(tester, base, top, epsilon, usize::MAX)?;
    Ok(match shortcut.decision {
        Decision::Reject => oracle.rejects(),
        Decision::NotReject => !oracle.rejects(),
        Decision::Unsure => false,
    })
}
