//! Exact per-set Globaltests and the brute-force closed testing reference.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linmodel::{FeatureStats, Spectrum, SpectrumProvider};
use crate::sets::{self, IndexSet};
use crate::wchi2::{WeightedChiSq, DEFAULT_TRUNC_TOL};

pub const DEFAULT_ORACLE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalTest {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Exact Globaltest of one set. `reject` is `p <= α`, i.e. `g >= c` up to the
/// quantile tolerance.
pub fn globaltest<P: SpectrumProvider + ?Sized>(
    stats: &FeatureStats,
    provider: &P,
    set: &[usize],
    alpha: f64,
) -> Result<GlobalTest> {
    check_alpha(alpha)?;
    if set.is_empty() {
        return Err(Error::InvalidInput("cannot test the empty set".into()));
    }
    let spectrum = provider.spectrum(set)?;
    let dist = WeightedChiSq::new(&spectrum.lambdas)?;
    let statistic = stats.stat(set);
    let mut ev = dist.evaluator();
    let p_value = 1.0 - ev.cdf(statistic)?;
    let critical_value = ev.quantile(1.0 - alpha)?;
    Ok(GlobalTest {
        statistic,
        critical_value,
        p_value,
        reject: p_value <= alpha,
    })
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alpha must lie in (0, 0.5), got {alpha}")))
    }
}

/// Outcome of the exact local test of one set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Memoizing exact tester shared by the shortcut, branch and bound and the
/// oracle so that all three take identical decisions on identical sets.
/// Caches are owned, so use one tester per worker.
pub struct LocalTester<'a, P: SpectrumProvider + ?Sized> {
    stats: &'a FeatureStats,
    provider: &'a P,
    alpha: f64,
    spectra: HashMap<IndexSet, Arc<Spectrum>>,
    outcomes: HashMap<IndexSet, LocalOutcome>,
    evaluations: usize,
    trunc_tol: f64,
}

impl<'a, P: SpectrumProvider + ?Sized> LocalTester<'a, P> {
    pub fn new(stats: &'a FeatureStats, provider: &'a P, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            stats,
            provider,
            alpha,
            spectra: HashMap::new(),
            outcomes: HashMap::new(),
            evaluations: 0,
            trunc_tol: DEFAULT_TRUNC_TOL,
        })
    }

    /// Series truncation tolerance for every distribution evaluated here.
    pub fn with_trunc_tol(mut self, trunc_tol: f64) -> Self {
        self.trunc_tol = trunc_tol;
        self
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn stats(&self) -> &'a FeatureStats {
        self.stats
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distinct sets whose distribution was actually evaluated.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn spectrum(&mut self, set: &[usize]) -> Result<Arc<Spectrum>> {
        if let Some(s) = self.spectra.get(set) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(self.provider.spectrum(set)?);
        self.spectra.insert(set.to_vec(), Arc::clone(&s));
        Ok(s)
    }

    pub fn test(&mut self, set: &[usize]) -> Result<LocalOutcome> {
        if let Some(o) = self.outcomes.get(set) {
            return Ok(*o);
        }
        if set.is_empty() {
            return Err(Error::InvalidInput("cannot test the empty set".into()));
        }
        let spectrum = self.spectrum(set)?;
        let statistic = self.stats.stat(set);
        let p_value = self.dist(&spectrum)?.sf(statistic)?;
        let outcome = LocalOutcome {
            statistic,
            p_value,
            reject: p_value <= self.alpha,
        };
        self.evaluations += 1;
        self.outcomes.insert(set.to_vec(), outcome);
        Ok(outcome)
    }

    /// `g >= c` for a statistic against another set's null, i.e.
    /// `P(Q_set >= statistic) <= α`.
    pub fn exceeds_critical(&mut self, statistic: f64, set: &[usize]) -> Result<bool> {
        let spectrum = self.spectrum(set)?;
        let sf = self.dist(&spectrum)?.sf(statistic)?;
        Ok(sf <= self.alpha)
    }

    fn dist(&self, spectrum: &Spectrum) -> Result<WeightedChiSq> {
        Ok(WeightedChiSq::new(&spectrum.lambdas)?.with_trunc_tol(self.trunc_tol))
    }

    pub fn critical_value(&mut self, set: &[usize]) -> Result<f64> {
        let spectrum = self.spectrum(set)?;
        self.dist(&spectrum)?.quantile(1.0 - self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleDecision {
    Reject,
    NotReject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub decision: OracleDecision,
    pub n_tests: usize,
    pub first_failure: Option<IndexSet>,
}

impl OracleResult {
    pub fn rejects(&self) -> bool {
        self.decision == OracleDecision::Reject
    }
}

/// Full closed testing of `H_R` within `F`: every `R ⊆ S ⊆ F` is tested, in
/// binary counting order over `F ∖ R`, stopping at the first non-rejection.
pub fn full_closed_test<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    cap: usize,
) -> Result<OracleResult> {
    if base.is_empty() || !sets::is_subset(base, top) {
        return Err(Error::InvalidInput("closed testing needs a nonempty R within F".into()));
    }
    let free = sets::difference(top, base);
    if free.len() > cap || free.len() >= usize::BITS as usize {
        return Err(Error::CapExceeded {
            size: free.len(),
            cap,
        });
    }
    let mut n_tests = 0;
    for mask in 0u64..(1u64 << free.len()) {
        let mut set = base.to_vec();
        set.extend(free.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i));
        let set = sets::normalize(set);
        n_tests += 1;
        if !tester.test(&set)?.reject {
            return Ok(OracleResult {
                decision: OracleDecision::NotReject,
                n_tests,
                first_failure: Some(set),
            });
        }
    }
    Ok(OracleResult {
        decision: OracleDecision::Reject,
        n_tests,
        first_failure: None,
    })
}
